#include "doctest.h"

#include <random>

#include "koopman/stitching.hpp"
#include "oracles.hpp"

using namespace koopman;

namespace {

Dictionary coord_dict(int dim) {
    Mat probe = Mat::Zero(dim, 1);
    return build_dictionary(DictionaryKind::coordinate, probe, 0, 0.0, 0);
}

KoopmanModel scalar_model(const std::string& label, double k, double snapshot) {
    KoopmanModel m;
    m.label = label;
    m.K = Mat::Constant(1, 1, k);
    m.dictionary = coord_dict(1);
    m.training_states = Mat::Constant(1, 1, snapshot);
    return m;
}

// Two RBF locals living on well-separated snapshot clouds around (0,0) and (5,5).
std::pair<KoopmanModel, KoopmanModel> rbf_locals() {
    std::mt19937 gen(77);
    std::normal_distribution<double> dist(0.0, 0.3);
    auto cloud = [&](double cx, double cy) {
        Mat pts(2, 80);
        for (Index j = 0; j < pts.cols(); ++j) {
            pts(0, j) = cx + dist(gen);
            pts(1, j) = cy + dist(gen);
        }
        return pts;
    };
    auto make = [&](const std::string& label, double cx, double cy, double decay) {
        const Mat snaps = cloud(cx, cy);
        const Dictionary dict = build_dictionary(DictionaryKind::gaussian_rbf, snaps, 4, 0.4, 1);
        KoopmanModel m;
        m.label = label;
        m.dictionary = dict;
        m.K = decay * Mat::Identity(4, 4);
        m.K(0, 0) = 1.0;
        m.training_states = snaps;
        return m;
    };
    return {make("left", 0.0, 0.0, 0.5), make("right", 5.0, 5.0, 0.3)};
}

std::vector<Complex> eigs_of(const Mat& K) {
    const auto spec = decompose(K, 0.05);
    return {spec.eigenvalues.data(), spec.eigenvalues.data() + spec.eigenvalues.size()};
}

}  // namespace

TEST_CASE("stitching two scalar blocks") {
    const StitchedModel s = stitch({scalar_model("a", 0.7, 0.0), scalar_model("b", -0.2, 5.0)});
    CHECK(s.total_size == 2);
    CHECK(s.block_offsets == std::vector<Index>{0, 1});
    const Mat K = stitched_dense(s);
    CHECK(K(0, 0) == 0.7);
    CHECK(K(1, 1) == -0.2);
    CHECK(K(0, 1) == 0.0);
    CHECK(K(1, 0) == 0.0);
}

TEST_CASE("stitching a single local is a pass-through") {
    const KoopmanModel local = scalar_model("only", 0.9, 1.0);
    const StitchedModel s = stitch({local});
    CHECK(s.total_size == 1);
    CHECK(stitched_dense(s) == local.K);
    CHECK(classify(s.classifier, Vec::Constant(1, 42.0)) == 0);  // v = 1: always that label
}

TEST_CASE("stitch validation: duplicate labels, missing provenance") {
    CHECK_THROWS_AS(stitch({scalar_model("x", 0.1, 0.0), scalar_model("x", 0.2, 1.0)}),
                    ValidationError);
    KoopmanModel bare = scalar_model("bare", 0.5, 0.0);
    bare.training_states = Mat();
    CHECK_THROWS_AS(stitch({bare, scalar_model("ok", 0.5, 1.0)}), ValidationError);
    CHECK_THROWS_AS(stitch({}), ValidationError);
}

TEST_CASE("classify: zero distance wins, ties break to the lowest label") {
    const StitchedModel s = stitch({scalar_model("a", 0.7, 0.0), scalar_model("b", 0.3, 2.0)});
    CHECK(classify(s.classifier, Vec::Constant(1, 2.0)) == 1);   // exact snapshot of b
    CHECK(classify(s.classifier, Vec::Constant(1, -0.5)) == 0);  // nearest to a
    CHECK(classify(s.classifier, Vec::Constant(1, 1.0)) == 0);   // equidistant: lowest label
    CHECK_THROWS_AS(classify(s.classifier, Vec::Constant(1, std::numeric_limits<double>::infinity())),
                    ValidationError);
}

TEST_CASE("residual-argmin classification over a query trajectory") {
    Mat A(2, 2), B(2, 2);
    A << 0.8, 0.0, 0.0, 0.6;
    B << 0.1, -0.9, 0.9, 0.1;
    KoopmanModel ma = fit(build_pairs(oracle::linear_trajectories(A, 6, 15)), coord_dict(2));
    ma.label = "A";
    KoopmanModel mb = fit(build_pairs(oracle::linear_trajectories(B, 6, 15, 31)), coord_dict(2));
    mb.label = "B";
    const StitchedModel s = stitch({ma, mb}, ClassifierMethod::residual_argmin);
    const auto queries = oracle::linear_trajectories(B, 1, 15, 63);
    CHECK(classify(s.classifier, s.locals, queries[0], 5) == 1);
}

TEST_CASE("gated lift: exactly one nonzero block, contents in (0, 1]") {
    const auto [left, right] = rbf_locals();
    const StitchedModel s = stitch({left, right});
    const Vec x = (Vec(2) << 0.2, -0.1).finished();  // left cloud
    const Vec z = stitched_lift(s, x);
    REQUIRE(z.size() == 8);
    CHECK(z.head(4).minCoeff() > 0.0);
    CHECK(z.head(4).maxCoeff() <= 1.0);
    CHECK(z.tail(4).cwiseAbs().maxCoeff() == 0.0);

    // block-diagonal action keeps the support inside the same block
    const Vec next = stitched_dense(s) * z;
    CHECK(next.tail(4).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stitched prediction embeds the classified block's local prediction") {
    const auto [left, right] = rbf_locals();
    const StitchedModel s = stitch({left, right});
    const Vec x = (Vec(2) << 5.3, 4.9).finished();  // right cloud
    const auto stitched_seq = stitched_predict(s, x, 7);
    const auto local_seq = predict(right, x, 7);
    REQUIRE(stitched_seq.size() == 8);
    for (std::size_t t = 0; t < stitched_seq.size(); ++t) {
        CHECK(stitched_seq[t].head(4).cwiseAbs().maxCoeff() == 0.0);
        CHECK(stitched_seq[t].tail(4) == local_seq[t]);
    }
    CHECK(stitched_predict(s, x, 0).size() == 1);
}

TEST_CASE("stitched spectrum is the union of the locals' spectra") {
    const auto [left, right] = rbf_locals();
    const StitchedModel s = stitch({left, right});
    auto union_eigs = eigs_of(left.K);
    const auto right_eigs = eigs_of(right.K);
    union_eigs.insert(union_eigs.end(), right_eigs.begin(), right_eigs.end());
    CHECK(oracle::multiset_distance(eigs_of(stitched_dense(s)), union_eigs) < 1e-10);
}

TEST_CASE("unit multiplicity is additive across blocks") {
    const auto [left, right] = rbf_locals();
    const StitchedModel s = stitch({left, right});
    const Index ml = unit_multiplicity(decompose(left.K, 0.05));
    const Index mr = unit_multiplicity(decompose(right.K, 0.05));
    CHECK(unit_multiplicity(decompose(stitched_dense(s), 0.05)) == ml + mr);
}

TEST_CASE("permuting the locals permutes blocks without changing content") {
    const auto [left, right] = rbf_locals();
    const StitchedModel ab = stitch({left, right});
    const StitchedModel ba = stitch({right, left});
    CHECK(ab.locals[0].K == ba.locals[1].K);
    CHECK(ab.classifier.labels[0] == ba.classifier.labels[1]);
    CHECK(oracle::multiset_distance(eigs_of(stitched_dense(ab)), eigs_of(stitched_dense(ba))) <
          1e-12);
}

TEST_CASE("stitched spectrum equals the blockwise union with offset eigenvectors") {
    const auto [left, right] = rbf_locals();
    const StitchedModel s = stitch({left, right});
    const auto spec = stitched_spectrum(s, 0.05);
    REQUIRE(spec.eigenvalues.size() == 8);

    const auto ls = decompose(left.K, 0.05);
    const auto rs = decompose(right.K, 0.05);
    for (Index i = 0; i < 4; ++i) {
        CHECK(spec.eigenvalues[i] == ls.eigenvalues[i]);
        CHECK(spec.eigenvalues[4 + i] == rs.eigenvalues[i]);
        CHECK(spec.eigenvectors.block(0, i, 4, 1) == CMat(ls.eigenvectors.col(i)));
        CHECK(spec.eigenvectors.block(4, 4 + i, 4, 1) == CMat(rs.eigenvectors.col(i)));
        CHECK(spec.eigenvectors.block(4, i, 4, 1).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(spec.unit_cluster.size() == 2);
    // exact against the dense route as a multiset, up to solver noise
    std::vector<Complex> blockwise(spec.eigenvalues.data(), spec.eigenvalues.data() + 8);
    CHECK(oracle::multiset_distance(blockwise, eigs_of(stitched_dense(s))) < 1e-10);
}

TEST_CASE("stitched unit fields are gated to their own block's territory") {
    const auto [left, right] = rbf_locals();
    const StitchedModel s = stitch({left, right});
    GridBox grid;
    grid.lower = (Vec(2) << -1.0, -1.0).finished();
    grid.upper = (Vec(2) << 6.0, 6.0).finished();
    grid.resolution = 25;
    const auto fields = stitched_unit_fields(s, grid, 0.05);
    REQUIRE(fields.size() == 2);  // one unit mode per block
    const auto nodes = grid.nodes();
    for (std::size_t k = 0; k < fields.size(); ++k) {
        Index peak = 0;
        fields[k].values.cwiseAbs().maxCoeff(&peak);
        const Index owner = classify(s.classifier, nodes[peak]);
        CHECK(owner == static_cast<Index>(k));
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if (classify(s.classifier, nodes[j]) != static_cast<Index>(k))
                CHECK(std::abs(fields[k].values[static_cast<Index>(j)]) == 0.0);
        }
    }
}

TEST_CASE("sparsity triplets stay inside the block-diagonal mask") {
    const auto [left, right] = rbf_locals();
    const StitchedModel s = stitch({left, right});
    for (const auto& [r, c, v] : sparsity_triplets(s)) {
        CHECK(v != 0.0);
        const bool in_first = r < 4 && c < 4;
        const bool in_second = r >= 4 && c >= 4;
        CHECK((in_first || in_second));
    }
}
