#include "koopman/stitching.hpp"

#include <set>

namespace koopman {

std::string to_string(ClassifierMethod m) {
    return m == ClassifierMethod::nearest_snapshot ? "nearest_snapshot" : "residual_argmin";
}

ClassifierMethod classifier_method_from_string(const std::string& s) {
    if (s == "nearest_snapshot") return ClassifierMethod::nearest_snapshot;
    if (s == "residual_argmin") return ClassifierMethod::residual_argmin;
    throw ValidationError("unknown classifier method '" + s + "'");
}

StitchedModel stitch(const std::vector<KoopmanModel>& locals, ClassifierMethod method) {
    if (locals.empty()) throw ValidationError("stitch: no local models");
    std::set<std::string> labels;
    for (const auto& m : locals) {
        if (!labels.insert(m.label).second)
            throw ValidationError("stitch: duplicate label '" + m.label + "'");
    }

    StitchedModel out;
    out.locals = locals;
    out.classifier.method = method;
    Index offset = 0;
    for (const auto& m : locals) {
        out.block_offsets.push_back(offset);
        offset += m.dictionary.size();
        out.classifier.labels.push_back(m.label);
        if (method == ClassifierMethod::nearest_snapshot) {
            if (m.training_states.cols() == 0)
                throw ValidationError("stitch: local model '" + m.label +
                                      "' has no training provenance for nearest_snapshot");
            out.classifier.snapshots.push_back(m.training_states);
        }
    }
    out.total_size = offset;
    return out;
}

Index classify(const MembershipClassifier& classifier, const Vec& x) {
    if (!x.allFinite()) throw ValidationError("classify: non-finite query state");
    if (classifier.labels.size() == 1) return 0;
    if (classifier.method != ClassifierMethod::nearest_snapshot)
        throw ValidationError("classify: residual_argmin needs a query trajectory");

    Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < classifier.snapshots.size(); ++p) {
        const double d =
            (classifier.snapshots[p].colwise() - x).colwise().squaredNorm().minCoeff();
        if (d < best_d) {  // strict: ties stay with the lowest label
            best_d = d;
            best = static_cast<Index>(p);
        }
    }
    return best;
}

Index classify(const MembershipClassifier& classifier, const std::vector<KoopmanModel>& locals,
               const Trajectory& query, long n) {
    if (classifier.method == ClassifierMethod::nearest_snapshot)
        return classify(classifier, query.states.col(0));
    Index best = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < locals.size(); ++p) {
        const double err = learning_error(locals[p], query, n);
        if (err < best_err) {
            best_err = err;
            best = static_cast<Index>(p);
        }
    }
    return best;
}

Vec stitched_lift(const StitchedModel& model, const Vec& x) {
    const Index p = classify(model.classifier, x);
    Vec out = Vec::Zero(model.total_size);
    out.segment(model.block_offsets[p], model.locals[p].dictionary.size()) =
        lift(model.locals[p].dictionary, x);
    return out;
}

std::vector<Vec> stitched_predict(const StitchedModel& model, const Vec& x0, long n) {
    if (n < 0) throw ValidationError("stitched_predict: n must be >= 0");
    const Index p = classify(model.classifier, x0);
    const auto& local = model.locals[p];
    const Index off = model.block_offsets[p];
    const Index size = local.dictionary.size();

    std::vector<Vec> out;
    out.reserve(n + 1);
    Vec z = lift(local.dictionary, x0);
    for (long i = 0; i <= n; ++i) {
        Vec full = Vec::Zero(model.total_size);
        full.segment(off, size) = z;
        out.push_back(std::move(full));
        if (i < n) z = local.K * z;
    }
    return out;
}

std::vector<std::tuple<Index, Index, double>> sparsity_triplets(const StitchedModel& model) {
    std::vector<std::tuple<Index, Index, double>> out;
    for (std::size_t p = 0; p < model.locals.size(); ++p) {
        const Mat& K = model.locals[p].K;
        const Index off = model.block_offsets[p];
        for (Index r = 0; r < K.rows(); ++r)
            for (Index c = 0; c < K.cols(); ++c)
                if (K(r, c) != 0.0) out.emplace_back(off + r, off + c, K(r, c));
    }
    return out;
}

Mat stitched_dense(const StitchedModel& model) {
    Mat K = Mat::Zero(model.total_size, model.total_size);
    for (std::size_t p = 0; p < model.locals.size(); ++p) {
        const Index off = model.block_offsets[p];
        const Index size = model.locals[p].dictionary.size();
        K.block(off, off, size, size) = model.locals[p].K;
    }
    return K;
}

SpectralDecomposition stitched_spectrum(const StitchedModel& model, double unit_tol) {
    SpectralDecomposition out;
    out.unit_tol = unit_tol;
    out.eigenvalues.resize(model.total_size);
    out.eigenvectors = CMat::Zero(model.total_size, model.total_size);
    Index col = 0;
    for (std::size_t p = 0; p < model.locals.size(); ++p) {
        const auto spec = decompose(model.locals[p], unit_tol);
        const Index off = model.block_offsets[p];
        const Index size = spec.eigenvalues.size();
        for (Index i = 0; i < size; ++i) {
            out.eigenvalues[col] = spec.eigenvalues[i];
            out.eigenvectors.block(off, col, size, 1) = spec.eigenvectors.col(i);
            if (std::abs(out.eigenvalues[col] - 1.0) < unit_tol) out.unit_cluster.push_back(col);
            ++col;
        }
    }
    return out;
}

std::vector<EigenfunctionField> stitched_unit_fields(const StitchedModel& model,
                                                     const GridBox& grid, double unit_tol) {
    const auto nodes = grid.node_matrix();
    std::vector<Index> owner(nodes.cols());
    for (Index j = 0; j < nodes.cols(); ++j) owner[j] = classify(model.classifier, nodes.col(j));

    std::vector<EigenfunctionField> fields;
    for (std::size_t p = 0; p < model.locals.size(); ++p) {
        const auto& local = model.locals[p];
        const auto spec = decompose(local, unit_tol);
        const auto basis = localized_unit_basis(local, spec, grid);
        const Mat Z = lift_batch(local.dictionary, nodes).values;
        for (std::size_t k = 0; k < basis.size(); ++k) {
            EigenfunctionField field;
            field.grid = grid;
            field.eigenvalue = spec.eigenvalues[spec.unit_cluster[k]];
            const CVec raw = Z.transpose().cast<Complex>() * basis[k];
            field.values = CVec::Zero(nodes.cols());
            for (Index j = 0; j < nodes.cols(); ++j)
                if (owner[j] == static_cast<Index>(p)) field.values[j] = raw[j];
            fields.push_back(std::move(field));
        }
    }
    return fields;
}

}  // namespace koopman
