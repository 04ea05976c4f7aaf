#include "koopman/lifting.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace koopman {

std::string to_string(DictionaryKind kind) {
    switch (kind) {
        case DictionaryKind::gaussian_rbf: return "gaussian_rbf";
        case DictionaryKind::coordinate: return "coordinate";
    }
    throw ValidationError("unknown dictionary kind");
}

DictionaryKind dictionary_kind_from_string(const std::string& s) {
    if (s == "gaussian_rbf") return DictionaryKind::gaussian_rbf;
    if (s == "coordinate") return DictionaryKind::coordinate;
    throw ValidationError("unknown dictionary kind '" + s + "'");
}

Index Dictionary::size() const {
    Index n = kind == DictionaryKind::coordinate ? state_dim : centers.cols();
    return n + (constant ? 1 : 0);
}

Index Dictionary::input_dim() const {
    return kind == DictionaryKind::coordinate ? state_dim : centers.rows();
}

double rbf_value(const Vec& x, const Vec& center, double sigma) {
    if (sigma <= 0.0) throw ValidationError("rbf_value: sigma must be positive");
    if (x.size() != center.size()) throw ValidationError("rbf_value: dimension mismatch");
    return std::exp(-(x - center).squaredNorm() / (sigma * sigma));
}

Dictionary build_dictionary(DictionaryKind kind, const Mat& data, int n_centers,
                            double sigma, std::uint64_t seed, bool constant) {
    Dictionary dict;
    dict.kind = kind;
    dict.seed = seed;
    dict.constant = constant;

    if (kind == DictionaryKind::coordinate) {
        if (data.rows() < 1) throw ValidationError("build_dictionary: empty data");
        dict.state_dim = static_cast<int>(data.rows());
        dict.sigma = 0.0;
        return dict;
    }

    if (sigma <= 0.0) throw ValidationError("build_dictionary: sigma must be positive");
    if (n_centers < 1) throw ValidationError("build_dictionary: need at least one center");
    const Index m = data.cols();
    if (m < 1) throw ValidationError("build_dictionary: empty candidate set");
    dict.sigma = sigma;

    // Farthest-point traversal over the candidate columns.
    std::mt19937_64 gen(seed);
    const Index first = static_cast<Index>(gen() % static_cast<std::uint64_t>(m));

    std::vector<Index> chosen{first};
    Eigen::RowVectorXd d2 =
        (data.colwise() - data.col(first)).colwise().squaredNorm();
    while (static_cast<int>(chosen.size()) < n_centers) {
        Index best = 0;
        double best_d = -1.0;
        for (Index j = 0; j < m; ++j) {
            if (d2[j] > best_d) {
                best_d = d2[j];
                best = j;
            }
        }
        if (best_d <= 0.0)
            throw ValidationError(
                "build_dictionary: fewer distinct candidate centers than requested");
        chosen.push_back(best);
        d2 = d2.cwiseMin(
            (data.colwise() - data.col(best)).colwise().squaredNorm());
    }

    dict.centers.resize(data.rows(), n_centers);
    for (int i = 0; i < n_centers; ++i) dict.centers.col(i) = data.col(chosen[i]);
    return dict;
}

Vec lift(const Dictionary& dict, const Vec& x) {
    if (x.size() != dict.input_dim()) throw ValidationError("lift: dimension mismatch");
    Vec out(dict.size());
    if (dict.kind == DictionaryKind::coordinate) {
        out.head(x.size()) = x;
    } else {
        const double s2 = dict.sigma * dict.sigma;
        out.head(dict.centers.cols()) =
            (-(dict.centers.colwise() - x).colwise().squaredNorm() / s2).array().exp();
    }
    if (dict.constant) out[out.size() - 1] = 1.0;
    if (!out.allFinite()) throw NumericalError("lift: non-finite observable value");
    return out;
}

LiftedMatrix lift_batch(const Dictionary& dict, const Mat& states,
                        const std::vector<SnapshotRef>& source) {
    if (states.cols() < 1) throw ValidationError("lift_batch: empty state list");
    if (states.rows() != dict.input_dim())
        throw ValidationError("lift_batch: dimension mismatch");
    if (!source.empty() && static_cast<Index>(source.size()) != states.cols())
        throw ValidationError("lift_batch: provenance size mismatch");

    LiftedMatrix lm;
    lm.values.resize(dict.size(), states.cols());
    if (dict.kind == DictionaryKind::coordinate) {
        lm.values.topRows(states.rows()) = states;
    } else {
        const double s2 = dict.sigma * dict.sigma;
        for (Index i = 0; i < dict.centers.cols(); ++i) {
            lm.values.row(i) =
                (-(states.colwise() - dict.centers.col(i)).colwise().squaredNorm() / s2)
                    .array()
                    .exp();
        }
    }
    if (dict.constant) lm.values.row(lm.values.rows() - 1).setOnes();
    if (!lm.values.allFinite()) throw NumericalError("lift_batch: non-finite value");
    lm.source = source;
    return lm;
}

}  // namespace koopman
