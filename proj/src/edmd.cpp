#include "koopman/edmd.hpp"

#include <Eigen/SVD>

namespace koopman {

SnapshotPairs build_pairs(const std::vector<Trajectory>& trajectories) {
    if (trajectories.empty()) throw ValidationError("build_pairs: no trajectories");
    const Index d = trajectories.front().states.rows();
    Index m = 0;
    for (const auto& t : trajectories) {
        if (t.states.rows() != d) throw ValidationError("build_pairs: mixed state dimensions");
        if (t.length() < 2)
            throw ValidationError("build_pairs: trajectory '" + t.id + "' has fewer than 2 states");
        m += t.length() - 1;
    }

    SnapshotPairs pairs;
    pairs.Xp.resize(d, m);
    pairs.Xf.resize(d, m);
    pairs.provenance.reserve(m);
    Index col = 0;
    for (const auto& t : trajectories) {
        const Index k = t.length() - 1;
        pairs.Xp.middleCols(col, k) = t.states.leftCols(k);
        pairs.Xf.middleCols(col, k) = t.states.rightCols(k);
        for (Index s = 0; s < k; ++s) pairs.provenance.push_back({t.id, static_cast<long>(s)});
        col += k;
    }
    return pairs;
}

PseudoInverse pseudo_inverse(const Mat& A, double rel_tol) {
    if (!A.allFinite()) throw ValidationError("pseudo_inverse: non-finite entries");
    Eigen::BDCSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 ? rel_tol * sv[0] : 0.0;

    Vec inv_sv = Vec::Zero(sv.size());
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > cutoff && sv[i] > 0.0) {
            inv_sv[i] = 1.0 / sv[i];
            ++rank;
        }
    }
    PseudoInverse out;
    out.matrix = svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
    out.rank = rank;
    return out;
}

KoopmanModel fit_lifted(const Mat& Yp, const Mat& Yf, const Dictionary& dict,
                        double rel_tol, const std::string& label) {
    if (Yp.rows() != Yf.rows() || Yp.cols() != Yf.cols())
        throw ValidationError("fit_lifted: Yp/Yf shape mismatch");
    if (Yp.cols() < 1) throw ValidationError("fit_lifted: no snapshot pairs");
    if (Yp.norm() == 0.0)
        throw NumericalError("fit_lifted: lifted predecessor matrix is identically zero");

    const PseudoInverse pinv = pseudo_inverse(Yp, rel_tol);
    if (pinv.rank == 0) throw NumericalError("fit_lifted: rank-zero lift");

    KoopmanModel model;
    model.label = label;
    model.dictionary = dict;
    model.K = Yf * pinv.matrix;

    const Mat residual = model.K * Yp - Yf;
    model.stats.pair_count = Yp.cols();
    model.stats.frobenius_residual = residual.norm();
    model.stats.max_column_residual = residual.colwise().norm().maxCoeff();
    model.stats.svd_rank = pinv.rank;
    model.stats.truncation_tol = rel_tol;
    return model;
}

KoopmanModel fit(const SnapshotPairs& pairs, const Dictionary& dict, double rel_tol,
                 const std::string& label) {
    const LiftedMatrix Yp = lift_batch(dict, pairs.Xp, pairs.provenance);
    const LiftedMatrix Yf = lift_batch(dict, pairs.Xf);
    KoopmanModel model = fit_lifted(Yp.values, Yf.values, dict, rel_tol, label);
    model.training_states = pairs.Xp;
    return model;
}

std::vector<Vec> predict(const KoopmanModel& model, const Vec& x0, long n) {
    if (n < 0) throw ValidationError("predict: n must be >= 0");
    std::vector<Vec> out;
    out.reserve(n + 1);
    out.push_back(lift(model.dictionary, x0));
    for (long i = 0; i < n; ++i) out.push_back(model.K * out.back());
    return out;
}

double learning_error(const KoopmanModel& model, const Trajectory& trajectory, long n) {
    if (n < 0) throw ValidationError("learning_error: n must be >= 0");
    const Index T = trajectory.length();
    if (T < n + 1) throw ValidationError("learning_error: n exceeds trajectory length");
    if (n == 0) return 0.0;

    const Mat Z = lift_batch(model.dictionary, trajectory.states).values;
    Mat Zn = Z;
    for (long i = 0; i < n; ++i) Zn = model.K * Zn;
    const Mat err = Zn.leftCols(T - n) - Z.rightCols(T - n);
    return err.colwise().norm().maxCoeff();
}

}  // namespace koopman
