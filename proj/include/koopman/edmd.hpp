#pragma once

#include <string>
#include <vector>

#include "koopman/dynamics.hpp"
#include "koopman/lifting.hpp"
#include "koopman/types.hpp"

namespace koopman {

/// Predecessor/successor snapshot matrices. Column j of Xf is the in-trajectory
/// successor of column j of Xp; pairs never span trajectory boundaries.
struct SnapshotPairs {
    Mat Xp;
    Mat Xf;
    std::vector<SnapshotRef> provenance;  // (traj_id, step) of each Xp column

    Index count() const { return Xp.cols(); }
};

SnapshotPairs build_pairs(const std::vector<Trajectory>& trajectories);

struct PseudoInverse {
    Mat matrix;
    Index rank = 0;
};

/// Moore-Penrose pseudo-inverse by SVD; singular values below rel_tol * sigma_max
/// are treated as zero.
PseudoInverse pseudo_inverse(const Mat& A, double rel_tol = 1e-10);

struct TrainingStats {
    Index pair_count = 0;
    double frobenius_residual = 0.0;
    double max_column_residual = 0.0;
    Index svd_rank = 0;
    double truncation_tol = 0.0;
};

/// A fitted finite-dimensional Koopman approximation: K minimizes |K Yp - Yf|_F
/// over the truncated-SVD solution family, with its dictionary and fit metadata.
struct KoopmanModel {
    std::string label;
    Mat K;
    Dictionary dictionary;
    TrainingStats stats;
    /// States behind the Xp columns used in the fit; feeds the nearest-snapshot
    /// membership classifier. May be empty for hand-built models.
    Mat training_states;
};

/// Least-squares solve of K = Yf pinv(Yp) on already-lifted matrices.
KoopmanModel fit_lifted(const Mat& Yp, const Mat& Yf, const Dictionary& dict,
                        double rel_tol = 1e-10, const std::string& label = "");

/// Lift the snapshot pairs through the dictionary and fit.
KoopmanModel fit(const SnapshotPairs& pairs, const Dictionary& dict,
                 double rel_tol = 1e-10, const std::string& label = "");

/// (Psi(x0), K Psi(x0), ..., K^n Psi(x0)) by repeated multiplication.
std::vector<Vec> predict(const KoopmanModel& model, const Vec& x0, long n);

/// max over valid start indices s of | K^n Psi(x_s) - Psi(x_{s+n}) |_2.
double learning_error(const KoopmanModel& model, const Trajectory& trajectory, long n);

}  // namespace koopman
