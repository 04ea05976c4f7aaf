#pragma once

#include <string>
#include <vector>

#include "koopman/edmd.hpp"
#include "koopman/spectral.hpp"

namespace koopman {

enum class ClassifierMethod { nearest_snapshot, residual_argmin };

std::string to_string(ClassifierMethod m);
ClassifierMethod classifier_method_from_string(const std::string& s);

/// Computable surrogate of the characteristic functions chi_p: assigns exactly
/// one label to any finite state. nearest_snapshot is 1-NN over the locals'
/// training snapshots; residual_argmin needs a short query trajectory and picks
/// the local model with the smallest n-step learning error.
struct MembershipClassifier {
    ClassifierMethod method = ClassifierMethod::nearest_snapshot;
    std::vector<std::string> labels;
    std::vector<Mat> snapshots;  // per label, dim x m (nearest_snapshot)
};

/// Ordered local models with the block-diagonal stitched operator; blocks are
/// stored as offsets plus the locals' matrices, never as a dense L x L matrix.
struct StitchedModel {
    std::vector<KoopmanModel> locals;
    std::vector<Index> block_offsets;
    Index total_size = 0;
    MembershipClassifier classifier;
};

StitchedModel stitch(const std::vector<KoopmanModel>& locals,
                     ClassifierMethod method = ClassifierMethod::nearest_snapshot);

/// Label index in [0, v) of the block that owns x. Ties go to the lowest label.
Index classify(const MembershipClassifier& classifier, const Vec& x);

/// residual_argmin variant over a short query trajectory (also accepts
/// nearest_snapshot, which then classifies the trajectory's initial state).
Index classify(const MembershipClassifier& classifier, const std::vector<KoopmanModel>& locals,
               const Trajectory& query, long n);

/// Gated observable vector: block p holds locals[p].lift(x) when classify(x) = p,
/// all other blocks are exactly zero.
Vec stitched_lift(const StitchedModel& model, const Vec& x);

/// (Psi(x0), K_S Psi(x0), ..., K_S^n Psi(x0)) with the gated lift; equals the
/// classified block's local prediction embedded at its offset.
std::vector<Vec> stitched_predict(const StitchedModel& model, const Vec& x0, long n);

/// Nonzero triplets (row, col, value) of K_S, block order.
std::vector<std::tuple<Index, Index, double>> sparsity_triplets(const StitchedModel& model);

/// Dense K_S; intended for spectra and tests at desk scale.
Mat stitched_dense(const StitchedModel& model);

/// Spectrum of K_S through its block structure: the multiset union of the
/// locals' decompositions (exact for a block-diagonal operator), in block
/// order with the same sorting and unit-cluster bookkeeping per block.
SpectralDecomposition stitched_spectrum(const StitchedModel& model, double unit_tol = 0.05);

/// Unit-cluster fields of K_S on a grid: block p's field is chi_p-gated,
/// phi(x) = Psi_p(x)^T v on nodes classified to p and exactly zero elsewhere.
/// Degenerate unit pairs inside a block are localized first.
std::vector<EigenfunctionField> stitched_unit_fields(const StitchedModel& model,
                                                     const GridBox& grid, double unit_tol = 0.05);

}  // namespace koopman
