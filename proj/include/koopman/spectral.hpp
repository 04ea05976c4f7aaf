#pragma once

#include <optional>
#include <vector>

#include "koopman/edmd.hpp"
#include "koopman/types.hpp"

namespace koopman {

/// Eigen-decomposition of a Koopman matrix with unit-circle bookkeeping.
/// Eigenvalues are sorted by |lambda| descending, then |lambda - 1| ascending;
/// eigenvector columns have unit 2-norm with the maximum-modulus entry rotated
/// to be real positive, so repeated decompositions are bitwise identical.
struct SpectralDecomposition {
    CVec eigenvalues;
    CMat eigenvectors;
    std::vector<Index> unit_cluster;  // indices with |lambda - 1| < unit_tol
    double unit_tol = 0.05;
};

SpectralDecomposition decompose(const Mat& K, double unit_tol = 0.05);
SpectralDecomposition decompose(const KoopmanModel& model, double unit_tol = 0.05);

/// Geometric multiplicity of the unit cluster: the numerical rank (SVD at
/// rank_tol * sigma_max) of the matrix of unit-cluster eigenvectors.
Index unit_multiplicity(const SpectralDecomposition& spec, double rank_tol = 1e-8);

/// Axis-aligned evaluation lattice, enumerated first-axis-fastest like
/// grid_initial_conditions.
struct GridBox {
    Vec lower;
    Vec upper;
    int resolution = 100;

    std::vector<Vec> nodes() const;
    Mat node_matrix() const;  // dim x resolution^dim
};

/// Bounding box of a set of states (columns), inflated by `inflate` of the span.
GridBox bounding_grid(const Mat& states, double inflate = 0.10, int resolution = 100);

/// phi(x) = Psi(x)^T v sampled on a grid.
struct EigenfunctionField {
    GridBox grid;
    CVec values;
    Complex eigenvalue;
};

EigenfunctionField eigenfunction_field(const KoopmanModel& model, const CVec& eigvec,
                                       const GridBox& grid, Complex eigenvalue = {0.0, 0.0});

/// Grid-level ergodic partition extracted from eigenfunction magnitudes.
/// labels[j] in {1..v} or 0 for unassigned nodes.
struct Partition {
    std::vector<int> labels;
    int v = 0;
    std::vector<Vec> representative_peaks;  // per label, state of max |phi|
    std::vector<Index> field_of_label;      // per label, source field index
    GridBox grid;
};

/// Node j is assigned to field i when i maximizes |phi_i(j)| / max|phi_i| and
/// that normalized magnitude is >= level; ties go to the lowest index. Fields
/// that end up with no nodes contribute no label; all-zero fields never do.
Partition extract_partition(const std::vector<EigenfunctionField>& fields, double level);

struct BlockDiagonalization {
    CMat transform;
    std::vector<CMat> blocks;
    std::vector<int> group_of_eigenvalue;  // in sorted decomposition order
    double off_block_mass = 0.0;
};

/// Regroup the eigenbasis into contiguous blocks. `grouping`, when given,
/// assigns each sorted eigenvalue index to a block; the default groups the
/// unit cluster against the rest. Preconditions: every eigenvalue cluster
/// (grouped at rank_tol) has algebraic multiplicity equal to the numerical
/// rank of its eigenvectors; conjugate pairs must share a group.
BlockDiagonalization block_diagonalize(const Mat& K, const SpectralDecomposition& spec,
                                       double rank_tol = 1e-8,
                                       const std::optional<std::vector<int>>& grouping = {});

/// Grouping for block_diagonalize by partition label: each eigenvector goes to
/// the label owning its field's peak node (0 when the peak is unassigned).
std::vector<int> partition_grouping(const KoopmanModel& model,
                                    const SpectralDecomposition& spec,
                                    const Partition& partition);

/// Unit-cluster basis for field evaluation, in cluster order. Real unit modes
/// pass through unchanged. A conjugate pair in the cluster is a numerically
/// degenerate unit eigenspace whose individual eigenvectors mix the invariant
/// sets arbitrarily (the split direction is fit noise); the pair is replaced
/// by the rotation of its real span that maximizes field localization on the
/// grid (closed-form quartimax angle), restoring support-disjoint
/// characteristic-like representatives.
std::vector<CVec> localized_unit_basis(const KoopmanModel& model,
                                       const SpectralDecomposition& spec, const GridBox& grid);

}  // namespace koopman
