#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "koopman/types.hpp"

namespace koopman {

enum class DictionaryKind { gaussian_rbf, coordinate };

std::string to_string(DictionaryKind kind);
DictionaryKind dictionary_kind_from_string(const std::string& s);

/// A finite observable dictionary Psi. For gaussian_rbf, observable i is
/// exp(-|x - c_i|^2 / sigma^2); the coordinate kind is the identity lift
/// (which makes the regression coincide with classical DMD). An optional
/// trailing constant-1 observable can be enabled.
struct Dictionary {
    DictionaryKind kind = DictionaryKind::gaussian_rbf;
    Mat centers;        // dim x n_centers (gaussian_rbf only)
    double sigma = 0.4;
    std::uint64_t seed = 0;
    bool constant = false;
    int state_dim = 0;  // coordinate kind only

    /// Number of observables, including the constant when enabled.
    Index size() const;
    Index input_dim() const;
};

double rbf_value(const Vec& x, const Vec& center, double sigma);

/// Build a dictionary from candidate snapshots (dim x m columns).
/// gaussian_rbf centers are farthest-point seeds: the first is drawn from the
/// candidates by the seed, each next maximizes the distance to those already
/// chosen (ties to the lowest column index), so centers are pairwise distinct.
/// Throws ValidationError when fewer than n_centers distinct candidates exist.
Dictionary build_dictionary(DictionaryKind kind, const Mat& data, int n_centers,
                            double sigma, std::uint64_t seed, bool constant = false);

/// Evaluate all observables at one state.
Vec lift(const Dictionary& dict, const Vec& x);

/// Provenance of one lifted column.
struct SnapshotRef {
    std::string traj_id;
    long step = 0;
};

struct LiftedMatrix {
    Mat values;  // N x m, column j = lift(states column j)
    std::vector<SnapshotRef> source;
};

/// Lift a batch of states (dim x m). Column order is preserved.
LiftedMatrix lift_batch(const Dictionary& dict, const Mat& states,
                        const std::vector<SnapshotRef>& source = {});

}  // namespace koopman
