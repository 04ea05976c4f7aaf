#pragma once

#include <string>
#include <vector>

#include "koopman/edmd.hpp"
#include "koopman/spectral.hpp"

namespace koopman {

enum class DictionaryPolicy { keep, reseed };

std::string to_string(DictionaryPolicy policy);
DictionaryPolicy dictionary_policy_from_string(const std::string& s);

struct DiscoveryOptions {
    long horizon = 10;      // n of the learning-error test
    double safety = 1.5;    // epsilon = safety * max training error
    DictionaryPolicy policy = DictionaryPolicy::reseed;
    int n_centers = 30;
    double sigma = 0.4;
    std::uint64_t dict_seed = 0;
    bool constant = false;
    double rel_tol = 1e-10;
    double unit_tol = 0.05;
    double rank_tol = 1e-8;
};

struct DiscoveryEvent {
    std::string event;  // "accepted" | "refit"
    std::string traj_id;
    Index multiplicity = 0;
    double epsilon = 0.0;
    double observed_error = 0.0;
};

/// Evolving discovery state: current model, threshold, retained trajectories,
/// and the event history whose multiplicities must be nondecreasing.
struct DiscoveryState {
    KoopmanModel model;
    double epsilon = 0.0;
    std::vector<Trajectory> accepted;
    std::vector<DiscoveryEvent> history;
    Index initial_multiplicity = 0;
    DiscoveryOptions options;
};

struct NoveltyVerdict {
    bool is_novel = false;
    double observed_error = 0.0;
    double threshold = 0.0;
    long horizon = 0;
    bool degenerate_horizon = false;  // n == 0 voids the test
};

/// safety * max over the trajectories of learning_error(model, ., n).
double estimate_epsilon(const KoopmanModel& model, const std::vector<Trajectory>& training,
                        long n, double safety);

/// Fit a model on the given trajectories under the options (fresh farthest-point
/// centers over all their snapshots) and estimate its epsilon.
DiscoveryState initialize_discovery(const std::vector<Trajectory>& initial,
                                    const DiscoveryOptions& options);

NoveltyVerdict novelty_test(const DiscoveryState& state, const Trajectory& trajectory, long n);

/// Fold one trajectory into the state: refit on everything seen when novel,
/// otherwise record it and keep the model untouched.
DiscoveryState incorporate(DiscoveryState state, const Trajectory& trajectory);

DiscoveryState run_discovery(const std::vector<Trajectory>& stream,
                             const std::vector<Trajectory>& initial,
                             const DiscoveryOptions& options);

}  // namespace koopman
