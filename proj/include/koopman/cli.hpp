#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "koopman/config.hpp"
#include "koopman/io.hpp"

namespace koopman {

/// Basin label of each trajectory by final-state proximity (< 0.5) to the
/// system's attractors: "left", "right", or "" when it converged to neither.
std::vector<std::string> label_trajectories(const RunConfig& config,
                                            const std::vector<Trajectory>& trajectories);

/// Simulate the configured IC grid; writes one CSV holding every trajectory.
/// Trajectories that hit the domain guard are skipped with a note on stderr.
std::string cmd_simulate(const RunConfig& config, const std::string& out_path = "");

/// Fit a model on the trajectories selected by `filter` (all|left|right).
/// Dictionary centers are seeded from the full dataset regardless of filter.
std::string cmd_fit(const RunConfig& config, const std::string& data_path,
                    const std::string& filter, const std::string& label,
                    const std::string& out_path = "");

struct SpectrumReport {
    Index unit_cluster_size = 0;
    Index multiplicity = 0;
    std::vector<std::string> files;
};

/// Eigenvalue scatter, unit-cluster field CSVs, and the partition CSV.
/// When `with_blocks` is set, also attempts the partition-grouped block
/// diagonalization; a defective cluster degrades to a warning.
SpectrumReport cmd_spectrum(const RunConfig& config, const std::string& model_path,
                            const std::string& out_dir, bool with_blocks = false);

struct DiscoverReport {
    Index initial_multiplicity = 0;
    Index final_multiplicity = 0;
    long refits = 0;
    bool monotone = true;
    std::vector<std::string> files;
};

DiscoverReport cmd_discover(const RunConfig& config, const std::string& data_path,
                            const std::vector<std::string>& seed_ids, std::uint64_t order_seed,
                            const std::string& out_dir);

std::vector<std::string> cmd_stitch(const std::vector<std::string>& model_paths,
                                    const std::string& out_path, const std::string& mask_path);

std::string cmd_predict(const std::string& model_path, const Vec& x0, long n,
                        const std::string& out_path);

/// Seeded Fisher-Yates; std::shuffle is not pinned across standard libraries.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    for (std::size_t i = items.size(); i > 1; --i)
        std::swap(items[i - 1], items[gen() % i]);
}

}  // namespace koopman
