#pragma once

#include <map>
#include <string>
#include <vector>

#include "koopman/discovery.hpp"
#include "koopman/dynamics.hpp"
#include "koopman/edmd.hpp"
#include "koopman/spectral.hpp"
#include "koopman/stitching.hpp"

namespace koopman {

/// Trajectory CSV: optional leading '#' comment lines, then
/// `traj_id,t,x1,...,xd` with one row per sample and t = step * dt.
/// Doubles are written with 17 significant digits so round trips are exact.
void write_trajectories_csv(const std::string& path, const std::vector<Trajectory>& trajectories,
                            const std::map<std::string, std::string>& header_meta = {});
std::vector<Trajectory> read_trajectories_csv(const std::string& path);

/// Eigenvalue scatter CSV: `re,im,abs,in_unit_cluster`.
void write_eigenvalues_csv(const std::string& path, const SpectralDecomposition& spec,
                           const std::map<std::string, std::string>& header_meta = {});

/// Field CSV: `x1,x2,re_phi,im_phi,abs_phi`, one row per grid node.
void write_field_csv(const std::string& path, const EigenfunctionField& field,
                     const std::map<std::string, std::string>& header_meta = {});

/// Partition CSV: `x1,x2,label` (0 marks unassigned nodes).
void write_partition_csv(const std::string& path, const Partition& partition,
                         const std::map<std::string, std::string>& header_meta = {});

/// Sparsity mask CSV: `row,col,value` of the stitched operator's nonzeros.
void write_sparsity_csv(const std::string& path, const StitchedModel& model,
                        const std::map<std::string, std::string>& header_meta = {});

std::string dictionary_to_json(const Dictionary& dict);
Dictionary dictionary_from_json(const std::string& text);

void save_model(const std::string& path, const KoopmanModel& model,
                const std::map<std::string, std::string>& provenance = {});
KoopmanModel load_model(const std::string& path);

void save_stitched(const std::string& path, const StitchedModel& model);
StitchedModel load_stitched(const std::string& path);

/// History JSONL: one `{event, traj_id, multiplicity, epsilon, observed_error}`
/// object per line.
void write_history_jsonl(const std::string& path, const std::vector<DiscoveryEvent>& history);
std::vector<DiscoveryEvent> read_history_jsonl(const std::string& path);

std::string format_double(double v);  // %.17g

}  // namespace koopman
