#include "koopman/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace koopman {

namespace fs = std::filesystem;

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
    if (!dir.empty()) fs::create_directories(dir);
}

Mat snapshots_of(const std::vector<Trajectory>& trajectories) {
    Index total = 0;
    for (const auto& t : trajectories) total += t.length();
    Mat snaps(trajectories.front().states.rows(), total);
    Index col = 0;
    for (const auto& t : trajectories) {
        snaps.middleCols(col, t.length()) = t.states;
        col += t.length();
    }
    return snaps;
}

Dictionary dictionary_for(const RunConfig& cfg, const std::vector<Trajectory>& all_trajectories) {
    const auto kind = dictionary_kind_from_string(cfg.dictionary.kind);
    if (kind == DictionaryKind::coordinate) {
        Mat probe = all_trajectories.front().states.leftCols(1);
        return build_dictionary(kind, probe, cfg.dictionary.n, 1.0, cfg.dictionary.seed,
                                cfg.dictionary.constant);
    }
    return build_dictionary(kind, snapshots_of(all_trajectories), cfg.dictionary.n,
                            cfg.dictionary.sigma, cfg.dictionary.seed, cfg.dictionary.constant);
}

std::string two_digits(long v) {
    std::ostringstream ss;
    ss << (v < 10 ? "0" : "") << v;
    return ss.str();
}

}  // namespace

std::vector<std::string> label_trajectories(const RunConfig& config,
                                            const std::vector<Trajectory>& trajectories) {
    const auto attractors = find_attractors(config.system);
    std::vector<std::string> names;
    if (attractors.size() == 2) {
        names = {"left", "right"};  // sorted by x1 in find_attractors
    } else {
        for (std::size_t i = 0; i < attractors.size(); ++i)
            names.push_back("basin" + std::to_string(i + 1));
    }
    std::vector<std::string> labels;
    labels.reserve(trajectories.size());
    for (const auto& t : trajectories) {
        const Vec final_state = t.states.col(t.length() - 1);
        std::string label;
        for (std::size_t a = 0; a < attractors.size(); ++a) {
            if ((final_state - attractors[a]).norm() < 0.5) {
                label = names[a];
                break;
            }
        }
        labels.push_back(label);
    }
    return labels;
}

std::string cmd_simulate(const RunConfig& config, const std::string& out_path) {
    const auto ics = grid_initial_conditions(config.simulate.ic_grid);
    SimulateOptions opts;
    opts.domain_guard = guard_box(config.simulate.ic_grid, config.simulate.domain_guard_factor);

    std::vector<Trajectory> trajectories;
    trajectories.reserve(ics.size());
    for (std::size_t i = 0; i < ics.size(); ++i) {
        const std::string id = "ic" + two_digits(static_cast<long>(i));
        try {
            trajectories.push_back(simulate(config.system, ics[i], config.simulate.dt,
                                            config.simulate.steps, id, opts));
        } catch (const IntegrationError& e) {
            std::cerr << "warning: skipping trajectory " << id << ": " << e.what() << "\n";
        }
    }
    if (trajectories.empty())
        throw NumericalError("cmd_simulate: every trajectory failed to integrate");

    ensure_dir(config.paths.out_dir);
    const std::string path =
        out_path.empty() ? join_path(config.paths.out_dir, config.system.name + "_trajectories.csv")
                         : out_path;
    std::map<std::string, std::string> meta = {
        {"system", config.system.name},
        {"dt", format_double(config.simulate.dt)},
        {"steps", std::to_string(config.simulate.steps)},
        {"ics", std::to_string(ics.size())}};
    write_trajectories_csv(path, trajectories, meta);
    return path;
}

std::string cmd_fit(const RunConfig& config, const std::string& data_path,
                    const std::string& filter, const std::string& label,
                    const std::string& out_path) {
    const auto all = read_trajectories_csv(data_path);
    std::vector<Trajectory> selected;
    if (filter.empty() || filter == "all") {
        selected = all;
    } else {
        const auto labels = label_trajectories(config, all);
        for (std::size_t i = 0; i < all.size(); ++i)
            if (labels[i] == filter) selected.push_back(all[i]);
    }
    if (selected.empty())
        throw ValidationError("cmd_fit: filter '" + filter + "' selected no trajectories");

    // Centers come from the whole dataset: the dictionary is shared state-space
    // infrastructure, the filter only selects the regression data.
    const Dictionary dict = dictionary_for(config, all);
    const std::string model_label = label.empty() ? (filter.empty() ? "all" : filter) : label;
    KoopmanModel model = fit(build_pairs(selected), dict, config.edmd.rel_tol, model_label);

    ensure_dir(config.paths.out_dir);
    const std::string path =
        out_path.empty()
            ? join_path(config.paths.out_dir, config.system.name + "_model_" + model_label + ".json")
            : out_path;
    save_model(path, model,
               {{"data", data_path},
                {"filter", filter.empty() ? "all" : filter},
                {"dict_seed", std::to_string(config.dictionary.seed)}});

    std::cout << "fit: label=" << model_label << " size=" << model.K.rows() << "x"
              << model.K.cols() << " pairs=" << model.stats.pair_count
              << " rank=" << model.stats.svd_rank
              << " frobenius_residual=" << model.stats.frobenius_residual
              << " max_column_residual=" << model.stats.max_column_residual << "\n";
    return path;
}

namespace {

bool is_stitched_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("'" + path + "' is not valid JSON: " + std::string(e.what()));
    }
    return j.contains("locals");
}

Mat stitched_training_states(const StitchedModel& model) {
    Index total = 0;
    for (const auto& m : model.locals) total += m.training_states.cols();
    if (total == 0)
        throw ValidationError("stitched model has no training states to define the grid");
    Mat out(model.locals.front().training_states.rows(), total);
    Index col = 0;
    for (const auto& m : model.locals) {
        out.middleCols(col, m.training_states.cols()) = m.training_states;
        col += m.training_states.cols();
    }
    return out;
}

}  // namespace

SpectrumReport cmd_spectrum(const RunConfig& config, const std::string& model_path,
                            const std::string& out_dir, bool with_blocks) {
    SpectrumReport report;
    const std::string dir = out_dir.empty() ? config.paths.out_dir : out_dir;
    ensure_dir(dir);
    const std::map<std::string, std::string> meta = {
        {"model", model_path}, {"unit_tol", format_double(config.spectral.unit_tol)}};

    if (is_stitched_json(model_path)) {
        const StitchedModel model = load_stitched(model_path);
        const auto spec = stitched_spectrum(model, config.spectral.unit_tol);
        report.unit_cluster_size = static_cast<Index>(spec.unit_cluster.size());
        report.multiplicity = unit_multiplicity(spec, config.spectral.rank_tol);

        const std::string eig_path = join_path(dir, "stitched_eigenvalues.csv");
        write_eigenvalues_csv(eig_path, spec, meta);
        report.files.push_back(eig_path);

        const GridBox grid = bounding_grid(stitched_training_states(model), 0.10,
                                           config.spectral.grid_resolution);
        const auto fields = stitched_unit_fields(model, grid, config.spectral.unit_tol);
        for (std::size_t k = 0; k < fields.size(); ++k) {
            const std::string field_path =
                join_path(dir, "stitched_field_" + std::to_string(k) + ".csv");
            write_field_csv(field_path, fields[k], meta);
            report.files.push_back(field_path);
        }
        if (!fields.empty()) {
            const Partition part = extract_partition(fields, config.spectral.level);
            const std::string part_path = join_path(dir, "stitched_partition.csv");
            write_partition_csv(part_path, part, meta);
            report.files.push_back(part_path);
        }
        std::cout << "unit multiplicity: " << report.multiplicity << " (cluster size "
                  << report.unit_cluster_size << ")\n";
        return report;
    }

    const KoopmanModel model = load_model(model_path);
    const auto spec = decompose(model, config.spectral.unit_tol);
    report.unit_cluster_size = static_cast<Index>(spec.unit_cluster.size());
    report.multiplicity = unit_multiplicity(spec, config.spectral.rank_tol);

    const std::string base = model.label.empty() ? "model" : model.label;
    const std::string eig_path = join_path(dir, base + "_eigenvalues.csv");
    write_eigenvalues_csv(eig_path, spec, meta);
    report.files.push_back(eig_path);

    if (model.training_states.cols() == 0)
        throw ValidationError("cmd_spectrum: model has no training states to define the grid");
    const GridBox grid =
        bounding_grid(model.training_states, 0.10, config.spectral.grid_resolution);

    const auto basis = localized_unit_basis(model, spec, grid);
    std::vector<EigenfunctionField> fields;
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const Index idx = spec.unit_cluster[k];
        fields.push_back(eigenfunction_field(model, basis[k], grid, spec.eigenvalues[idx]));
        const std::string field_path =
            join_path(dir, base + "_field_" + std::to_string(k) + ".csv");
        write_field_csv(field_path, fields.back(), meta);
        report.files.push_back(field_path);
    }

    if (!fields.empty()) {
        const Partition part = extract_partition(fields, config.spectral.level);
        const std::string part_path = join_path(dir, base + "_partition.csv");
        write_partition_csv(part_path, part, meta);
        report.files.push_back(part_path);

        if (with_blocks) {
            try {
                const auto grouping = partition_grouping(model, spec, part);
                const auto blocks =
                    block_diagonalize(model.K, spec, config.spectral.rank_tol, grouping);
                std::cout << "block structure:";
                for (const auto& b : blocks.blocks) std::cout << " " << b.rows() << "x" << b.cols();
                std::cout << " (off-block mass " << blocks.off_block_mass << ")\n";
            } catch (const NumericalError& e) {
                std::cerr << "warning: block diagonalization unavailable: " << e.what() << "\n";
            }
        }
    }

    std::cout << "unit multiplicity: " << report.multiplicity << " (cluster size "
              << report.unit_cluster_size << ")\n";
    return report;
}

DiscoverReport cmd_discover(const RunConfig& config, const std::string& data_path,
                            const std::vector<std::string>& seed_ids, std::uint64_t order_seed,
                            const std::string& out_dir) {
    const auto all = read_trajectories_csv(data_path);
    if (seed_ids.empty()) throw ValidationError("cmd_discover: seed subset is empty");

    std::vector<Trajectory> initial;
    std::vector<Trajectory> stream;
    for (const auto& t : all) {
        if (std::find(seed_ids.begin(), seed_ids.end(), t.id) != seed_ids.end())
            initial.push_back(t);
        else
            stream.push_back(t);
    }
    if (initial.size() != seed_ids.size())
        throw ValidationError("cmd_discover: some seed ids were not found in the data");
    deterministic_shuffle(stream, order_seed);

    const DiscoveryState state = run_discovery(stream, initial, config.discovery_options());

    DiscoverReport report;
    report.initial_multiplicity = state.initial_multiplicity;
    report.final_multiplicity =
        state.history.empty() ? state.initial_multiplicity : state.history.back().multiplicity;
    Index prev = state.initial_multiplicity;
    for (const auto& ev : state.history) {
        if (ev.event == "refit") ++report.refits;
        if (ev.multiplicity < prev) report.monotone = false;
        prev = ev.multiplicity;
    }

    const std::string dir = out_dir.empty() ? config.paths.out_dir : out_dir;
    ensure_dir(dir);
    const std::string model_path = join_path(dir, "discovered_model.json");
    save_model(model_path, state.model,
               {{"data", data_path},
                {"order_seed", std::to_string(order_seed)},
                {"epsilon", format_double(state.epsilon)}});
    report.files.push_back(model_path);
    const std::string history_path = join_path(dir, "history.jsonl");
    write_history_jsonl(history_path, state.history);
    report.files.push_back(history_path);

    std::cout << "discover: initial multiplicity " << report.initial_multiplicity
              << ", final multiplicity " << report.final_multiplicity << ", refits "
              << report.refits << ", monotonicity "
              << (report.monotone ? "pass" : "fail") << "\n";
    return report;
}

std::vector<std::string> cmd_stitch(const std::vector<std::string>& model_paths,
                                    const std::string& out_path, const std::string& mask_path) {
    if (model_paths.empty()) throw ValidationError("cmd_stitch: no local models given");
    std::vector<KoopmanModel> locals;
    for (const auto& p : model_paths) locals.push_back(load_model(p));
    const StitchedModel stitched = stitch(locals);

    save_stitched(out_path, stitched);
    std::vector<std::string> files{out_path};
    if (!mask_path.empty()) {
        write_sparsity_csv(mask_path, stitched);
        files.push_back(mask_path);
    }
    std::cout << "stitch: " << stitched.locals.size() << " blocks, size "
              << stitched.total_size << "x" << stitched.total_size << "\n";
    return files;
}

std::string cmd_predict(const std::string& model_path, const Vec& x0, long n,
                        const std::string& out_path) {
    std::ifstream probe(model_path);
    if (!probe) throw ValidationError("cmd_predict: cannot open '" + model_path + "'");
    nlohmann::json j;
    try {
        probe >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("cmd_predict: '" + model_path + "' is not valid JSON: " + e.what());
    }

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ValidationError("cmd_predict: cannot write '" + out_path + "'");

    if (j.contains("locals")) {
        const StitchedModel model = load_stitched(model_path);
        const Index label = classify(model.classifier, x0);
        const auto seq = stitched_predict(model, x0, n);
        out << "step,label";
        for (Index i = 1; i <= model.total_size; ++i) out << ",psi" << i;
        out << "\n";
        for (std::size_t s = 0; s < seq.size(); ++s) {
            out << s << "," << model.classifier.labels[label];
            for (Index i = 0; i < seq[s].size(); ++i) out << "," << format_double(seq[s][i]);
            out << "\n";
        }
    } else {
        const KoopmanModel model = load_model(model_path);
        const auto seq = predict(model, x0, n);
        out << "step";
        for (Index i = 1; i <= model.dictionary.size(); ++i) out << ",psi" << i;
        out << "\n";
        for (std::size_t s = 0; s < seq.size(); ++s) {
            out << s;
            for (Index i = 0; i < seq[s].size(); ++i) out << "," << format_double(seq[s][i]);
            out << "\n";
        }
    }
    return out_path;
}

}  // namespace koopman
