#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "koopman/cli.hpp"

namespace {

koopman::RunConfig resolve_config(const std::string& config_path, const std::string& system_name) {
    if (!config_path.empty()) return koopman::load_config(config_path);
    return koopman::default_config(system_name.empty() ? "toggle_switch" : system_name);
}

koopman::Vec parse_state(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    if (values.empty()) throw koopman::ValidationError("empty state '" + text + "'");
    koopman::Vec x(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) x[i] = values[i];
    return x;
}

std::vector<std::string> split_ids(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty()) out.push_back(cell);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Koopman operator toolkit: EDMD fitting, invariant-subspace discovery, "
                 "and phase-space stitching for bistable systems"};
    app.require_subcommand(1);

    std::string config_path, system_name, data_path, model_path, out_path, out_dir;
    std::string filter = "all", label, mask_path, x0_text, seed_ids_text;
    std::uint64_t order_seed = 0;
    long steps = 0;
    bool with_blocks = false;
    std::vector<std::string> model_paths;

    auto* sim = app.add_subcommand("simulate", "integrate the configured IC grid");
    sim->add_option("--config", config_path, "run-config JSON");
    sim->add_option("--system", system_name, "built-in system when no config is given");
    sim->add_option("--out", out_path, "output CSV path");

    auto* fit_cmd = app.add_subcommand("fit", "fit a Koopman model on trajectory data");
    fit_cmd->add_option("--config", config_path, "run-config JSON");
    fit_cmd->add_option("--system", system_name, "built-in system when no config is given");
    fit_cmd->add_option("--data", data_path, "trajectory CSV")->required();
    fit_cmd->add_option("--filter", filter, "all|left|right");
    fit_cmd->add_option("--label", label, "model label (defaults to the filter)");
    fit_cmd->add_option("--out", out_path, "model JSON path");

    auto* spec_cmd = app.add_subcommand("spectrum", "eigenvalues, fields, partition");
    spec_cmd->add_option("--config", config_path, "run-config JSON");
    spec_cmd->add_option("--system", system_name, "built-in system when no config is given");
    spec_cmd->add_option("--model", model_path, "model JSON")->required();
    spec_cmd->add_option("--out-dir", out_dir, "output directory");
    spec_cmd->add_flag("--blocks", with_blocks, "also attempt block diagonalization");

    auto* disc = app.add_subcommand("discover", "incremental invariant-subspace discovery");
    disc->add_option("--config", config_path, "run-config JSON");
    disc->add_option("--system", system_name, "built-in system when no config is given");
    disc->add_option("--data", data_path, "trajectory CSV")->required();
    disc->add_option("--seed-ids", seed_ids_text, "comma-separated trajectory ids to start from")
        ->required();
    disc->add_option("--order-seed", order_seed, "stream shuffle seed");
    disc->add_option("--out-dir", out_dir, "output directory");

    auto* st = app.add_subcommand("stitch", "combine local models into one operator");
    st->add_option("--models", model_paths, "local model JSON paths")->required()->expected(-1);
    st->add_option("--out", out_path, "stitched model JSON")->required();
    st->add_option("--mask", mask_path, "sparsity mask CSV");

    auto* pred = app.add_subcommand("predict", "propagate a lifted initial condition");
    pred->add_option("--model", model_path, "model or stitched JSON")->required();
    pred->add_option("--x0", x0_text, "initial state, comma separated")->required();
    pred->add_option("--steps", steps, "number of steps n")->required();
    pred->add_option("--out", out_path, "prediction CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) {
            const auto cfg = resolve_config(config_path, system_name);
            const auto path = koopman::cmd_simulate(cfg, out_path);
            std::cout << "wrote " << path << "\n";
        } else if (fit_cmd->parsed()) {
            const auto cfg = resolve_config(config_path, system_name);
            const auto path = koopman::cmd_fit(cfg, data_path, filter, label, out_path);
            std::cout << "wrote " << path << "\n";
        } else if (spec_cmd->parsed()) {
            const auto cfg = resolve_config(config_path, system_name);
            const auto report = koopman::cmd_spectrum(cfg, model_path, out_dir, with_blocks);
            for (const auto& f : report.files) std::cout << "wrote " << f << "\n";
        } else if (disc->parsed()) {
            const auto cfg = resolve_config(config_path, system_name);
            const auto report = koopman::cmd_discover(cfg, data_path, split_ids(seed_ids_text),
                                                      order_seed, out_dir);
            for (const auto& f : report.files) std::cout << "wrote " << f << "\n";
        } else if (st->parsed()) {
            for (const auto& f : koopman::cmd_stitch(model_paths, out_path, mask_path))
                std::cout << "wrote " << f << "\n";
        } else if (pred->parsed()) {
            const auto path = koopman::cmd_predict(model_path, parse_state(x0_text), steps, out_path);
            std::cout << "wrote " << path << "\n";
        }
    } catch (const koopman::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const koopman::Error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
