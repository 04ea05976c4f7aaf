#pragma once

#include <string>

#include "koopman/discovery.hpp"
#include "koopman/dynamics.hpp"
#include "koopman/lifting.hpp"

namespace koopman {

/// One canonical run configuration. Every field has a default; unknown JSON
/// keys are rejected so typos cannot silently fall back to defaults.
struct RunConfig {
    SystemSpec system;

    struct Simulate {
        double dt = 1.25;
        long steps = 1000;
        InitialConditionGrid ic_grid;
        double domain_guard_factor = 10.0;
    } simulate;

    struct DictionaryCfg {
        std::string kind = "gaussian_rbf";
        int n = 30;
        double sigma = 0.4;
        std::uint64_t seed = 0;
        bool constant = false;
    } dictionary;

    struct Edmd {
        double rel_tol = 1e-10;
    } edmd;

    struct Spectral {
        double unit_tol = 0.05;
        double rank_tol = 1e-8;
        int grid_resolution = 100;
        double level = 0.5;
    } spectral;

    struct Discovery {
        long n = 10;
        double safety = 1.5;
        std::string dictionary_policy = "reseed";
    } discovery;

    struct Paths {
        std::string out_dir = "out";
    } paths;

    DiscoveryOptions discovery_options() const;
};

/// Built-in defaults for "toggle_switch" (dt 1.25, ICs 9x9 over [0,3]^2) and
/// "second_order" (dt 0.8, ICs 9x9 over [-2,2]x[-1,3]).
RunConfig default_config(const std::string& system_name);

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

}  // namespace koopman
