#include "koopman/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace koopman {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key()))
            throw ValidationError("config: unknown key '" + it.key() + "' in " + where);
    }
}

Vec to_vec(const json& arr) {
    Vec v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
    return v;
}

json from_vec(const Vec& v) {
    json arr = json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

}  // namespace

DiscoveryOptions RunConfig::discovery_options() const {
    DiscoveryOptions opts;
    opts.horizon = discovery.n;
    opts.safety = discovery.safety;
    opts.policy = dictionary_policy_from_string(discovery.dictionary_policy);
    opts.n_centers = dictionary.n;
    opts.sigma = dictionary.sigma;
    opts.dict_seed = dictionary.seed;
    opts.constant = dictionary.constant;
    opts.rel_tol = edmd.rel_tol;
    opts.unit_tol = spectral.unit_tol;
    opts.rank_tol = spectral.rank_tol;
    return opts;
}

RunConfig default_config(const std::string& system_name) {
    RunConfig cfg;
    if (system_name == "toggle_switch") {
        cfg.system.name = "toggle_switch";
        cfg.system.dim = 2;
        cfg.system.params = {{"alpha1", 1.0}, {"alpha2", 1.0}, {"beta", 3.55},
                             {"gamma", 3.53}, {"kappa1", 0.5}, {"kappa2", 0.5}};
        cfg.simulate.dt = 1.25;
        cfg.simulate.ic_grid.lower = (Vec(2) << 0.0, 0.0).finished();
        cfg.simulate.ic_grid.upper = (Vec(2) << 3.0, 3.0).finished();
        cfg.simulate.ic_grid.counts = {9, 9};
    } else if (system_name == "second_order") {
        cfg.system.name = "second_order";
        cfg.system.dim = 2;
        cfg.simulate.dt = 0.8;
        cfg.simulate.ic_grid.lower = (Vec(2) << -2.0, -1.0).finished();
        cfg.simulate.ic_grid.upper = (Vec(2) << 2.0, 3.0).finished();
        cfg.simulate.ic_grid.counts = {9, 9};
    } else {
        throw ValidationError("default_config: unknown system '" + system_name + "'");
    }
    return cfg;
}

RunConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config: invalid JSON: ") + e.what());
    }
    require_keys(doc, "top level",
                 {"system", "simulate", "dictionary", "edmd", "spectral", "discovery", "paths"});

    std::string system_name = "toggle_switch";
    if (doc.contains("system") && doc["system"].contains("name"))
        system_name = doc["system"]["name"].get<std::string>();
    RunConfig cfg = default_config(system_name);

    if (doc.contains("system")) {
        const json& s = doc["system"];
        require_keys(s, "system", {"name", "dim", "params"});
        if (s.contains("dim")) cfg.system.dim = s["dim"].get<int>();
        if (s.contains("params")) {
            for (auto it = s["params"].begin(); it != s["params"].end(); ++it)
                cfg.system.params[it.key()] = it.value().get<double>();
        }
    }
    if (doc.contains("simulate")) {
        const json& s = doc["simulate"];
        require_keys(s, "simulate", {"dt", "steps", "ic_grid", "domain_guard_factor"});
        if (s.contains("dt")) cfg.simulate.dt = s["dt"].get<double>();
        if (s.contains("steps")) cfg.simulate.steps = s["steps"].get<long>();
        if (s.contains("domain_guard_factor"))
            cfg.simulate.domain_guard_factor = s["domain_guard_factor"].get<double>();
        if (s.contains("ic_grid")) {
            const json& g = s["ic_grid"];
            require_keys(g, "simulate.ic_grid", {"lower", "upper", "counts"});
            if (g.contains("lower")) cfg.simulate.ic_grid.lower = to_vec(g["lower"]);
            if (g.contains("upper")) cfg.simulate.ic_grid.upper = to_vec(g["upper"]);
            if (g.contains("counts"))
                cfg.simulate.ic_grid.counts = g["counts"].get<std::vector<int>>();
        }
    }
    if (doc.contains("dictionary")) {
        const json& s = doc["dictionary"];
        require_keys(s, "dictionary", {"kind", "N", "sigma", "seed", "constant"});
        if (s.contains("kind")) cfg.dictionary.kind = s["kind"].get<std::string>();
        if (s.contains("N")) cfg.dictionary.n = s["N"].get<int>();
        if (s.contains("sigma")) cfg.dictionary.sigma = s["sigma"].get<double>();
        if (s.contains("seed")) cfg.dictionary.seed = s["seed"].get<std::uint64_t>();
        if (s.contains("constant")) cfg.dictionary.constant = s["constant"].get<bool>();
    }
    if (doc.contains("edmd")) {
        const json& s = doc["edmd"];
        require_keys(s, "edmd", {"rel_tol"});
        if (s.contains("rel_tol")) cfg.edmd.rel_tol = s["rel_tol"].get<double>();
    }
    if (doc.contains("spectral")) {
        const json& s = doc["spectral"];
        require_keys(s, "spectral", {"unit_tol", "rank_tol", "grid_resolution", "level"});
        if (s.contains("unit_tol")) cfg.spectral.unit_tol = s["unit_tol"].get<double>();
        if (s.contains("rank_tol")) cfg.spectral.rank_tol = s["rank_tol"].get<double>();
        if (s.contains("grid_resolution"))
            cfg.spectral.grid_resolution = s["grid_resolution"].get<int>();
        if (s.contains("level")) cfg.spectral.level = s["level"].get<double>();
    }
    if (doc.contains("discovery")) {
        const json& s = doc["discovery"];
        require_keys(s, "discovery", {"n", "safety", "dictionary_policy"});
        if (s.contains("n")) cfg.discovery.n = s["n"].get<long>();
        if (s.contains("safety")) cfg.discovery.safety = s["safety"].get<double>();
        if (s.contains("dictionary_policy"))
            cfg.discovery.dictionary_policy = s["dictionary_policy"].get<std::string>();
    }
    if (doc.contains("paths")) {
        const json& s = doc["paths"];
        require_keys(s, "paths", {"out_dir"});
        if (s.contains("out_dir")) cfg.paths.out_dir = s["out_dir"].get<std::string>();
    }

    if (cfg.simulate.dt <= 0.0) throw ValidationError("config: dt must be positive");
    if (cfg.simulate.steps < 1) throw ValidationError("config: steps must be >= 1");
    if (cfg.dictionary.n < 1) throw ValidationError("config: dictionary.N must be >= 1");
    if (!(cfg.spectral.level > 0.0 && cfg.spectral.level < 1.0))
        throw ValidationError("config: spectral.level must be in (0, 1)");
    (void)dictionary_kind_from_string(cfg.dictionary.kind);
    (void)dictionary_policy_from_string(cfg.discovery.dictionary_policy);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
    json doc;
    doc["system"] = {{"name", cfg.system.name}, {"dim", cfg.system.dim},
                     {"params", json::object()}};
    for (const auto& [k, v] : cfg.system.params) doc["system"]["params"][k] = v;
    doc["simulate"] = {{"dt", cfg.simulate.dt},
                       {"steps", cfg.simulate.steps},
                       {"ic_grid",
                        {{"lower", from_vec(cfg.simulate.ic_grid.lower)},
                         {"upper", from_vec(cfg.simulate.ic_grid.upper)},
                         {"counts", cfg.simulate.ic_grid.counts}}},
                       {"domain_guard_factor", cfg.simulate.domain_guard_factor}};
    doc["dictionary"] = {{"kind", cfg.dictionary.kind},
                         {"N", cfg.dictionary.n},
                         {"sigma", cfg.dictionary.sigma},
                         {"seed", cfg.dictionary.seed},
                         {"constant", cfg.dictionary.constant}};
    doc["edmd"] = {{"rel_tol", cfg.edmd.rel_tol}};
    doc["spectral"] = {{"unit_tol", cfg.spectral.unit_tol},
                       {"rank_tol", cfg.spectral.rank_tol},
                       {"grid_resolution", cfg.spectral.grid_resolution},
                       {"level", cfg.spectral.level}};
    doc["discovery"] = {{"n", cfg.discovery.n},
                        {"safety", cfg.discovery.safety},
                        {"dictionary_policy", cfg.discovery.dictionary_policy}};
    doc["paths"] = {{"out_dir", cfg.paths.out_dir}};
    return doc.dump(2) + "\n";
}

}  // namespace koopman
