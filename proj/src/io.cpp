#include "koopman/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace koopman {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    return in;
}

void write_meta(std::ofstream& out, const std::map<std::string, std::string>& meta) {
    for (const auto& [k, v] : meta) out << "# " << k << "=" << v << "\n";
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ValidationError("malformed number '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    return out;
}

json matrix_to_json(const Mat& m) {
    json data = json::array();
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};  // row-major
}

Mat matrix_from_json(const json& j) {
    const Index rows = j.at("rows").get<Index>();
    const Index cols = j.at("cols").get<Index>();
    const json& data = j.at("data");
    if (static_cast<Index>(data.size()) != rows * cols)
        throw ValidationError("matrix JSON: data length disagrees with dims");
    Mat m(rows, cols);
    Index k = 0;
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
    return m;
}

json dictionary_to_json_obj(const Dictionary& dict) {
    json centers = json::array();
    for (Index c = 0; c < dict.centers.cols(); ++c) {
        json point = json::array();
        for (Index r = 0; r < dict.centers.rows(); ++r) point.push_back(dict.centers(r, c));
        centers.push_back(point);
    }
    return {{"kind", to_string(dict.kind)},
            {"sigma", dict.sigma},
            {"centers", centers},
            {"seed", dict.seed},
            {"flags", {{"constant", dict.constant}}},
            {"state_dim", dict.state_dim}};
}

Dictionary dictionary_from_json_obj(const json& j) {
    Dictionary dict;
    dict.kind = dictionary_kind_from_string(j.at("kind").get<std::string>());
    dict.sigma = j.at("sigma").get<double>();
    dict.seed = j.at("seed").get<std::uint64_t>();
    dict.constant = j.at("flags").at("constant").get<bool>();
    dict.state_dim = j.value("state_dim", 0);
    const json& centers = j.at("centers");
    if (!centers.empty()) {
        const Index d = static_cast<Index>(centers[0].size());
        dict.centers.resize(d, static_cast<Index>(centers.size()));
        for (std::size_t c = 0; c < centers.size(); ++c)
            for (Index r = 0; r < d; ++r) dict.centers(r, c) = centers[c][r].get<double>();
    }
    return dict;
}

json model_to_json_obj(const KoopmanModel& model,
                       const std::map<std::string, std::string>& provenance) {
    json j = {{"label", model.label},
              {"dictionary", dictionary_to_json_obj(model.dictionary)},
              {"K", matrix_to_json(model.K)},
              {"training_stats",
               {{"m", model.stats.pair_count},
                {"frobenius_residual", model.stats.frobenius_residual},
                {"max_column_residual", model.stats.max_column_residual},
                {"svd_rank", model.stats.svd_rank},
                {"truncation_tol", model.stats.truncation_tol}}}};
    if (model.training_states.cols() > 0)
        j["training_states"] = matrix_to_json(model.training_states);
    if (!provenance.empty()) {
        json p = json::object();
        for (const auto& [k, v] : provenance) p[k] = v;
        j["provenance"] = p;
    }
    return j;
}

KoopmanModel model_from_json_obj(const json& j) {
    KoopmanModel model;
    model.label = j.at("label").get<std::string>();
    model.dictionary = dictionary_from_json_obj(j.at("dictionary"));
    model.K = matrix_from_json(j.at("K"));
    if (model.K.rows() != model.K.cols())
        throw ValidationError("model JSON: K is not square");
    if (model.K.rows() != model.dictionary.size())
        throw ValidationError("model JSON: K side disagrees with dictionary size");
    const json& s = j.at("training_stats");
    model.stats.pair_count = s.at("m").get<Index>();
    model.stats.frobenius_residual = s.at("frobenius_residual").get<double>();
    model.stats.max_column_residual = s.at("max_column_residual").get<double>();
    model.stats.svd_rank = s.at("svd_rank").get<Index>();
    model.stats.truncation_tol = s.at("truncation_tol").get<double>();
    if (j.contains("training_states")) model.training_states = matrix_from_json(j["training_states"]);
    return model;
}

}  // namespace

void write_trajectories_csv(const std::string& path, const std::vector<Trajectory>& trajectories,
                            const std::map<std::string, std::string>& meta) {
    if (trajectories.empty()) throw ValidationError("write_trajectories_csv: nothing to write");
    auto out = open_out(path);
    write_meta(out, meta);
    const int d = trajectories.front().dim();
    out << "traj_id,t";
    for (int i = 1; i <= d; ++i) out << ",x" << i;
    out << "\n";
    for (const auto& traj : trajectories) {
        if (traj.dim() != d)
            throw ValidationError("write_trajectories_csv: mixed dimensions");
        for (Index t = 0; t < traj.length(); ++t) {
            out << traj.id << "," << format_double(t * traj.dt);
            for (int i = 0; i < d; ++i) out << "," << format_double(traj.states(i, t));
            out << "\n";
        }
    }
}

std::vector<Trajectory> read_trajectories_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    // skip comments, then the header
    while (std::getline(in, line) && !line.empty() && line[0] == '#') {}
    if (line.empty() || line.rfind("traj_id,t", 0) != 0)
        throw ValidationError("trajectory CSV '" + path + "': missing 'traj_id,t,...' header");
    const int d = static_cast<int>(split(line, ',').size()) - 2;
    if (d < 1) throw ValidationError("trajectory CSV: no state columns");

    std::vector<Trajectory> out;
    std::vector<double> times;
    std::vector<Vec> states;
    std::string current;
    auto flush = [&]() {
        if (states.empty()) return;
        if (states.size() < 2)
            throw ValidationError("trajectory CSV: trajectory '" + current + "' has < 2 samples");
        Trajectory t;
        t.id = current;
        t.dt = times.size() > 1 ? times[1] - times[0] : 0.0;
        t.states.resize(d, static_cast<Index>(states.size()));
        for (std::size_t i = 0; i < states.size(); ++i) t.states.col(i) = states[i];
        out.push_back(std::move(t));
        times.clear();
        states.clear();
    };

    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split(line, ',');
        if (static_cast<int>(cells.size()) != d + 2)
            throw ValidationError("trajectory CSV: bad column count in row '" + line + "'");
        if (cells[0] != current) {
            flush();
            current = cells[0];
        }
        times.push_back(parse_double(cells[1]));
        Vec x(d);
        for (int i = 0; i < d; ++i) x[i] = parse_double(cells[2 + i]);
        states.push_back(x);
    }
    flush();
    if (out.empty()) throw ValidationError("trajectory CSV '" + path + "': no rows");
    return out;
}

void write_eigenvalues_csv(const std::string& path, const SpectralDecomposition& spec,
                           const std::map<std::string, std::string>& meta) {
    auto out = open_out(path);
    write_meta(out, meta);
    out << "re,im,abs,in_unit_cluster\n";
    for (Index i = 0; i < spec.eigenvalues.size(); ++i) {
        const bool in_cluster =
            std::find(spec.unit_cluster.begin(), spec.unit_cluster.end(), i) !=
            spec.unit_cluster.end();
        out << format_double(spec.eigenvalues[i].real()) << ","
            << format_double(spec.eigenvalues[i].imag()) << ","
            << format_double(std::abs(spec.eigenvalues[i])) << "," << (in_cluster ? 1 : 0)
            << "\n";
    }
}

void write_field_csv(const std::string& path, const EigenfunctionField& field,
                     const std::map<std::string, std::string>& meta) {
    auto out = open_out(path);
    write_meta(out, meta);
    out << "x1,x2,re_phi,im_phi,abs_phi\n";
    const auto nodes = field.grid.nodes();
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const Complex v = field.values[static_cast<Index>(j)];
        out << format_double(nodes[j][0]) << "," << format_double(nodes[j][1]) << ","
            << format_double(v.real()) << "," << format_double(v.imag()) << ","
            << format_double(std::abs(v)) << "\n";
    }
}

void write_partition_csv(const std::string& path, const Partition& partition,
                         const std::map<std::string, std::string>& meta) {
    auto out = open_out(path);
    write_meta(out, meta);
    out << "x1,x2,label\n";
    const auto nodes = partition.grid.nodes();
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        out << format_double(nodes[j][0]) << "," << format_double(nodes[j][1]) << ","
            << partition.labels[j] << "\n";
    }
}

void write_sparsity_csv(const std::string& path, const StitchedModel& model,
                        const std::map<std::string, std::string>& meta) {
    auto out = open_out(path);
    write_meta(out, meta);
    out << "row,col,value\n";
    for (const auto& [r, c, v] : sparsity_triplets(model))
        out << r << "," << c << "," << format_double(v) << "\n";
}

std::string dictionary_to_json(const Dictionary& dict) {
    return dictionary_to_json_obj(dict).dump(2) + "\n";
}

Dictionary dictionary_from_json(const std::string& text) {
    try {
        return dictionary_from_json_obj(json::parse(text));
    } catch (const json::exception& e) {
        throw ValidationError(std::string("dictionary JSON: ") + e.what());
    }
}

void save_model(const std::string& path, const KoopmanModel& model,
                const std::map<std::string, std::string>& provenance) {
    auto out = open_out(path);
    out << model_to_json_obj(model, provenance).dump(2) << "\n";
}

KoopmanModel load_model(const std::string& path) {
    auto in = open_in(path);
    try {
        json j;
        in >> j;
        return model_from_json_obj(j);
    } catch (const json::exception& e) {
        throw ValidationError("model JSON '" + path + "': " + e.what());
    }
}

void save_stitched(const std::string& path, const StitchedModel& model) {
    json locals = json::array();
    for (const auto& m : model.locals) locals.push_back(model_to_json_obj(m, {}));
    json j = {{"locals", locals},
              {"block_offsets", model.block_offsets},
              {"classifier", {{"method", to_string(model.classifier.method)},
                              {"reference", "embedded in locals' training_states"}}}};
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

StitchedModel load_stitched(const std::string& path) {
    auto in = open_in(path);
    try {
        json j;
        in >> j;
        std::vector<KoopmanModel> locals;
        for (const auto& lj : j.at("locals")) locals.push_back(model_from_json_obj(lj));
        const auto method =
            classifier_method_from_string(j.at("classifier").at("method").get<std::string>());
        StitchedModel model = stitch(locals, method);
        const auto offsets = j.at("block_offsets").get<std::vector<Index>>();
        if (offsets != model.block_offsets)
            throw ValidationError("stitched JSON: inconsistent block offsets");
        return model;
    } catch (const json::exception& e) {
        throw ValidationError("stitched JSON '" + path + "': " + e.what());
    }
}

void write_history_jsonl(const std::string& path, const std::vector<DiscoveryEvent>& history) {
    auto out = open_out(path);
    for (const auto& ev : history) {
        json j = {{"event", ev.event},
                  {"traj_id", ev.traj_id},
                  {"multiplicity", ev.multiplicity},
                  {"epsilon", ev.epsilon},
                  {"observed_error", ev.observed_error}};
        out << j.dump() << "\n";
    }
}

std::vector<DiscoveryEvent> read_history_jsonl(const std::string& path) {
    auto in = open_in(path);
    std::vector<DiscoveryEvent> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            DiscoveryEvent ev;
            ev.event = j.at("event").get<std::string>();
            ev.traj_id = j.at("traj_id").get<std::string>();
            ev.multiplicity = j.at("multiplicity").get<Index>();
            ev.epsilon = j.at("epsilon").get<double>();
            ev.observed_error = j.at("observed_error").get<double>();
            out.push_back(std::move(ev));
        } catch (const json::exception& e) {
            throw ValidationError("history JSONL '" + path + "': " + e.what());
        }
    }
    return out;
}

}  // namespace koopman
