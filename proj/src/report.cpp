#include "advgeo/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "advgeo/adversarial_map.hpp"
#include "advgeo/centroid.hpp"
#include "advgeo/dataset_io.hpp"
#include "advgeo/knn_hopping.hpp"
#include "advgeo/simd/kernels.hpp"
#include "advgeo/susceptibility.hpp"
#include "advgeo/synth.hpp"
#include "advgeo/transition.hpp"
#include "text.hpp"

#ifndef ADVGEO_VERSION
#define ADVGEO_VERSION "0.0.0"
#endif

namespace advgeo {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

const Measure kAllMeasures[] = {Measure::tsne, Measure::euclidean, Measure::euclidean_cosine,
                                Measure::hopping};

[[noreturn]] void bad_setting(std::string_view key, std::string_view value) {
    throw Error(ErrorKind::invalid_argument,
                "invalid value '" + std::string(value) + "' for '" + std::string(key) + "'");
}

double setting_double(std::string_view key, std::string_view value) {
    auto v = text::parse_double(value);
    if (!v || !std::isfinite(*v)) bad_setting(key, value);
    return *v;
}

std::size_t setting_size(std::string_view key, std::string_view value) {
    auto v = text::parse_uint<std::size_t>(value);
    if (!v) bad_setting(key, value);
    return *v;
}

bool setting_bool(std::string_view key, std::string_view value) {
    value = text::trim(value);
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    bad_setting(key, value);
}

std::optional<double> setting_optional_double(std::string_view key, std::string_view value) {
    value = text::trim(value);
    if (value.empty() || value == "none") return std::nullopt;
    return setting_double(key, value);
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += text::format_double(v[i]);
    }
    return out;
}

std::string optional_text(const std::optional<double>& v) {
    return v ? text::format_double(*v) : "none";
}

std::string epsilon_text(const std::optional<double>& eps) {
    return eps ? text::format_double(*eps) : "all";
}

class OutputDir {
public:
    explicit OutputDir(const std::string& root) : root_(root) {
        std::error_code ec;
        fs::create_directories(root_, ec);
        if (ec) throw Error(ErrorKind::io, "cannot create output directory '" + root + "'");
    }

    std::string path(const std::string& name) const { return (root_ / name).string(); }

    void write(const std::string& name, const std::string& content) {
        auto file = text::open_output(path(name));
        file << content;
        if (!file) throw Error(ErrorKind::io, "failed writing '" + path(name) + "'");
        files_.push_back(name);
    }

    void record(const std::string& name) { files_.push_back(name); }
    const std::vector<std::string>& files() const { return files_; }

private:
    fs::path root_;
    std::vector<std::string> files_;
};

class Timings {
public:
    template <typename F>
    auto run(const std::string& name, F&& f) {
        const auto start = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            stop(name, start);
        } else {
            auto result = f();
            stop(name, start);
            return result;
        }
    }
    const json& values() const { return values_; }

private:
    void stop(const std::string& name, std::chrono::steady_clock::time_point start) {
        values_[name] = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    }
    json values_ = json::object();
};

struct Geometry {
    LabeledDataset dataset;
    std::optional<LabeledDataset> sampled;  // k-NN / t-SNE input when a cap is set
    std::map<Measure, DistanceMatrix> matrices;
    std::optional<KnnGraph> graph;
    std::optional<Embedding2D> embedding;
    std::vector<double> affinity;

    const LabeledDataset& graph_input() const { return sampled ? *sampled : dataset; }
};

void apply_simd(const RunConfig& config) {
    if (config.simd == "auto") {
        simd::set_active_isa(simd::best_available_isa());
    } else {
        try {
            simd::set_active_isa(simd::isa_from_string(config.simd));
        } catch (const std::invalid_argument& e) {
            throw Error(ErrorKind::invalid_argument, e.what());
        }
    }
}

LabeledDataset load_config_dataset(const RunConfig& config) {
    return load_dataset(config.dataset, format_from_path(config.dataset));
}

Geometry compute_geometry(const RunConfig& config, LabeledDataset dataset, Timings& timings) {
    Geometry g{std::move(dataset), std::nullopt, {}, std::nullopt, std::nullopt, {}};
    if (config.subsample && (config.has(Measure::hopping) || config.has(Measure::tsne))) {
        g.sampled = stratified_subsample(g.dataset, *config.subsample, config.seed);
    }
    if (config.has(Measure::euclidean) || config.has(Measure::euclidean_cosine)) {
        const auto centroids = timings.run("centroids", [&] { return class_centroids(g.dataset); });
        if (config.has(Measure::euclidean)) {
            g.matrices.emplace(Measure::euclidean, euclidean_distance_matrix(centroids));
        }
        if (config.has(Measure::euclidean_cosine)) {
            g.matrices.emplace(Measure::euclidean_cosine, cosine_scaled_distance_matrix(centroids));
        }
    }
    if (config.has(Measure::hopping)) {
        g.graph = timings.run("knn_graph", [&] { return build_knn_graph(g.graph_input(), config.knn_k); });
        g.matrices.emplace(Measure::hopping,
                           timings.run("hopping", [&] { return hopping_distance_matrix(*g.graph); }));
        if (g.dataset.n_classes() >= 2) {
            g.affinity = nearest_class_affinity(g.graph_input(), *g.graph);
        }
    }
    if (config.has(Measure::tsne)) {
        if (!config.embedding.empty()) {
            g.embedding = load_embedding(config.embedding);
            check_embedding_matches(*g.embedding, g.graph_input());
        } else {
            g.embedding = timings.run("tsne", [&] { return tsne_embed(g.graph_input(), config.tsne_params()); });
        }
        g.matrices.emplace(Measure::tsne, tsne_distance_matrix(*g.embedding));
    }
    return g;
}

void write_geometry(OutputDir& out, const Geometry& g) {
    for (const auto& [measure, matrix] : g.matrices) {
        out.write("distance_" + std::string(to_string(measure)) + ".csv",
                  matrix_to_csv(matrix.values(), matrix.size()));
        if (measure == Measure::euclidean_cosine) {
            out.write("distance_euclidean_cosine_signed.csv",
                      matrix_to_csv(matrix.metadata().signed_values, matrix.size()));
        }
        if (measure == Measure::hopping) {
            const auto& counts = matrix.metadata().unreachable_sources;
            std::vector<double> as_double(counts.begin(), counts.end());
            out.write("hopping_unreachable_sources.csv", matrix_to_csv(as_double, matrix.size()));
        }
    }
    if (!g.affinity.empty()) {
        out.write("nearest_class_affinity.csv", matrix_to_csv(g.affinity, g.dataset.n_classes()));
    }
    if (g.embedding) {
        save_embedding(*g.embedding, out.path("embedding.csv"));
        out.record("embedding.csv");
        std::string trace = "iteration,kl\n";
        for (std::size_t i = 0; i < g.embedding->kl_trace.size(); ++i) {
            trace += std::to_string(i) + "," + text::format_double(g.embedding->kl_trace[i]) + "\n";
        }
        out.write("kl_trace.csv", trace);
    }
}

std::map<Measure, ForbiddenDistance> thresholds(const RunConfig& config, const Geometry& g) {
    std::map<Measure, ForbiddenDistance> out;
    for (const auto& [measure, matrix] : g.matrices) {
        if (config.fd) {
            out[measure] = {*config.fd, measure, ForbiddenDistance::Derivation::user_supplied};
        } else if (measure == Measure::hopping) {
            out[measure] = forbidden_distance(matrix);
        } else {
            out[measure] = average_offdiagonal_distance(matrix);
        }
    }
    return out;
}

std::map<Measure, AdversarialMap> build_maps(const Geometry& g,
                                             const std::map<Measure, ForbiddenDistance>& fds) {
    std::map<Measure, AdversarialMap> maps;
    for (const auto& [measure, matrix] : g.matrices) {
        maps.emplace(measure, create_map(matrix, fds.at(measure)));
    }
    return maps;
}

json map_to_json(const AdversarialMap& map, const std::optional<ConsistencyReport>& consistency) {
    json j;
    j["measure"] = std::string(to_string(map.measure()));
    j["n_classes"] = map.n_classes();
    j["directed"] = map.directed();
    j["forbidden_distance"] = {{"value", map.forbidden_distance().value},
                               {"derivation", std::string(to_string(map.forbidden_distance().derivation))}};
    json adjacency = json::object();
    for (std::size_t s = 0; s < map.n_classes(); ++s) adjacency[std::to_string(s)] = json::array();
    for (const auto& e : map.edges()) {
        adjacency[std::to_string(e.source)].push_back({{"target", e.target}, {"weight", e.weight}});
    }
    j["adjacency"] = adjacency;
    if (consistency) {
        json c;
        c["misclassified"] = consistency->misclassified;
        c["on_map"] = consistency->on_map;
        c["overall"] = consistency->overall ? json(*consistency->overall) : json(nullptr);
        c["baseline"] = consistency->baseline;
        json per = json::array();
        for (const auto& v : consistency->per_class) per.push_back(v ? json(*v) : json(nullptr));
        c["per_class"] = per;
        j["consistency"] = c;
    }
    return j;
}

void write_maps(OutputDir& out, const std::map<Measure, AdversarialMap>& maps,
                const std::optional<AttackLog>& log) {
    json fd = json::object();
    for (const auto& [measure, map] : maps) {
        const std::string name(to_string(measure));
        std::string csv = "source,target,weight\n";
        for (const auto& e : map.edges()) {
            csv += std::to_string(e.source) + "," + std::to_string(e.target) + "," +
                   text::format_double(e.weight) + "\n";
        }
        out.write("map_" + name + ".csv", csv);
        std::optional<ConsistencyReport> consistency;
        if (log) consistency = neighbor_consistency(map, *log);
        out.write("map_" + name + ".json", map_to_json(map, consistency).dump(2) + "\n");
        fd[name] = {{"value", map.forbidden_distance().value},
                    {"derivation", std::string(to_string(map.forbidden_distance().derivation))}};
    }
    out.write("forbidden_distance.json", fd.dump(2) + "\n");
}

std::vector<TransitionModel> transitions_for(const RunConfig& config, const Geometry& g,
                                             const std::map<Measure, AdversarialMap>* maps) {
    std::vector<TransitionModel> out;
    out.push_back(uniform_transition(g.dataset.n_classes()));
    WeightingOptions opts;
    opts.distance_floor = config.distance_floor;
    for (Measure m : kAllMeasures) {
        auto it = g.matrices.find(m);
        if (it == g.matrices.end()) continue;
        const AdversarialMap* map = nullptr;
        if (config.restrict_to_map && maps) map = &maps->at(m);
        out.push_back(weighted_transition(it->second, map, opts));
    }
    return out;
}

std::string entropy_csv(const std::vector<EntropyEntry>& rows) {
    std::string csv = "measure,epsilon,records,misclassified,e_m,mean_nll,surprise_events\n";
    for (const auto& e : rows) {
        csv += e.label + "," + epsilon_text(e.epsilon) + "," + std::to_string(e.records) + "," +
               std::to_string(e.misclassified) + "," + text::format_double(e.e_m) + "," +
               text::format_double(e.mean_nll) + "," + std::to_string(e.surprise_events) + "\n";
    }
    return csv;
}

json ranking_to_json(const SusceptibilityRanking& r, const TransitionModel& t) {
    json j;
    j["measure"] = t.provenance().label();
    j["k"] = r.k;
    json global = json::array();
    for (const auto& rc : r.global) global.push_back({{"class", rc.label}, {"probability", rc.probability}});
    j["global"] = global;
    json per = json::object();
    for (std::size_t i = 0; i < r.per_class.size(); ++i) {
        json row = json::array();
        for (const auto& rc : r.per_class[i]) row.push_back({{"class", rc.label}, {"probability", rc.probability}});
        per[std::to_string(i)] = row;
    }
    j["per_class"] = per;
    json fallback = json::array();
    for (std::size_t row : t.provenance().fallback_rows) fallback.push_back(row);
    j["uniform_fallback_rows"] = fallback;
    j["map_restricted"] = t.provenance().map_restricted;
    return j;
}

std::string accuracy_csv(const AccuracyReport& report) {
    std::string csv = "epsilon,k,hits,misclassified,accuracy,baseline\n";
    for (const auto& row : report.rows) {
        csv += epsilon_text(row.epsilon) + "," + std::to_string(row.k) + "," +
               std::to_string(row.hits) + "," + std::to_string(row.misclassified) + "," +
               text::format_double(row.accuracy) + "," + text::format_double(row.baseline) + "\n";
    }
    return csv;
}

std::string iso_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(OutputDir& out, Command command, const RunConfig& config,
                    const Timings& timings, const json& extra = json::object()) {
    json m;
    m["tool"] = "advgeo";
    m["version"] = ADVGEO_VERSION;
    m["command"] = std::string(to_string(command));
    m["config_text"] = config_to_text(config);
    m["simd"] = std::string(to_string(simd::active_isa()));
    m["seed"] = config.seed;
    m["files"] = out.files();
    m["timings_ms"] = timings.values();
    m["created_at"] = iso_timestamp();
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    auto file = text::open_output(out.path("manifest.json"));
    file << m.dump(2) << "\n";
}

CommandResult finish(OutputDir& out, Command command, const RunConfig& config,
                     const Timings& timings, json summary) {
    write_manifest(out, command, config, timings);
    summary["out"] = config.out;
    summary["files"] = out.files();
    return {summary.dump(2), out.files()};
}

std::optional<AttackLog> load_optional_log(const RunConfig& config, std::size_t n_classes) {
    if (config.log.empty()) return std::nullopt;
    return load_attack_log(config.log, n_classes);
}

}  // namespace

std::string_view to_string(Command c) {
    switch (c) {
        case Command::validate: return "validate";
        case Command::synth: return "synth";
        case Command::distances: return "distances";
        case Command::map: return "map";
        case Command::entropy: return "entropy";
        case Command::susceptible: return "susceptible";
        case Command::report: return "report";
    }
    return "unknown";
}

Command command_from_string(std::string_view name) {
    for (Command c : {Command::validate, Command::synth, Command::distances, Command::map,
                      Command::entropy, Command::susceptible, Command::report}) {
        if (name == to_string(c)) return c;
    }
    throw Error(ErrorKind::invalid_argument, "unknown command '" + std::string(name) + "'");
}

void RunConfig::set(std::string_view key_in, std::string_view value_in) {
    std::string key(text::trim(key_in));
    std::replace(key.begin(), key.end(), '-', '_');
    const std::string_view value = text::trim(value_in);

    if (key == "dataset") {
        dataset = value;
    } else if (key == "log") {
        log = value;
    } else if (key == "embedding") {
        embedding = value;
    } else if (key == "measures") {
        measures.clear();
        for (auto part : text::split(value)) {
            const Measure m = measure_from_string(text::trim(part));
            if (std::find(measures.begin(), measures.end(), m) == measures.end()) measures.push_back(m);
        }
        std::sort(measures.begin(), measures.end());
    } else if (key == "knn_k") {
        knn_k = setting_size(key, value);
    } else if (key == "fd") {
        fd = setting_optional_double(key, value);
    } else if (key == "k") {
        k_values.clear();
        for (auto part : text::split(value)) k_values.push_back(setting_size(key, part));
    } else if (key == "perplexity") {
        perplexity = setting_double(key, value);
    } else if (key == "tsne_iters") {
        tsne_iters = setting_size(key, value);
    } else if (key == "learning_rate") {
        learning_rate = setting_double(key, value);
    } else if (key == "subsample") {
        if (value.empty() || value == "none") {
            subsample.reset();
        } else {
            subsample = setting_size(key, value);
        }
    } else if (key == "seed") {
        auto v = text::parse_uint<std::uint64_t>(value);
        if (!v) bad_setting(key, value);
        seed = *v;
    } else if (key == "out") {
        out = value;
    } else if (key == "restrict_to_map") {
        restrict_to_map = setting_bool(key, value);
    } else if (key == "distance_floor") {
        distance_floor = setting_optional_double(key, value);
    } else if (key == "epsilons") {
        epsilons.clear();
        if (!value.empty() && value != "default") {
            for (auto part : text::split(value)) epsilons.push_back(setting_double(key, part));
        }
    } else if (key == "synth_classes") {
        synth_classes = setting_size(key, value);
    } else if (key == "synth_per_class") {
        synth_per_class = setting_size(key, value);
    } else if (key == "synth_dims") {
        synth_dims = setting_size(key, value);
    } else if (key == "synth_spread") {
        synth_spread = setting_double(key, value);
    } else if (key == "synth_gap") {
        synth_gap = setting_double(key, value);
    } else if (key == "simd") {
        if (value != "auto") {
            try {
                simd::isa_from_string(value);
            } catch (const std::invalid_argument&) {
                bad_setting(key, value);
            }
        }
        simd = value;
    } else {
        throw Error(ErrorKind::invalid_argument, "unknown setting '" + key + "'");
    }
}

bool RunConfig::has(Measure m) const {
    return std::find(measures.begin(), measures.end(), m) != measures.end();
}

TsneParams RunConfig::tsne_params() const {
    TsneParams p;
    p.perplexity = perplexity;
    p.max_iters = tsne_iters;
    p.learning_rate = learning_rate;
    p.seed = seed;
    return p;
}

std::vector<double> RunConfig::epsilon_grid() const {
    if (!epsilons.empty()) return epsilons;
    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i) grid.push_back(i / 10.0);
    return grid;
}

RunConfig parse_config_text(std::string_view content) {
    RunConfig config;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= content.size()) {
        std::size_t end = content.find('\n', start);
        if (end == std::string_view::npos) end = content.size();
        std::string_view line = text::trim(content.substr(start, end - start));
        ++line_no;
        start = end + 1;
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorKind::parse, "config line " + std::to_string(line_no) + ": expected key = value");
        }
        config.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return config;
}

RunConfig load_config_file(const std::string& path) {
    auto in = text::open_input(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_config_text(buffer.str());
    } catch (const Error& e) {
        throw Error(e.kind(), path + ": " + e.what());
    }
}

std::string config_to_text(const RunConfig& c) {
    std::string measures;
    for (std::size_t i = 0; i < c.measures.size(); ++i) {
        if (i) measures += ',';
        measures += to_string(c.measures[i]);
    }
    std::string ks;
    for (std::size_t i = 0; i < c.k_values.size(); ++i) {
        if (i) ks += ',';
        ks += std::to_string(c.k_values[i]);
    }
    std::string out;
    auto line = [&](const char* key, const std::string& value) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    };
    line("dataset", c.dataset);
    line("log", c.log);
    line("embedding", c.embedding);
    line("measures", measures);
    line("knn_k", std::to_string(c.knn_k));
    line("fd", optional_text(c.fd));
    line("k", ks);
    line("perplexity", text::format_double(c.perplexity));
    line("tsne_iters", std::to_string(c.tsne_iters));
    line("learning_rate", text::format_double(c.learning_rate));
    line("subsample", c.subsample ? std::to_string(*c.subsample) : "none");
    line("seed", std::to_string(c.seed));
    line("out", c.out);
    line("restrict_to_map", c.restrict_to_map ? "true" : "false");
    line("distance_floor", optional_text(c.distance_floor));
    line("epsilons", c.epsilons.empty() ? "default" : join_doubles(c.epsilons));
    line("synth_classes", std::to_string(c.synth_classes));
    line("synth_per_class", std::to_string(c.synth_per_class));
    line("synth_dims", std::to_string(c.synth_dims));
    line("synth_spread", text::format_double(c.synth_spread));
    line("synth_gap", text::format_double(c.synth_gap));
    line("simd", c.simd);
    return out;
}

std::string matrix_to_csv(std::span<const double> values, std::size_t n) {
    std::string csv = "class";
    for (std::size_t j = 0; j < n; ++j) csv += "," + std::to_string(j);
    csv += '\n';
    for (std::size_t i = 0; i < n; ++i) {
        csv += std::to_string(i);
        for (std::size_t j = 0; j < n; ++j) csv += "," + text::format_double(values[i * n + j]);
        csv += '\n';
    }
    return csv;
}

void check_config(const RunConfig& config, Command command) {
    auto require_file = [](const std::string& what, const std::string& path) {
        if (path.empty()) throw Error(ErrorKind::invalid_argument, what + " path is required");
        if (!fs::exists(path)) throw Error(ErrorKind::invalid_argument, what + " '" + path + "' does not exist");
    };
    if (config.measures.empty()) {
        throw Error(ErrorKind::invalid_argument, "at least one measure must be selected");
    }
    if (command == Command::synth) {
        if (config.synth_classes < 2) throw Error(ErrorKind::invalid_argument, "synth_classes must be >= 2");
        return;
    }
    if (command == Command::validate) {
        if (config.dataset.empty() && config.log.empty()) {
            throw Error(ErrorKind::invalid_argument, "validate needs --dataset and/or --log");
        }
        if (!config.dataset.empty()) require_file("dataset", config.dataset);
        if (!config.log.empty()) require_file("log", config.log);
        if (!config.embedding.empty()) require_file("embedding", config.embedding);
        return;
    }
    require_file("dataset", config.dataset);
    if (command == Command::entropy) require_file("log", config.log);
    if (!config.log.empty()) require_file("log", config.log);
    if (!config.embedding.empty()) require_file("embedding", config.embedding);
    if (config.k_values.empty()) throw Error(ErrorKind::invalid_argument, "k list is empty");
}

CommandResult cmd_validate(const RunConfig& config) {
    check_config(config, Command::validate);
    json summary;
    summary["valid"] = true;
    std::optional<std::size_t> n_classes;
    if (!config.dataset.empty()) {
        const auto ds = load_config_dataset(config);
        n_classes = ds.n_classes();
        json counts = json::array();
        for (std::size_t c = 0; c < ds.n_classes(); ++c) {
            counts.push_back(ds.class_members(static_cast<ClassId>(c)).size());
        }
        summary["dataset"] = {{"path", config.dataset},
                              {"points", ds.size()},
                              {"n_dims", ds.n_dims()},
                              {"n_classes", ds.n_classes()},
                              {"class_counts", counts}};
        if (!config.embedding.empty()) {
            check_embedding_matches(load_embedding(config.embedding), ds);
            summary["embedding"] = {{"path", config.embedding}, {"matches_dataset", true}};
        }
    }
    if (!config.log.empty()) {
        const auto log = load_attack_log(config.log, n_classes);
        summary["log"] = {{"path", config.log},
                          {"records", log.size()},
                          {"misclassified", log.misclassified_count()},
                          {"epsilons", log.epsilons().size()},
                          {"n_classes", log.n_classes()}};
    }
    return {summary.dump(2), {}};
}

CommandResult cmd_synth(const RunConfig& config) {
    check_config(config, Command::synth);
    Timings timings;
    OutputDir out(config.out);

    BlobSpec spec;
    spec.per_class = config.synth_per_class;
    spec.n_dims = config.synth_dims;
    spec.centers = centers_on_line(std::vector<double>(config.synth_classes - 1, config.synth_gap),
                                   config.synth_dims);
    spec.spread = config.synth_spread;
    spec.seed = config.seed;
    const auto dataset = timings.run("blobs", [&] { return generate_blobs(spec); });

    // Flips follow P ∝ 1/hops on the generated geometry, with a success rate
    // rising linearly to 1 at the largest epsilon.
    const auto graph = build_knn_graph(dataset, config.knn_k);
    const auto hops = hopping_distance_matrix(graph);
    WeightingOptions opts;
    opts.distance_floor = config.distance_floor;
    const auto transition = weighted_transition(hops, nullptr, opts);
    AttackSimulation sim;
    sim.epsilons = config.epsilon_grid();
    const double eps_max = *std::max_element(sim.epsilons.begin(), sim.epsilons.end());
    for (double e : sim.epsilons) sim.success_probability.push_back(eps_max > 0 ? std::min(1.0, e / eps_max) : 0.0);
    sim.seed = mix_seed(config.seed, 1);
    const auto log = timings.run("simulate", [&] { return simulate_attack(dataset, transition, sim); });

    save_dataset(dataset, out.path("dataset.csv"), DatasetFormat::csv);
    out.record("dataset.csv");
    save_dataset(dataset, out.path("dataset.bin"), DatasetFormat::binary);
    out.record("dataset.bin");
    save_attack_log(log, out.path("attack_log.csv"));
    out.record("attack_log.csv");

    json summary;
    summary["points"] = dataset.size();
    summary["n_classes"] = dataset.n_classes();
    summary["records"] = log.size();
    summary["misclassified"] = log.misclassified_count();
    return finish(out, Command::synth, config, timings, summary);
}

CommandResult cmd_distances(const RunConfig& config) {
    check_config(config, Command::distances);
    Timings timings;
    auto g = compute_geometry(config, load_config_dataset(config), timings);
    OutputDir out(config.out);
    write_geometry(out, g);
    json summary;
    summary["measures"] = json::array();
    for (const auto& [m, _] : g.matrices) summary["measures"].push_back(std::string(to_string(m)));
    return finish(out, Command::distances, config, timings, summary);
}

CommandResult cmd_map(const RunConfig& config) {
    check_config(config, Command::map);
    Timings timings;
    auto g = compute_geometry(config, load_config_dataset(config), timings);
    const auto log = load_optional_log(config, g.dataset.n_classes());
    OutputDir out(config.out);
    write_geometry(out, g);
    const auto maps = build_maps(g, thresholds(config, g));
    write_maps(out, maps, log);
    json summary;
    for (const auto& [m, map] : maps) {
        summary["edges"][std::string(to_string(m))] = map.edges().size();
    }
    return finish(out, Command::map, config, timings, summary);
}

CommandResult cmd_entropy(const RunConfig& config) {
    check_config(config, Command::entropy);
    Timings timings;
    auto g = compute_geometry(config, load_config_dataset(config), timings);
    const auto log = load_attack_log(config.log, g.dataset.n_classes());
    OutputDir out(config.out);
    std::optional<std::map<Measure, AdversarialMap>> maps;
    if (config.restrict_to_map) maps = build_maps(g, thresholds(config, g));
    const auto transitions = transitions_for(config, g, maps ? &*maps : nullptr);
    const auto rows = entropy_sweep(log, transitions);
    out.write("entropy_sweep.csv", entropy_csv(rows));
    json summary;
    summary["rows"] = rows.size();
    return finish(out, Command::entropy, config, timings, summary);
}

namespace {

// The default k list is trimmed to what the class count allows; an explicit list is used as given.
std::vector<std::size_t> k_values_for(const RunConfig& config, std::size_t n_classes) {
    if (config.k_values != RunConfig{}.k_values) return config.k_values;
    std::vector<std::size_t> ks;
    for (auto k : config.k_values)
        if (k + 1 <= n_classes) ks.push_back(k);
    return ks;
}

}  // namespace

CommandResult cmd_susceptible(const RunConfig& config) {
    check_config(config, Command::susceptible);
    Timings timings;
    auto g = compute_geometry(config, load_config_dataset(config), timings);
    const auto log = load_optional_log(config, g.dataset.n_classes());
    OutputDir out(config.out);
    std::optional<std::map<Measure, AdversarialMap>> maps;
    if (config.restrict_to_map) maps = build_maps(g, thresholds(config, g));
    const auto transitions = transitions_for(config, g, maps ? &*maps : nullptr);
    json summary;
    for (const auto& t : transitions) {
        const std::string label = t.provenance().label();
        if (label == "uniform") continue;
        const auto ranking = rank_susceptibility(t);
        out.write("ranking_" + label + ".json", ranking_to_json(ranking, t).dump(2) + "\n");
        if (log && log->misclassified_count() > 0) {
            const auto acc = evaluate_accuracy(*log, ranking, k_values_for(config, t.n_classes()), true);
            out.write("accuracy_" + label + ".csv", accuracy_csv(acc));
            for (const auto& row : acc.rows) {
                if (!row.epsilon) summary["pooled_accuracy"][label][std::to_string(row.k)] = row.accuracy;
            }
        }
    }
    return finish(out, Command::susceptible, config, timings, summary);
}

CommandResult cmd_report(const RunConfig& config) {
    check_config(config, Command::report);
    Timings timings;
    auto g = compute_geometry(config, load_config_dataset(config), timings);
    const auto log = load_optional_log(config, g.dataset.n_classes());
    OutputDir out(config.out);
    write_geometry(out, g);
    const auto fds = thresholds(config, g);
    const auto maps = build_maps(g, fds);
    write_maps(out, maps, log);
    const auto transitions = transitions_for(config, g, config.restrict_to_map ? &maps : nullptr);

    json summary;
    for (const auto& t : transitions) {
        const std::string label = t.provenance().label();
        if (label == "uniform") continue;
        const auto ranking = rank_susceptibility(t);
        out.write("ranking_" + label + ".json", ranking_to_json(ranking, t).dump(2) + "\n");
        if (log && log->misclassified_count() > 0) {
            out.write("accuracy_" + label + ".csv",
                      accuracy_csv(evaluate_accuracy(*log, ranking, k_values_for(config, t.n_classes()), true)));
        }
    }
    if (log) {
        const auto rows = timings.run("entropy", [&] { return entropy_sweep(*log, transitions); });
        out.write("entropy_sweep.csv", entropy_csv(rows));
        summary["entropy_rows"] = rows.size();
        if (auto it = g.matrices.find(Measure::hopping); it != g.matrices.end() && !log->empty()) {
            std::string csv = "epsilon,records,misclassified,displacement,mean_over_flips,unreachable,forbidden_distance\n";
            const double fd = fds.at(Measure::hopping).value;
            for (double eps : log->epsilons()) {
                const auto d = average_displacement(*log, it->second, eps);
                csv += text::format_double(eps) + "," + std::to_string(d.records) + "," +
                       std::to_string(d.misclassified) + "," + text::format_double(d.value) + "," +
                       text::format_double(d.mean_over_flips) + "," + std::to_string(d.unreachable) +
                       "," + text::format_double(fd) + "\n";
            }
            out.write("displacement.csv", csv);
        }
    }
    if (g.embedding && !g.embedding->kl_trace.empty()) {
        summary["final_kl"] = g.embedding->kl_trace.back();
    }
    summary["measures"] = json::array();
    for (const auto& [m, _] : g.matrices) summary["measures"].push_back(std::string(to_string(m)));
    return finish(out, Command::report, config, timings, summary);
}

CommandResult run_command(Command command, const RunConfig& config) {
    apply_simd(config);
    switch (command) {
        case Command::validate: return cmd_validate(config);
        case Command::synth: return cmd_synth(config);
        case Command::distances: return cmd_distances(config);
        case Command::map: return cmd_map(config);
        case Command::entropy: return cmd_entropy(config);
        case Command::susceptible: return cmd_susceptible(config);
        case Command::report: return cmd_report(config);
    }
    throw Error(ErrorKind::invalid_argument, "unknown command");
}

}  // namespace advgeo
