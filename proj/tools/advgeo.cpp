// advgeo command line: validate, synth, distances, map, entropy, susceptible, report.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "advgeo/report.hpp"

namespace {

struct Flag {
    const char* name;
    const char* key;
    const char* help;
};

const Flag kValueFlags[] = {
    {"--dataset", "dataset", "labelled dataset (.csv or .bin)"},
    {"--log", "log", "attack log CSV"},
    {"--embedding", "embedding", "precomputed 2-D embedding CSV (skips t-SNE)"},
    {"--measures", "measures", "comma list of tsne,euclidean,euclidean_cosine,hopping"},
    {"--knn-k", "knn_k", "neighbours per point in the k-NN graph"},
    {"--fd", "fd", "forbidden distance override (all measures)"},
    {"--k", "k", "comma list of top-k sizes for accuracy"},
    {"--perplexity", "perplexity", "t-SNE perplexity"},
    {"--tsne-iters", "tsne_iters", "t-SNE iterations"},
    {"--learning-rate", "learning_rate", "t-SNE learning rate"},
    {"--subsample", "subsample", "per-class cap for k-NN and t-SNE"},
    {"--seed", "seed", "random seed"},
    {"--out", "out", "output directory"},
    {"--distance-floor", "distance_floor", "floor for zero distances in 1/d weighting"},
    {"--epsilons", "epsilons", "comma list of epsilons (synth)"},
    {"--synth-classes", "synth_classes", "number of classes (synth)"},
    {"--synth-per-class", "synth_per_class", "points per class (synth)"},
    {"--synth-dims", "synth_dims", "feature dimension (synth)"},
    {"--synth-spread", "synth_spread", "blob standard deviation (synth)"},
    {"--synth-gap", "synth_gap", "distance between neighbouring centres (synth)"},
    {"--simd", "simd", "auto, scalar or avx2"},
};

int fail(const std::string& kind, const std::string& message, int code) {
    nlohmann::json j;
    j["error"] = {{"kind", kind}, {"message", message}};
    std::cerr << j.dump() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Class-geometry analysis of adversarial attack logs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(ADVGEO_VERSION));

    std::string config_path;
    std::map<std::string, std::string> values;
    bool restrict_to_map = false;

    const char* names[] = {"validate", "synth", "distances", "map", "entropy", "susceptible", "report"};
    std::map<CLI::App*, advgeo::Command> commands;
    for (const char* name : names) {
        auto* sub = app.add_subcommand(name);
        commands[sub] = advgeo::command_from_string(name);
        sub->add_option("--config", config_path, "key = value config file");
        for (const auto& f : kValueFlags) sub->add_option(f.name, values[f.key], f.help);
        sub->add_flag("--restrict-to-map", restrict_to_map, "only map edges receive transition mass");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return fail("invalid_argument", e.what(), 2);
    }

    try {
        advgeo::RunConfig config;
        if (!config_path.empty()) config = advgeo::load_config_file(config_path);
        for (const auto& [sub, command] : commands) {
            if (!sub->parsed()) continue;
            for (const auto& f : kValueFlags) {
                if (sub->count(f.name) > 0) config.set(f.key, values[f.key]);
            }
            if (restrict_to_map) config.restrict_to_map = true;
            const auto result = advgeo::run_command(command, config);
            std::cout << result.summary_json << "\n";
        }
    } catch (const advgeo::Error& e) {
        const int code = e.kind() == advgeo::ErrorKind::io ? 3 : 1;
        return fail(std::string(advgeo::to_string(e.kind())), e.what(), code);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 4);
    }
    return 0;
}
