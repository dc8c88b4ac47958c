#pragma once

// Run configuration and the command implementations behind the CLI. Each
// command is a deterministic function of (inputs, config) and writes only
// under config.out; wall-clock data goes to manifest.json alone.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advgeo/tsne.hpp"
#include "advgeo/types.hpp"

namespace advgeo {

enum class Command { validate, synth, distances, map, entropy, susceptible, report };

std::string_view to_string(Command c);
Command command_from_string(std::string_view name);

// Flat "key = value" settings. Keys (and the matching CLI flags, with '_'
// spelled '-'): dataset, log, embedding, measures, knn_k, fd, k, perplexity,
// tsne_iters, learning_rate, subsample, seed, out, restrict_to_map,
// distance_floor, epsilons, synth_classes, synth_per_class, synth_dims,
// synth_spread, synth_gap, simd.
struct RunConfig {
    std::string dataset;
    std::string log;
    std::string embedding;
    std::vector<Measure> measures{Measure::tsne, Measure::euclidean, Measure::euclidean_cosine,
                                  Measure::hopping};
    std::size_t knn_k = 6;
    std::optional<double> fd;
    std::vector<std::size_t> k_values{1, 2, 3, 4};
    double perplexity = 30.0;
    std::size_t tsne_iters = 1000;
    double learning_rate = 200.0;
    std::optional<std::size_t> subsample;
    std::uint64_t seed = 0;
    std::string out = "advgeo_out";
    bool restrict_to_map = false;
    std::optional<double> distance_floor;

    // synth
    std::vector<double> epsilons;  // empty: 20 values 0.1, 0.2, ..., 2.0
    std::size_t synth_classes = 10;
    std::size_t synth_per_class = 100;
    std::size_t synth_dims = 8;
    double synth_spread = 0.5;
    double synth_gap = 2.0;

    std::string simd = "auto";

    // Throws Error(invalid_argument) for an unknown key or a bad value.
    void set(std::string_view key, std::string_view value);

    bool has(Measure m) const;
    TsneParams tsne_params() const;
    std::vector<double> epsilon_grid() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig parse_config_text(std::string_view text);
RunConfig load_config_file(const std::string& path);
// Every key, one per line; parse_config_text(config_to_text(c)) == c.
std::string config_to_text(const RunConfig& config);

struct CommandResult {
    std::string summary_json;         // printed by the CLI on success
    std::vector<std::string> files;   // written, relative to config.out
};

// Checks the config invariants relevant to `command` (a measure selected,
// required paths present and existing). Throws Error(invalid_argument).
void check_config(const RunConfig& config, Command command);

CommandResult run_command(Command command, const RunConfig& config);

CommandResult cmd_validate(const RunConfig& config);
CommandResult cmd_synth(const RunConfig& config);
CommandResult cmd_distances(const RunConfig& config);
CommandResult cmd_map(const RunConfig& config);
CommandResult cmd_entropy(const RunConfig& config);
CommandResult cmd_susceptible(const RunConfig& config);
CommandResult cmd_report(const RunConfig& config);

// n x n matrix as CSV with a header row and column of class indices.
std::string matrix_to_csv(std::span<const double> values, std::size_t n);

}  // namespace advgeo
