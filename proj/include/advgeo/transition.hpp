#pragma once

// Conditional misclassification probabilities P(c_j | c_i) and the entropy
// of a model under attack.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "advgeo/adversarial_map.hpp"
#include "advgeo/types.hpp"

namespace advgeo {

struct TransitionProvenance {
    enum class Kind { uniform, weighted, custom };
    Kind kind = Kind::uniform;
    std::optional<Measure> measure;  // set for weighted
    bool map_restricted = false;
    // Rows that had no admissible target and fell back to uniform.
    std::vector<std::size_t> fallback_rows;

    // "uniform", "custom", or the measure name.
    std::string label() const;
};

class TransitionModel {
public:
    // Validates: n >= 1, entries finite and >= 0, zero diagonal, each row sums
    // to 1 within 1e-9 or is all zero (no admissible target).
    TransitionModel(std::size_t n, std::vector<double> p, TransitionProvenance provenance);

    std::size_t n_classes() const noexcept { return n_; }
    double operator()(std::size_t actual, std::size_t target) const { return p_[actual * n_ + target]; }
    std::span<const double> row(std::size_t actual) const { return {p_.data() + actual * n_, n_}; }
    std::span<const double> values() const noexcept { return p_; }
    const TransitionProvenance& provenance() const noexcept { return provenance_; }

private:
    std::size_t n_;
    std::vector<double> p_;
    TransitionProvenance provenance_;
};

// Off-diagonal entries 1/(n-1). Requires n >= 2.
TransitionModel uniform_transition(std::size_t n);

struct WeightingOptions {
    // When set, distances are clamped to at least this value before 1/d.
    // Without it a zero distance between distinct admissible classes throws.
    std::optional<double> distance_floor;
};

// P(j|i) ∝ 1/d(i,j) over admissible targets: j != i, d finite and, when a map
// is supplied, (i -> j) is a map edge. Rows without an admissible target fall
// back to uniform and are recorded in the provenance.
TransitionModel weighted_transition(const DistanceMatrix& distances,
                                    const AdversarialMap* map = nullptr,
                                    const WeightingOptions& options = {});

struct EntropyEntry {
    std::string label;              // transition label
    std::optional<double> epsilon;  // nullopt: all records
    std::size_t records = 0;        // records considered (after filtering)
    std::size_t misclassified = 0;  // R
    double e_m = 0.0;               // -(1/R) Σ p ln p
    double mean_nll = 0.0;          // -(1/R') Σ ln p over records with p > 0
    std::size_t surprise_events = 0;  // misclassified records with p == 0
};

// Natural log. Throws Error(undefined) when no misclassified record survives
// the filter.
EntropyEntry model_entropy(const AttackLog& log, const TransitionModel& transition,
                           std::optional<double> epsilon_filter = std::nullopt);

// One entry per (transition, epsilon), transitions outer, epsilon ascending.
// Epsilons without misclassified records yield NaN e_m / mean_nll instead of
// throwing, so the table always has |transitions| x |epsilons| rows.
std::vector<EntropyEntry> entropy_sweep(const AttackLog& log,
                                        const std::vector<TransitionModel>& transitions);

}  // namespace advgeo
