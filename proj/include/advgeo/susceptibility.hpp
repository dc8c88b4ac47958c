#pragma once

// Top-k susceptible classes: a model-level ranking by cumulative
// misclassification probability and a per-class ranking of likely targets,
// plus the hit-rate evaluation of the per-class prediction sets.

#include <cstddef>
#include <optional>
#include <vector>

#include "advgeo/transition.hpp"
#include "advgeo/types.hpp"

namespace advgeo {

struct RankedClass {
    ClassId label;
    double probability;

    friend bool operator==(const RankedClass&, const RankedClass&) = default;
};

struct SusceptibilityRanking {
    // Column sums of the transition matrix, descending; ties by class index.
    std::vector<RankedClass> global;
    // per_class[i]: every class j != i ordered by P(j|i) descending.
    std::vector<std::vector<RankedClass>> per_class;
    std::size_t k = 4;
};

SusceptibilityRanking rank_susceptibility(const TransitionModel& transition, std::size_t k = 4);

// The global part only (per_class left empty).
std::vector<RankedClass> rank_global(const TransitionModel& transition);

// The k most likely targets of `actual`. Throws Error(invalid_argument) unless
// 1 <= k <= n - 1 and actual < n.
std::vector<ClassId> predict_targets(const SusceptibilityRanking& ranking, ClassId actual,
                                     std::size_t k);

struct AccuracyRow {
    std::optional<double> epsilon;  // nullopt: pooled over all epsilons
    std::size_t k = 0;
    std::size_t hits = 0;
    std::size_t misclassified = 0;
    double accuracy = 0.0;  // NaN when misclassified == 0
    double baseline = 0.0;  // k / (n - 1)
};

struct AccuracyReport {
    std::vector<AccuracyRow> rows;  // per epsilon (if requested) then pooled, k inner
};

// A misclassified record is a hit when its adversarial class is among
// predict_targets(actual, k). Throws Error(undefined) when the log has no
// misclassified records.
AccuracyReport evaluate_accuracy(const AttackLog& log, const SusceptibilityRanking& ranking,
                                 const std::vector<std::size_t>& k_values, bool group_by_epsilon);

}  // namespace advgeo
