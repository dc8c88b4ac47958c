#include "advgeo/susceptibility.hpp"

#include <algorithm>
#include <limits>

namespace advgeo {
namespace {

void sort_ranked(std::vector<RankedClass>& v) {
    std::stable_sort(v.begin(), v.end(), [](const RankedClass& a, const RankedClass& b) {
        return a.probability != b.probability ? a.probability > b.probability
                                              : a.label < b.label;
    });
}

}  // namespace

std::vector<RankedClass> rank_global(const TransitionModel& transition) {
    const std::size_t n = transition.n_classes();
    std::vector<RankedClass> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (i != j) col += transition(i, j);
        }
        out[j] = {static_cast<ClassId>(j), col};
    }
    sort_ranked(out);
    return out;
}

SusceptibilityRanking rank_susceptibility(const TransitionModel& transition, std::size_t k) {
    const std::size_t n = transition.n_classes();
    SusceptibilityRanking r;
    r.k = k;
    r.global = rank_global(transition);
    r.per_class.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& row = r.per_class[i];
        row.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) row.push_back({static_cast<ClassId>(j), transition(i, j)});
        }
        sort_ranked(row);
    }
    return r;
}

std::vector<ClassId> predict_targets(const SusceptibilityRanking& ranking, ClassId actual,
                                     std::size_t k) {
    const std::size_t n = ranking.per_class.size();
    if (actual >= n) {
        throw Error(ErrorKind::invalid_argument, "unknown class " + std::to_string(actual));
    }
    if (k < 1 || k + 1 > n) {
        throw Error(ErrorKind::invalid_argument,
                    "k = " + std::to_string(k) + " is out of range [1, " + std::to_string(n - 1) + "]");
    }
    std::vector<ClassId> out;
    out.reserve(k);
    for (std::size_t r = 0; r < k; ++r) out.push_back(ranking.per_class[actual][r].label);
    return out;
}

AccuracyReport evaluate_accuracy(const AttackLog& log, const SusceptibilityRanking& ranking,
                                 const std::vector<std::size_t>& k_values, bool group_by_epsilon) {
    const std::size_t n = ranking.per_class.size();
    if (log.n_classes() != n) {
        throw Error(ErrorKind::invalid_argument, "log and ranking disagree on class count");
    }
    if (log.misclassified_count() == 0) {
        throw Error(ErrorKind::undefined, "accuracy is undefined: no misclassified records");
    }
    // rank_of[i * n + j]: position of j in class i's ordering; a record is a
    // hit for every k > rank.
    std::vector<std::size_t> rank_of(n * n, std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < ranking.per_class[i].size(); ++r) {
            rank_of[i * n + ranking.per_class[i][r].label] = r;
        }
    }
    for (std::size_t k : k_values) {
        if (k < 1 || k + 1 > n) {
            throw Error(ErrorKind::invalid_argument, "k = " + std::to_string(k) + " is out of range");
        }
    }

    auto tally = [&](std::optional<double> eps, AccuracyReport& report) {
        for (std::size_t k : k_values) {
            AccuracyRow row;
            row.epsilon = eps;
            row.k = k;
            row.baseline = static_cast<double>(k) / static_cast<double>(n - 1);
            for (const auto& rec : log.records()) {
                if (eps && rec.epsilon != *eps) continue;
                if (!rec.misclassified()) continue;
                ++row.misclassified;
                if (rank_of[rec.actual * n + rec.adversarial] < k) ++row.hits;
            }
            row.accuracy = row.misclassified > 0 ? static_cast<double>(row.hits) /
                                                       static_cast<double>(row.misclassified)
                                                 : std::numeric_limits<double>::quiet_NaN();
            report.rows.push_back(row);
        }
    };

    AccuracyReport report;
    if (group_by_epsilon) {
        for (double eps : log.epsilons()) tally(eps, report);
    }
    tally(std::nullopt, report);
    return report;
}

}  // namespace advgeo
