#include "advgeo/transition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "numeric.hpp"

namespace advgeo {

std::string TransitionProvenance::label() const {
    switch (kind) {
        case Kind::uniform:
            return "uniform";
        case Kind::custom:
            return "custom";
        case Kind::weighted:
            return measure ? std::string(to_string(*measure)) : "weighted";
    }
    return "unknown";
}

TransitionModel::TransitionModel(std::size_t n, std::vector<double> p,
                                 TransitionProvenance provenance)
    : n_(n), p_(std::move(p)), provenance_(std::move(provenance)) {
    if (n_ == 0 || p_.size() != n_ * n_) {
        throw Error(ErrorKind::validation, "transition matrix must be n x n with n >= 1");
    }
    for (std::size_t i = 0; i < n_; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            const double v = p_[i * n_ + j];
            if (!std::isfinite(v) || v < 0.0) {
                throw Error(ErrorKind::validation, "transition entry (" + std::to_string(i) +
                                                       "," + std::to_string(j) +
                                                       ") is not a probability");
            }
            sum += v;
        }
        if (p_[i * n_ + i] != 0.0) {
            throw Error(ErrorKind::validation,
                        "transition row " + std::to_string(i) + " has a non-zero diagonal");
        }
        if (sum != 0.0 && std::abs(sum - 1.0) > 1e-9) {
            throw Error(ErrorKind::validation,
                        "transition row " + std::to_string(i) + " sums to " + std::to_string(sum));
        }
    }
}

TransitionModel uniform_transition(std::size_t n) {
    if (n < 2) {
        throw Error(ErrorKind::invalid_argument, "uniform transition needs at least 2 classes");
    }
    const double q = 1.0 / static_cast<double>(n - 1);
    std::vector<double> p(n * n, q);
    for (std::size_t i = 0; i < n; ++i) p[i * n + i] = 0.0;
    return TransitionModel(n, std::move(p), {});
}

TransitionModel weighted_transition(const DistanceMatrix& distances, const AdversarialMap* map,
                                    const WeightingOptions& options) {
    const std::size_t n = distances.size();
    if (n < 2) {
        throw Error(ErrorKind::invalid_argument, "weighted transition needs at least 2 classes");
    }
    if (map && map->n_classes() != n) {
        throw Error(ErrorKind::invalid_argument, "map and distance matrix disagree on class count");
    }
    TransitionProvenance prov;
    prov.kind = TransitionProvenance::Kind::weighted;
    prov.measure = distances.measure();
    prov.map_restricted = map != nullptr;

    std::vector<double> p(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            if (map && !map->has_edge(i, j)) continue;
            double d = distances(i, j);
            if (!std::isfinite(d)) continue;
            if (options.distance_floor) d = std::max(d, *options.distance_floor);
            if (d == 0.0) {
                throw Error(ErrorKind::invalid_argument,
                            "classes " + std::to_string(i) + " and " + std::to_string(j) +
                                " are at distance 0; 1/d is undefined");
            }
            p[i * n + j] = 1.0 / d;
            total += p[i * n + j];
        }
        if (total == 0.0) {
            prov.fallback_rows.push_back(i);
            const double q = 1.0 / static_cast<double>(n - 1);
            for (std::size_t j = 0; j < n; ++j) p[i * n + j] = j == i ? 0.0 : q;
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) p[i * n + j] /= total;
    }
    return TransitionModel(n, std::move(p), std::move(prov));
}

namespace {

EntropyEntry entropy_over(const AttackLog& log, const TransitionModel& transition,
                          std::optional<double> epsilon_filter) {
    if (log.n_classes() != transition.n_classes()) {
        throw Error(ErrorKind::invalid_argument,
                    "log has " + std::to_string(log.n_classes()) +
                        " classes but the transition model has " +
                        std::to_string(transition.n_classes()));
    }
    EntropyEntry e;
    e.label = transition.provenance().label();
    e.epsilon = epsilon_filter;
    numeric::CompensatedSum plogp;
    numeric::CompensatedSum nll;
    for (const auto& r : log.records()) {
        if (epsilon_filter && r.epsilon != *epsilon_filter) continue;
        ++e.records;
        if (!r.misclassified()) continue;
        ++e.misclassified;
        const double p = transition(r.actual, r.adversarial);
        if (p == 0.0) {
            ++e.surprise_events;
            continue;
        }
        const double lp = std::log(p);
        plogp.add(p * lp);
        nll.add(lp);
    }
    if (e.misclassified == 0) {
        e.e_m = std::numeric_limits<double>::quiet_NaN();
        e.mean_nll = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    e.e_m = -plogp.value() / static_cast<double>(e.misclassified);
    const std::size_t scored = e.misclassified - e.surprise_events;
    e.mean_nll = scored > 0 ? -nll.value() / static_cast<double>(scored)
                            : std::numeric_limits<double>::quiet_NaN();
    return e;
}

}  // namespace

EntropyEntry model_entropy(const AttackLog& log, const TransitionModel& transition,
                           std::optional<double> epsilon_filter) {
    EntropyEntry e = entropy_over(log, transition, epsilon_filter);
    if (e.misclassified == 0) {
        throw Error(ErrorKind::undefined, "entropy is undefined: no misclassified records");
    }
    return e;
}

std::vector<EntropyEntry> entropy_sweep(const AttackLog& log,
                                        const std::vector<TransitionModel>& transitions) {
    const auto eps = log.epsilons();
    std::vector<EntropyEntry> out;
    out.reserve(transitions.size() * eps.size());
    for (const auto& t : transitions) {
        for (double e : eps) out.push_back(entropy_over(log, t, e));
    }
    return out;
}

}  // namespace advgeo
