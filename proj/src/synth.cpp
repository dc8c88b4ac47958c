#include "advgeo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace advgeo {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::vector<std::vector<double>> centers_on_line(const std::vector<double>& gaps,
                                                 std::size_t n_dims) {
    if (n_dims == 0) throw Error(ErrorKind::invalid_argument, "n_dims must be positive");
    std::vector<std::vector<double>> centers(gaps.size() + 1, std::vector<double>(n_dims, 0.0));
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        centers[i + 1][0] = centers[i][0] + gaps[i];
    }
    return centers;
}

LabeledDataset generate_blobs(const BlobSpec& spec) {
    if (!(spec.spread >= 0.0) || !std::isfinite(spec.spread)) {
        throw Error(ErrorKind::invalid_argument, "blob spread must be finite and >= 0");
    }
    if (spec.centers.empty() || spec.per_class == 0 || spec.n_dims == 0) {
        throw Error(ErrorKind::invalid_argument,
                    "blobs need at least one class, one point per class and one dimension");
    }
    for (std::size_t c = 0; c < spec.centers.size(); ++c) {
        if (spec.centers[c].size() != spec.n_dims) {
            throw Error(ErrorKind::invalid_argument,
                        "center " + std::to_string(c) + " has the wrong dimensionality");
        }
    }
    const std::size_t n_classes = spec.centers.size();
    const std::size_t m = n_classes * spec.per_class;
    std::vector<PointId> ids(m);
    std::vector<ClassId> labels(m);
    std::vector<double> features(m * spec.n_dims);
    for (std::size_t c = 0; c < n_classes; ++c) {
        for (std::size_t j = 0; j < spec.per_class; ++j) {
            const std::size_t i = c * spec.per_class + j;
            ids[i] = i;
            labels[i] = static_cast<ClassId>(c);
            std::mt19937_64 rng(mix_seed(spec.seed, i));
            std::normal_distribution<double> noise(0.0, 1.0);
            for (std::size_t k = 0; k < spec.n_dims; ++k) {
                features[i * spec.n_dims + k] = spec.centers[c][k] + spec.spread * noise(rng);
            }
        }
    }
    return LabeledDataset::create(std::move(ids), std::move(labels), std::move(features),
                                  spec.n_dims, n_classes);
}

AttackLog simulate_attack(const LabeledDataset& dataset, const TransitionModel& transition,
                          const AttackSimulation& simulation) {
    if (transition.n_classes() != dataset.n_classes()) {
        throw Error(ErrorKind::invalid_argument,
                    "transition model and dataset disagree on class count");
    }
    const auto& succ = simulation.success_probability;
    if (succ.size() > 1 && succ.size() != simulation.epsilons.size()) {
        throw Error(ErrorKind::invalid_argument,
                    "success_probability must have one value or one per epsilon");
    }
    for (double s : succ) {
        if (!(s >= 0.0 && s <= 1.0)) {
            throw Error(ErrorKind::invalid_argument, "success probabilities must lie in [0, 1]");
        }
    }

    std::vector<AttackRecord> records;
    records.reserve(dataset.size() * simulation.epsilons.size());
    for (std::size_t e = 0; e < simulation.epsilons.size(); ++e) {
        const double eps = simulation.epsilons[e];
        const double success = succ.empty() ? 1.0 : (succ.size() == 1 ? succ[0] : succ[e]);
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            const ClassId actual = dataset.label(i);
            ClassId adversarial = actual;
            std::mt19937_64 rng(mix_seed(mix_seed(simulation.seed, dataset.id(i)), e));
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const double u_flip = unit(rng);
            const double u_target = unit(rng);
            const auto row = transition.row(actual);
            const double mass = std::accumulate(row.begin(), row.end(), 0.0);
            if (u_flip < success && mass > 0.0) {
                // Inverse CDF; the last class with mass absorbs rounding.
                double cum = 0.0;
                const double target = u_target * mass;
                for (std::size_t j = 0; j < row.size(); ++j) {
                    if (row[j] <= 0.0) continue;
                    adversarial = static_cast<ClassId>(j);
                    cum += row[j];
                    if (target < cum) break;
                }
            }
            records.push_back({dataset.id(i), eps, actual, adversarial});
        }
    }
    return AttackLog::create(std::move(records), dataset.n_classes(),
                             {{"attack", "simulated"}, {"seed", std::to_string(simulation.seed)}});
}

LabeledDataset stratified_subsample(const LabeledDataset& dataset, std::size_t cap_per_class,
                                    std::uint64_t seed) {
    if (cap_per_class == 0) {
        throw Error(ErrorKind::invalid_argument, "subsample cap must be positive");
    }
    std::vector<bool> keep(dataset.size(), false);
    for (std::size_t c = 0; c < dataset.n_classes(); ++c) {
        const auto members = dataset.class_members(static_cast<ClassId>(c));
        std::vector<std::size_t> order(members.begin(), members.end());
        if (order.size() > cap_per_class) {
            std::mt19937_64 rng(mix_seed(seed, c));
            for (std::size_t k = order.size() - 1; k > 0; --k) {
                std::uniform_int_distribution<std::size_t> pick(0, k);
                std::swap(order[k], order[pick(rng)]);
            }
            order.resize(cap_per_class);
        }
        for (std::size_t idx : order) keep[idx] = true;
    }
    std::vector<PointId> ids;
    std::vector<ClassId> labels;
    std::vector<double> features;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (!keep[i]) continue;
        ids.push_back(dataset.id(i));
        labels.push_back(dataset.label(i));
        const auto f = dataset.features(i);
        features.insert(features.end(), f.begin(), f.end());
    }
    return LabeledDataset::create(std::move(ids), std::move(labels), std::move(features),
                                  dataset.n_dims(), dataset.n_classes());
}

}  // namespace advgeo
