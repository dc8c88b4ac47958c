#pragma once

// Seeded synthetic data: Gaussian blob datasets and a stand-in attack that
// flips predictions according to a transition model. Both are pure functions
// of their arguments; every point draws from its own stream derived from
// (seed, point id), so results do not depend on evaluation order.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "advgeo/transition.hpp"
#include "advgeo/types.hpp"

namespace advgeo {

struct BlobSpec {
    std::size_t per_class = 0;
    std::size_t n_dims = 0;
    // One center per class, each of length n_dims.
    std::vector<std::vector<double>> centers;
    double spread = 0.0;  // isotropic standard deviation
    std::uint64_t seed = 0;
};

// Centers on the first axis: c_0 = 0, c_{i+1} = c_i + gaps[i].
std::vector<std::vector<double>> centers_on_line(const std::vector<double>& gaps,
                                                 std::size_t n_dims);

// Ids are class-major: id = class * per_class + j. Throws
// Error(invalid_argument) for spread < 0 or a center of the wrong length.
LabeledDataset generate_blobs(const BlobSpec& spec);

struct AttackSimulation {
    std::vector<double> epsilons;
    // Probability that a point flips at all, per epsilon. A single value is
    // broadcast to every epsilon; an empty vector means 1.
    std::vector<double> success_probability;
    std::uint64_t seed = 0;
};

// For every point and epsilon: with probability success(eps) the adversarial
// class is drawn from P(.|actual), otherwise it equals the actual class. Rows
// without any mass never flip. Records are ordered by epsilon, then point.
AttackLog simulate_attack(const LabeledDataset& dataset, const TransitionModel& transition,
                          const AttackSimulation& simulation);

// Keeps at most `cap_per_class` points of every class, chosen by a seeded
// shuffle; retained points keep their original order.
LabeledDataset stratified_subsample(const LabeledDataset& dataset, std::size_t cap_per_class,
                                    std::uint64_t seed);

// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace advgeo
