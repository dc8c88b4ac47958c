#pragma once

// Exact (O(m²)) t-SNE to two dimensions and the class-centroid distance
// matrix of the resulting embedding.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advgeo/types.hpp"

namespace advgeo {

struct TsneParams {
    double perplexity = 30.0;
    std::size_t max_iters = 1000;
    double learning_rate = 200.0;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    std::size_t momentum_switch_iter = 250;
    double early_exaggeration = 12.0;
    std::size_t exaggeration_iters = 250;
    double init_stddev = 1e-4;
    std::uint64_t seed = 0;
};

struct AffinityMatrix {
    std::size_t m = 0;
    double perplexity = 0.0;
    std::vector<double> conditional;  // row i holds p_{j|i}; m x m
    std::vector<double> p;            // symmetric joint, sums to 1; m x m
    std::vector<double> sigmas;       // Gaussian bandwidth per point
};

// Gaussian conditionals with per-point bandwidths found by bisection so that
// 2^H(p_{.|i}) equals the perplexity, then symmetrized to joints
// p_ij = (p_{j|i} + p_{i|j}) / 2m. Throws Error(invalid_argument) unless
// m >= 3 and 0 < perplexity < m, and Error(numerical) naming the point id when
// the bisection does not reach the target within 200 steps.
AffinityMatrix conditional_affinities(const LabeledDataset& dataset, double perplexity);
AffinityMatrix conditional_affinities(std::span<const double> features, std::size_t n_dims,
                                      std::span<const PointId> ids, double perplexity);

// KL(P || Q) for 2-D coordinates given as x0,y0,x1,y1,...
double kl_divergence(const AffinityMatrix& affinities, std::span<const double> coords);

// Gradient of KL(P || Q) in the same interleaved layout; `exaggeration`
// multiplies P as during the early optimization phase.
std::vector<double> kl_gradient(const AffinityMatrix& affinities, std::span<const double> coords,
                                double exaggeration = 1.0);

struct Embedding2D {
    std::vector<PointId> ids;
    std::vector<ClassId> labels;
    std::size_t n_classes = 0;
    std::vector<double> coords;     // x0,y0,x1,y1,...
    std::vector<double> kl_trace;   // KL after each iteration; empty when loaded from file
    TsneParams params;

    std::size_t size() const noexcept { return ids.size(); }
};

// Gradient descent with momentum and per-coordinate gains. Once early
// exaggeration ends, a step that would raise the KL divergence is retried
// along the plain gradient with a halving step size (and skipped if none
// helps), so kl_trace never increases after that point. Deterministic for a
// fixed seed and instruction set.
Embedding2D tsne_embed(const LabeledDataset& dataset, const TsneParams& params);

// Euclidean distances between per-class centers of mass of the embedding.
DistanceMatrix tsne_distance_matrix(const Embedding2D& embedding);

// CSV "id,label,y0,y1" with an optional "# n_classes=K" line.
Embedding2D load_embedding(const std::string& path);
void save_embedding(const Embedding2D& embedding, const std::string& path);

// Throws Error(validation) unless the embedding holds exactly the dataset's
// ids with the same labels.
void check_embedding_matches(const Embedding2D& embedding, const LabeledDataset& dataset);

}  // namespace advgeo
