#pragma once

// Per-class centers of mass and the two centroid-based distance matrices.

#include <cstddef>
#include <span>
#include <vector>

#include "advgeo/types.hpp"

namespace advgeo {

struct ClassCentroids {
    std::size_t n_classes = 0;
    std::size_t n_dims = 0;
    std::vector<double> centroids;  // n_classes x n_dims, row-major
    std::vector<std::size_t> counts;

    std::span<const double> centroid(std::size_t c) const {
        return {centroids.data() + c * n_dims, n_dims};
    }
};

// Unit-mass centers: Σ features / count for every class. Throws
// Error(validation) naming the first class without points.
ClassCentroids class_centroids(std::span<const double> features, std::span<const ClassId> labels,
                               std::size_t n_dims, std::size_t n_classes);
ClassCentroids class_centroids(const LabeledDataset& dataset);

// d(i, j) = |cm_i - cm_j|. Symmetric, zero diagonal.
DistanceMatrix euclidean_distance_matrix(const ClassCentroids& centroids,
                                         Measure tag = Measure::euclidean);

// d(i, j) = |cm_i - cm_j| * |cos θ_ij| with cos θ_ij = cm_i·cm_j / (|cm_i| |cm_j|)
// taken about the origin. The signed product is kept in metadata().signed_values.
// Throws Error(invalid_argument) if any centroid is the zero vector.
DistanceMatrix cosine_scaled_distance_matrix(const ClassCentroids& centroids);

}  // namespace advgeo
