#include "advgeo/centroid.hpp"

#include <cmath>

#include "advgeo/simd/kernels.hpp"

namespace advgeo {

ClassCentroids class_centroids(std::span<const double> features, std::span<const ClassId> labels,
                               std::size_t n_dims, std::size_t n_classes) {
    if (n_dims == 0 || features.size() != labels.size() * n_dims) {
        throw Error(ErrorKind::invalid_argument, "feature buffer does not match labels x n_dims");
    }
    ClassCentroids out;
    out.n_classes = n_classes;
    out.n_dims = n_dims;
    out.centroids.assign(n_classes * n_dims, 0.0);
    out.counts.assign(n_classes, 0);

    const auto& kernels = simd::active_kernels();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const ClassId c = labels[i];
        if (c >= n_classes) {
            throw Error(ErrorKind::invalid_argument,
                        "label " + std::to_string(c) + " is out of range");
        }
        kernels.accumulate(out.centroids.data() + c * n_dims, features.data() + i * n_dims,
                           n_dims);
        ++out.counts[c];
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (out.counts[c] == 0) {
            throw Error(ErrorKind::validation, "class " + std::to_string(c) + " is empty");
        }
        const double count = static_cast<double>(out.counts[c]);
        for (std::size_t k = 0; k < n_dims; ++k) out.centroids[c * n_dims + k] /= count;
    }
    return out;
}

ClassCentroids class_centroids(const LabeledDataset& dataset) {
    return class_centroids(dataset.all_features(), dataset.labels(), dataset.n_dims(),
                           dataset.n_classes());
}

DistanceMatrix euclidean_distance_matrix(const ClassCentroids& centroids, Measure tag) {
    const std::size_t n = centroids.n_classes;
    std::vector<double> values(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = std::sqrt(simd::squared_l2(centroids.centroid(i), centroids.centroid(j)));
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    return DistanceMatrix(tag, n, std::move(values), false);
}

DistanceMatrix cosine_scaled_distance_matrix(const ClassCentroids& centroids) {
    const std::size_t n = centroids.n_classes;
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        norms[i] = std::sqrt(simd::dot(centroids.centroid(i), centroids.centroid(i)));
        if (norms[i] == 0.0) {
            throw Error(ErrorKind::invalid_argument,
                        "centroid of class " + std::to_string(i) +
                            " is the zero vector; its cosine is undefined");
        }
    }
    std::vector<double> values(n * n, 0.0);
    DistanceMetadata meta;
    meta.signed_values.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto a = centroids.centroid(i);
            const auto b = centroids.centroid(j);
            const double euclid = std::sqrt(simd::squared_l2(a, b));
            double cosine = simd::dot(a, b) / (norms[i] * norms[j]);
            cosine = std::fmax(-1.0, std::fmin(1.0, cosine));
            const double raw = euclid * cosine;
            values[i * n + j] = values[j * n + i] = euclid * std::abs(cosine);
            meta.signed_values[i * n + j] = meta.signed_values[j * n + i] = raw;
        }
    }
    return DistanceMatrix(Measure::euclidean_cosine, n, std::move(values), false, std::move(meta));
}

}  // namespace advgeo
