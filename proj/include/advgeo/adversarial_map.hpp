#pragma once

// Adversarial map: the class graph with an edge i -> j whenever the distance
// between the classes does not exceed the forbidden distance.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "advgeo/types.hpp"

namespace advgeo {

struct ForbiddenDistance {
    enum class Derivation { clean_data_average, user_supplied };

    double value = 0.0;
    Measure measure = Measure::hopping;
    Derivation derivation = Derivation::clean_data_average;
};

std::string_view to_string(ForbiddenDistance::Derivation d);

struct MapEdge {
    ClassId source;
    ClassId target;
    double weight;

    friend bool operator==(const MapEdge&, const MapEdge&) = default;
};

class AdversarialMap {
public:
    AdversarialMap(std::size_t n_classes, std::vector<MapEdge> edges, ForbiddenDistance f_d,
                   Measure measure, bool directed);

    std::size_t n_classes() const noexcept { return n_; }
    // Sorted by (source, target). Undirected maps list both directions.
    const std::vector<MapEdge>& edges() const noexcept { return edges_; }
    const ForbiddenDistance& forbidden_distance() const noexcept { return f_d_; }
    Measure measure() const noexcept { return measure_; }
    bool directed() const noexcept { return directed_; }

    bool has_edge(std::size_t source, std::size_t target) const {
        return adjacency_[source * n_ + target];
    }
    // Targets of `source`, ascending.
    std::vector<ClassId> neighbors(std::size_t source) const;
    // edges / (n (n - 1)); 0 for a single class.
    double edge_density() const;

private:
    std::size_t n_;
    std::vector<MapEdge> edges_;
    std::vector<bool> adjacency_;
    ForbiddenDistance f_d_;
    Measure measure_;
    bool directed_;
};

// Single pass over the off-diagonal entries: edge (i, j) iff d(i, j) is finite
// and <= f_d. Throws Error(invalid_argument) when f_d is not finite or < 0.
AdversarialMap create_map(const DistanceMatrix& distances, const ForbiddenDistance& f_d);

struct ConsistencyReport {
    std::size_t misclassified = 0;
    std::size_t on_map = 0;
    // on_map / misclassified; nullopt when there are no misclassified records.
    std::optional<double> overall;
    // Same statistic restricted to records whose actual class is c.
    std::vector<std::optional<double>> per_class;
    // Fraction of ordered class pairs that are edges; what uniformly random
    // flips would score on average.
    double baseline = 0.0;
};

// Fraction of misclassified records whose (actual -> adversarial) pair is a
// map edge. Throws Error(invalid_argument) on a class-count mismatch.
ConsistencyReport neighbor_consistency(const AdversarialMap& map, const AttackLog& log);

}  // namespace advgeo
