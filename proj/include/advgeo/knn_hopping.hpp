#pragma once

// Exact k-NN graphs and breadth-first hopping distances over them.
//
// A k-NN graph keeps the k-1 nearest *other* points of every point (the point
// itself would be its own first neighbor). Edges are directed: j being among
// i's neighbors says nothing about i being among j's. The hopping distance is
// the BFS depth at which a target first enters the frontier.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <span>
#include <variant>
#include <vector>

#include "advgeo/adversarial_map.hpp"
#include "advgeo/types.hpp"

namespace advgeo {

class KnnGraph {
public:
    // Build from explicit adjacency; used for hand-made graphs in tests and for
    // reloading. Every list must have exactly k - 1 distinct entries that are
    // valid indices other than the owner.
    static KnnGraph from_adjacency(std::size_t k, std::vector<std::vector<std::size_t>> adjacency,
                                   std::vector<ClassId> labels, std::vector<PointId> ids,
                                   std::size_t n_classes);

    std::size_t k() const noexcept { return k_; }
    std::size_t size() const noexcept { return labels_.size(); }
    std::size_t n_classes() const noexcept { return n_classes_; }

    // Neighbor indices of point i, nearest first.
    std::span<const std::size_t> neighbors(std::size_t i) const {
        return {adjacency_.data() + i * (k_ - 1), k_ - 1};
    }
    ClassId label(std::size_t i) const { return labels_[i]; }
    PointId id(std::size_t i) const { return ids_[i]; }
    std::optional<std::size_t> index_of(PointId id) const;

private:
    friend KnnGraph build_knn_graph(const LabeledDataset&, std::size_t);
    KnnGraph() = default;

    std::size_t k_ = 0;
    std::size_t n_classes_ = 0;
    std::vector<std::size_t> adjacency_;  // size() x (k - 1)
    std::vector<ClassId> labels_;
    std::vector<PointId> ids_;
    std::vector<std::pair<PointId, std::size_t>> id_lookup_;  // sorted by id

    void index_ids();
};

// Exact Euclidean k-NN by brute force; ties are broken by the smaller point id.
// Throws Error(invalid_argument) unless 2 <= k <= size().
KnnGraph build_knn_graph(const LabeledDataset& dataset, std::size_t k);

struct HopResult {
    std::optional<std::size_t> hops;  // nullopt: unreachable
    std::size_t visited_count = 0;

    bool reachable() const noexcept { return hops.has_value(); }
};

struct PointTarget {
    PointId id;
};
struct ClassTarget {
    ClassId label;
};
using HopTarget = std::variant<PointTarget, ClassTarget>;

// Level-synchronous BFS from `source`. Returns 0 when the source already
// satisfies the target. Throws Error(invalid_argument) for an unknown id or
// class.
HopResult hop_distance_point(const KnnGraph& graph, PointId source, const HopTarget& target);

// Entry (k, l): mean over source points of class k of the class-form hop
// distance to class l. Sources that cannot reach l are left out of the mean
// and counted in metadata().unreachable_sources; if none can, the entry is +inf.
DistanceMatrix hopping_distance_matrix(const KnnGraph& graph);

// Mean of the finite off-diagonal entries of a hopping matrix. Throws
// Error(invalid_argument) for other measures and Error(undefined) when every
// off-diagonal entry is infinite.
ForbiddenDistance forbidden_distance(const DistanceMatrix& hop_matrix);

// Same average for any measure; used to derive a map threshold for the
// centroid and t-SNE measures.
ForbiddenDistance average_offdiagonal_distance(const DistanceMatrix& distances);

struct Displacement {
    double value = 0.0;               // Σ_misclassified S_D[a][b] / records
    double mean_over_flips = 0.0;     // Σ_misclassified S_D[a][b] / misclassified (0 if none)
    std::size_t records = 0;
    std::size_t misclassified = 0;
    std::size_t unchanged = 0;
    std::size_t unreachable = 0;      // flips whose S_D entry is +inf; contribute 0
};

// Average displacement of an attack log measured in hops. Every record counts
// in the denominator; unchanged records contribute 0. Throws
// Error(invalid_argument) for a non-hopping matrix and Error(undefined) when
// no record survives the filter.
Displacement average_displacement(const AttackLog& log, const DistanceMatrix& hop_matrix,
                                  std::optional<double> epsilon_filter = std::nullopt);

// Row i: fraction of class-i points whose nearest out-of-class point lies in
// class j. Uses the k-NN list when it already contains an out-of-class point
// and falls back to a full scan otherwise. Throws Error(invalid_argument) for
// a single-class dataset.
std::vector<double> nearest_class_affinity(const LabeledDataset& dataset, const KnnGraph& graph);

}  // namespace advgeo
