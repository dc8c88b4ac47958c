#include "advgeo/knn_hopping.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "advgeo/simd/kernels.hpp"

namespace advgeo {
namespace {

struct Candidate {
    double dist;
    PointId id;
    std::size_t index;
};

bool closer(const Candidate& a, const Candidate& b) {
    return a.dist != b.dist ? a.dist < b.dist : a.id < b.id;
}

constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

}  // namespace

KnnGraph KnnGraph::from_adjacency(std::size_t k, std::vector<std::vector<std::size_t>> adjacency,
                                  std::vector<ClassId> labels, std::vector<PointId> ids,
                                  std::size_t n_classes) {
    const std::size_t m = labels.size();
    if (k < 2 || k > m) {
        throw Error(ErrorKind::invalid_argument, "k must satisfy 2 <= k <= number of points");
    }
    if (adjacency.size() != m || ids.size() != m) {
        throw Error(ErrorKind::invalid_argument, "adjacency, labels and ids must have equal size");
    }
    KnnGraph g;
    g.k_ = k;
    g.n_classes_ = n_classes;
    g.adjacency_.reserve(m * (k - 1));
    for (std::size_t i = 0; i < m; ++i) {
        if (labels[i] >= n_classes) {
            throw Error(ErrorKind::invalid_argument, "label out of range at point " + std::to_string(i));
        }
        if (adjacency[i].size() != k - 1) {
            throw Error(ErrorKind::invalid_argument,
                        "point " + std::to_string(i) + " needs exactly k-1 neighbors");
        }
        std::vector<std::size_t> sorted = adjacency[i];
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw Error(ErrorKind::invalid_argument,
                        "point " + std::to_string(i) + " lists a neighbor twice");
        }
        for (std::size_t j : adjacency[i]) {
            if (j >= m || j == i) {
                throw Error(ErrorKind::invalid_argument,
                            "point " + std::to_string(i) + " has an invalid neighbor");
            }
            g.adjacency_.push_back(j);
        }
    }
    g.labels_ = std::move(labels);
    g.ids_ = std::move(ids);
    g.index_ids();
    return g;
}

void KnnGraph::index_ids() {
    id_lookup_.clear();
    id_lookup_.reserve(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) id_lookup_.emplace_back(ids_[i], i);
    std::sort(id_lookup_.begin(), id_lookup_.end());
    for (std::size_t i = 1; i < id_lookup_.size(); ++i) {
        if (id_lookup_[i].first == id_lookup_[i - 1].first) {
            throw Error(ErrorKind::invalid_argument,
                        "duplicate point id " + std::to_string(id_lookup_[i].first));
        }
    }
}

std::optional<std::size_t> KnnGraph::index_of(PointId id) const {
    auto it = std::lower_bound(id_lookup_.begin(), id_lookup_.end(),
                               std::make_pair(id, std::size_t{0}));
    if (it == id_lookup_.end() || it->first != id) return std::nullopt;
    return it->second;
}

KnnGraph build_knn_graph(const LabeledDataset& dataset, std::size_t k) {
    const std::size_t m = dataset.size();
    if (k < 2 || k > m) {
        throw Error(ErrorKind::invalid_argument, "k = " + std::to_string(k) +
                                                     " is out of range [2, " + std::to_string(m) +
                                                     "]");
    }
    KnnGraph g;
    g.k_ = k;
    g.n_classes_ = dataset.n_classes();
    g.labels_.assign(dataset.labels().begin(), dataset.labels().end());
    g.ids_.assign(dataset.ids().begin(), dataset.ids().end());
    g.adjacency_.resize(m * (k - 1));
    g.index_ids();

    const auto& kernels = simd::active_kernels();
    const std::size_t dim = dataset.n_dims();
    const double* all = dataset.all_features().data();
    std::vector<double> dist(m);
    std::vector<Candidate> cand;
    cand.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        kernels.squared_l2_rows(all + i * dim, all, m, dim, dist.data());
        cand.clear();
        for (std::size_t j = 0; j < m; ++j) {
            if (j != i) cand.push_back({dist[j], dataset.id(j), j});
        }
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k - 1),
                          cand.end(), closer);
        for (std::size_t r = 0; r + 1 < k; ++r) g.adjacency_[i * (k - 1) + r] = cand[r].index;
    }
    return g;
}

HopResult hop_distance_point(const KnnGraph& graph, PointId source, const HopTarget& target) {
    const auto src = graph.index_of(source);
    if (!src) {
        throw Error(ErrorKind::invalid_argument, "unknown source id " + std::to_string(source));
    }
    std::size_t target_index = kUnreached;
    ClassId target_class = 0;
    const bool class_form = std::holds_alternative<ClassTarget>(target);
    if (class_form) {
        target_class = std::get<ClassTarget>(target).label;
        if (target_class >= graph.n_classes()) {
            throw Error(ErrorKind::invalid_argument,
                        "unknown target class " + std::to_string(target_class));
        }
    } else {
        const auto t = graph.index_of(std::get<PointTarget>(target).id);
        if (!t) {
            throw Error(ErrorKind::invalid_argument,
                        "unknown target id " + std::to_string(std::get<PointTarget>(target).id));
        }
        target_index = *t;
    }
    auto satisfies = [&](std::size_t v) {
        return class_form ? graph.label(v) == target_class : v == target_index;
    };

    std::vector<bool> visited(graph.size(), false);
    visited[*src] = true;
    HopResult result;
    result.visited_count = 1;
    if (satisfies(*src)) {
        result.hops = 0;
        return result;
    }
    std::vector<std::size_t> frontier{*src};
    std::vector<std::size_t> expand;
    std::size_t depth = 0;
    while (!frontier.empty()) {
        ++depth;
        expand.clear();
        for (std::size_t v : frontier) {
            for (std::size_t u : graph.neighbors(v)) {
                if (visited[u]) continue;
                visited[u] = true;
                ++result.visited_count;
                if (satisfies(u)) {
                    result.hops = depth;
                    return result;
                }
                expand.push_back(u);
            }
        }
        frontier.swap(expand);
    }
    return result;
}

DistanceMatrix hopping_distance_matrix(const KnnGraph& graph) {
    const std::size_t m = graph.size();
    const std::size_t n = graph.n_classes();

    // Reverse adjacency in CSR form: BFS from every point of class l over
    // reversed edges gives each point's hop count to its nearest class-l point.
    std::vector<std::size_t> offsets(m + 1, 0);
    for (std::size_t v = 0; v < m; ++v) {
        for (std::size_t u : graph.neighbors(v)) ++offsets[u + 1];
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    std::vector<std::size_t> reverse(offsets.back());
    {
        std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
        for (std::size_t v = 0; v < m; ++v) {
            for (std::size_t u : graph.neighbors(v)) reverse[fill[u]++] = v;
        }
    }

    std::vector<double> values(n * n, 0.0);
    DistanceMetadata meta;
    meta.unreachable_sources.assign(n * n, 0);
    std::vector<std::size_t> hops(m);
    std::vector<std::size_t> queue;
    queue.reserve(m);
    for (std::size_t l = 0; l < n; ++l) {
        std::fill(hops.begin(), hops.end(), kUnreached);
        queue.clear();
        for (std::size_t v = 0; v < m; ++v) {
            if (graph.label(v) == l) {
                hops[v] = 0;
                queue.push_back(v);
            }
        }
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const std::size_t v = queue[head];
            for (std::size_t e = offsets[v]; e < offsets[v + 1]; ++e) {
                const std::size_t u = reverse[e];
                if (hops[u] == kUnreached) {
                    hops[u] = hops[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        std::vector<std::size_t> total(n, 0);
        std::vector<std::size_t> reached(n, 0);
        for (std::size_t v = 0; v < m; ++v) {
            const ClassId k = graph.label(v);
            if (hops[v] == kUnreached) {
                ++meta.unreachable_sources[k * n + l];
            } else {
                total[k] += hops[v];
                ++reached[k];
            }
        }
        for (std::size_t k = 0; k < n; ++k) {
            if (k == l) continue;
            values[k * n + l] = reached[k] == 0
                                    ? std::numeric_limits<double>::infinity()
                                    : static_cast<double>(total[k]) / static_cast<double>(reached[k]);
        }
    }
    return DistanceMatrix(Measure::hopping, n, std::move(values), true, std::move(meta));
}

ForbiddenDistance average_offdiagonal_distance(const DistanceMatrix& distances) {
    const std::size_t n = distances.size();
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || !std::isfinite(distances(i, j))) continue;
            sum += distances(i, j);
            ++count;
        }
    }
    if (count == 0) {
        throw Error(ErrorKind::undefined,
                    "no finite off-diagonal distances to average for the forbidden distance");
    }
    return {sum / static_cast<double>(count), distances.measure(),
            ForbiddenDistance::Derivation::clean_data_average};
}

ForbiddenDistance forbidden_distance(const DistanceMatrix& hop_matrix) {
    if (hop_matrix.measure() != Measure::hopping) {
        throw Error(ErrorKind::invalid_argument,
                    "the forbidden distance is defined on the hopping matrix");
    }
    return average_offdiagonal_distance(hop_matrix);
}

Displacement average_displacement(const AttackLog& log, const DistanceMatrix& hop_matrix,
                                  std::optional<double> epsilon_filter) {
    if (hop_matrix.measure() != Measure::hopping) {
        throw Error(ErrorKind::invalid_argument, "displacement is measured on the hopping matrix");
    }
    if (hop_matrix.size() != log.n_classes()) {
        throw Error(ErrorKind::invalid_argument, "log and hopping matrix disagree on class count");
    }
    Displacement d;
    double sum = 0.0;
    for (const auto& r : log.records()) {
        if (epsilon_filter && r.epsilon != *epsilon_filter) continue;
        ++d.records;
        if (!r.misclassified()) {
            ++d.unchanged;
            continue;
        }
        ++d.misclassified;
        const double hop = hop_matrix(r.actual, r.adversarial);
        if (!std::isfinite(hop)) {
            ++d.unreachable;
            continue;
        }
        sum += hop;
    }
    if (d.records == 0) {
        throw Error(ErrorKind::undefined, "displacement is undefined for an empty log");
    }
    d.value = sum / static_cast<double>(d.records);
    d.mean_over_flips = d.misclassified > 0 ? sum / static_cast<double>(d.misclassified) : 0.0;
    return d;
}

std::vector<double> nearest_class_affinity(const LabeledDataset& dataset, const KnnGraph& graph) {
    const std::size_t n = dataset.n_classes();
    const std::size_t m = dataset.size();
    if (n < 2) {
        throw Error(ErrorKind::invalid_argument, "nearest-class affinity needs at least 2 classes");
    }
    if (graph.size() != m) {
        throw Error(ErrorKind::invalid_argument, "graph was not built from this dataset");
    }
    const auto& kernels = simd::active_kernels();
    const std::size_t dim = dataset.n_dims();
    const double* all = dataset.all_features().data();
    std::vector<double> dist(m);
    std::vector<std::size_t> counts(n * n, 0);
    for (std::size_t i = 0; i < m; ++i) {
        const ClassId own = dataset.label(i);
        std::optional<std::size_t> nearest;
        for (std::size_t j : graph.neighbors(i)) {
            if (dataset.label(j) != own) {
                nearest = j;
                break;
            }
        }
        if (!nearest) {
            kernels.squared_l2_rows(all + i * dim, all, m, dim, dist.data());
            Candidate best{std::numeric_limits<double>::infinity(),
                           std::numeric_limits<PointId>::max(), 0};
            for (std::size_t j = 0; j < m; ++j) {
                if (dataset.label(j) == own) continue;
                const Candidate c{dist[j], dataset.id(j), j};
                if (!nearest || closer(c, best)) {
                    best = c;
                    nearest = j;
                }
            }
        }
        ++counts[own * n + dataset.label(*nearest)];
    }
    std::vector<double> affinity(n * n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        const double size = static_cast<double>(dataset.class_members(static_cast<ClassId>(c)).size());
        for (std::size_t t = 0; t < n; ++t) {
            affinity[c * n + t] = static_cast<double>(counts[c * n + t]) / size;
        }
    }
    return affinity;
}

}  // namespace advgeo
