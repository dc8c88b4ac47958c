#include "advgeo/adversarial_map.hpp"

#include <algorithm>
#include <cmath>

namespace advgeo {

std::string_view to_string(ForbiddenDistance::Derivation d) {
    return d == ForbiddenDistance::Derivation::user_supplied ? "user_supplied"
                                                             : "clean_data_average";
}

AdversarialMap::AdversarialMap(std::size_t n_classes, std::vector<MapEdge> edges,
                               ForbiddenDistance f_d, Measure measure, bool directed)
    : n_(n_classes),
      edges_(std::move(edges)),
      adjacency_(n_classes * n_classes, false),
      f_d_(f_d),
      measure_(measure),
      directed_(directed) {
    std::sort(edges_.begin(), edges_.end(), [](const MapEdge& a, const MapEdge& b) {
        return a.source != b.source ? a.source < b.source : a.target < b.target;
    });
    for (const auto& e : edges_) {
        if (e.source >= n_ || e.target >= n_ || e.source == e.target) {
            throw Error(ErrorKind::validation, "invalid map edge " + std::to_string(e.source) +
                                                   "->" + std::to_string(e.target));
        }
        adjacency_[e.source * n_ + e.target] = true;
    }
}

std::vector<ClassId> AdversarialMap::neighbors(std::size_t source) const {
    std::vector<ClassId> out;
    for (std::size_t t = 0; t < n_; ++t) {
        if (has_edge(source, t)) out.push_back(static_cast<ClassId>(t));
    }
    return out;
}

double AdversarialMap::edge_density() const {
    if (n_ < 2) return 0.0;
    return static_cast<double>(edges_.size()) / static_cast<double>(n_ * (n_ - 1));
}

AdversarialMap create_map(const DistanceMatrix& distances, const ForbiddenDistance& f_d) {
    if (!std::isfinite(f_d.value) || f_d.value < 0.0) {
        throw Error(ErrorKind::invalid_argument,
                    "forbidden distance must be finite and non-negative");
    }
    const std::size_t n = distances.size();
    std::vector<MapEdge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double d = distances(i, j);
            if (std::isfinite(d) && d <= f_d.value) {
                edges.push_back({static_cast<ClassId>(i), static_cast<ClassId>(j), d});
            }
        }
    }
    return AdversarialMap(n, std::move(edges), f_d, distances.measure(), distances.directed());
}

ConsistencyReport neighbor_consistency(const AdversarialMap& map, const AttackLog& log) {
    if (map.n_classes() != log.n_classes()) {
        throw Error(ErrorKind::invalid_argument,
                    "map has " + std::to_string(map.n_classes()) + " classes but the log has " +
                        std::to_string(log.n_classes()));
    }
    const std::size_t n = map.n_classes();
    std::vector<std::size_t> flips(n, 0);
    std::vector<std::size_t> hits(n, 0);
    ConsistencyReport report;
    for (const auto& r : log.records()) {
        if (!r.misclassified()) continue;
        ++report.misclassified;
        ++flips[r.actual];
        if (map.has_edge(r.actual, r.adversarial)) {
            ++report.on_map;
            ++hits[r.actual];
        }
    }
    if (report.misclassified > 0) {
        report.overall =
            static_cast<double>(report.on_map) / static_cast<double>(report.misclassified);
    }
    report.per_class.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        if (flips[c] > 0) {
            report.per_class[c] = static_cast<double>(hits[c]) / static_cast<double>(flips[c]);
        }
    }
    report.baseline = map.edge_density();
    return report;
}

}  // namespace advgeo
