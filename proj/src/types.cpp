#include "advgeo/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace advgeo {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument:
            return "invalid_argument";
        case ErrorKind::parse:
            return "parse";
        case ErrorKind::validation:
            return "validation";
        case ErrorKind::numerical:
            return "numerical";
        case ErrorKind::io:
            return "io";
        case ErrorKind::undefined:
            return "undefined";
    }
    return "unknown";
}

std::string_view to_string(Measure m) {
    switch (m) {
        case Measure::tsne:
            return "tsne";
        case Measure::euclidean:
            return "euclidean";
        case Measure::euclidean_cosine:
            return "euclidean_cosine";
        case Measure::hopping:
            return "hopping";
    }
    return "unknown";
}

Measure measure_from_string(std::string_view name) {
    for (Measure m : {Measure::tsne, Measure::euclidean, Measure::euclidean_cosine,
                      Measure::hopping}) {
        if (name == to_string(m)) return m;
    }
    throw Error(ErrorKind::invalid_argument, "unknown measure '" + std::string(name) + "'");
}

LabeledDataset LabeledDataset::create(std::vector<PointId> ids, std::vector<ClassId> labels,
                                      std::vector<double> features, std::size_t n_dims,
                                      std::optional<std::size_t> n_classes) {
    if (n_dims == 0) {
        throw Error(ErrorKind::validation, "dataset dimensionality must be positive");
    }
    if (ids.size() != labels.size()) {
        throw Error(ErrorKind::validation, "dataset has " + std::to_string(ids.size()) +
                                               " ids but " + std::to_string(labels.size()) +
                                               " labels");
    }
    if (features.size() != ids.size() * n_dims) {
        throw Error(ErrorKind::validation,
                    "feature buffer has " + std::to_string(features.size()) +
                        " values, expected " + std::to_string(ids.size() * n_dims));
    }
    if (ids.empty()) {
        throw Error(ErrorKind::validation, "dataset has no points");
    }

    LabeledDataset ds;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (!ds.id_lookup_.emplace(ids[i], i).second) {
            throw Error(ErrorKind::validation,
                        "duplicate point id " + std::to_string(ids[i]));
        }
        for (std::size_t k = 0; k < n_dims; ++k) {
            if (!std::isfinite(features[i * n_dims + k])) {
                throw Error(ErrorKind::validation, "point id " + std::to_string(ids[i]) +
                                                       " has a non-finite feature " +
                                                       std::to_string(k));
            }
        }
    }

    const std::size_t max_label = *std::max_element(labels.begin(), labels.end());
    const std::size_t classes = n_classes.value_or(max_label + 1);
    if (classes == 0) {
        throw Error(ErrorKind::validation, "n_classes must be positive");
    }
    if (max_label >= classes) {
        throw Error(ErrorKind::validation, "label " + std::to_string(max_label) +
                                               " is out of range for " +
                                               std::to_string(classes) + " classes");
    }
    ds.class_index_.resize(classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ds.class_index_[labels[i]].push_back(i);
    }
    for (std::size_t c = 0; c < classes; ++c) {
        if (ds.class_index_[c].empty()) {
            throw Error(ErrorKind::validation, "class " + std::to_string(c) + " is empty");
        }
    }

    ds.ids_ = std::move(ids);
    ds.labels_ = std::move(labels);
    ds.features_ = std::move(features);
    ds.n_dims_ = n_dims;
    return ds;
}

std::optional<std::size_t> LabeledDataset::index_of(PointId id) const {
    auto it = id_lookup_.find(id);
    if (it == id_lookup_.end()) return std::nullopt;
    return it->second;
}

DistanceMatrix::DistanceMatrix(Measure measure, std::size_t n, std::vector<double> values,
                               bool directed, DistanceMetadata metadata)
    : measure_(measure),
      n_(n),
      values_(std::move(values)),
      directed_(directed),
      metadata_(std::move(metadata)) {
    if (values_.size() != n_ * n_) {
        throw Error(ErrorKind::validation, "distance matrix needs " + std::to_string(n_ * n_) +
                                               " entries, got " +
                                               std::to_string(values_.size()));
    }
    for (std::size_t i = 0; i < n_; ++i) {
        if (values_[i * n_ + i] != 0.0) {
            throw Error(ErrorKind::validation,
                        "distance matrix diagonal entry " + std::to_string(i) + " is not 0");
        }
        for (std::size_t j = 0; j < n_; ++j) {
            const double v = values_[i * n_ + j];
            const bool ok = v >= 0.0 && (std::isfinite(v) || measure_ == Measure::hopping);
            if (!ok) {
                throw Error(ErrorKind::validation, "distance matrix entry (" +
                                                       std::to_string(i) + "," +
                                                       std::to_string(j) + ") is invalid");
            }
            if (!directed_ && std::abs(v - values_[j * n_ + i]) > 1e-9) {
                throw Error(ErrorKind::validation,
                            "undirected distance matrix is not symmetric at (" +
                                std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
    }
}

AttackLog AttackLog::create(std::vector<AttackRecord> records, std::size_t n_classes,
                            std::map<std::string, std::string> metadata) {
    if (n_classes == 0) {
        throw Error(ErrorKind::validation, "attack log needs a positive class count");
    }
    std::set<std::pair<PointId, double>> seen;
    for (std::size_t r = 0; r < records.size(); ++r) {
        const AttackRecord& rec = records[r];
        if (!std::isfinite(rec.epsilon) || rec.epsilon < 0.0) {
            throw Error(ErrorKind::validation,
                        "record " + std::to_string(r) + " has invalid epsilon");
        }
        if (rec.actual >= n_classes || rec.adversarial >= n_classes) {
            throw Error(ErrorKind::validation, "record " + std::to_string(r) +
                                                   " has a class index >= " +
                                                   std::to_string(n_classes));
        }
        if (!seen.emplace(rec.id, rec.epsilon).second) {
            throw Error(ErrorKind::validation, "record " + std::to_string(r) +
                                                   " repeats (id, epsilon) = (" +
                                                   std::to_string(rec.id) + ", " +
                                                   std::to_string(rec.epsilon) + ")");
        }
    }
    AttackLog log;
    log.records_ = std::move(records);
    log.n_classes_ = n_classes;
    log.metadata_ = std::move(metadata);
    return log;
}

std::size_t AttackLog::misclassified_count() const {
    return static_cast<std::size_t>(std::count_if(
        records_.begin(), records_.end(), [](const AttackRecord& r) { return r.misclassified(); }));
}

std::vector<double> AttackLog::epsilons() const {
    std::vector<double> eps;
    eps.reserve(records_.size());
    for (const auto& r : records_) eps.push_back(r.epsilon);
    std::sort(eps.begin(), eps.end());
    eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
    return eps;
}

}  // namespace advgeo
