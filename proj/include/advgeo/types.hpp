#pragma once

// Shared domain types. All of them validate on construction and are immutable
// afterwards, so they can be shared freely across threads.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace advgeo {

enum class ErrorKind {
    invalid_argument,  // caller passed something outside an operation's domain
    parse,             // malformed file content
    validation,        // well-formed input violating a type invariant
    numerical,         // non-convergence or overflow
    io,                // unreadable or unwritable file
    undefined,         // the requested statistic has no value (e.g. zero records)
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

enum class Measure { tsne, euclidean, euclidean_cosine, hopping };

std::string_view to_string(Measure m);
Measure measure_from_string(std::string_view name);

using ClassId = std::uint32_t;
using PointId = std::uint64_t;

struct DataPoint {
    PointId id;
    ClassId label;
    std::span<const double> features;
};

class LabeledDataset {
public:
    // `features` is row-major, ids.size() × n_dims. n_classes defaults to
    // 1 + max label. Throws Error(validation) on any invariant violation.
    static LabeledDataset create(std::vector<PointId> ids, std::vector<ClassId> labels,
                                 std::vector<double> features, std::size_t n_dims,
                                 std::optional<std::size_t> n_classes = std::nullopt);

    std::size_t size() const noexcept { return ids_.size(); }
    std::size_t n_dims() const noexcept { return n_dims_; }
    std::size_t n_classes() const noexcept { return class_index_.size(); }

    PointId id(std::size_t i) const { return ids_[i]; }
    ClassId label(std::size_t i) const { return labels_[i]; }
    std::span<const double> features(std::size_t i) const {
        return {features_.data() + i * n_dims_, n_dims_};
    }
    DataPoint point(std::size_t i) const { return {ids_[i], labels_[i], features(i)}; }

    std::span<const PointId> ids() const noexcept { return ids_; }
    std::span<const ClassId> labels() const noexcept { return labels_; }
    std::span<const double> all_features() const noexcept { return features_; }

    // Point indices (not ids) belonging to class c, ascending.
    std::span<const std::size_t> class_members(ClassId c) const { return class_index_.at(c); }

    std::optional<std::size_t> index_of(PointId id) const;

    friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

private:
    LabeledDataset() = default;

    std::vector<PointId> ids_;
    std::vector<ClassId> labels_;
    std::vector<double> features_;
    std::size_t n_dims_ = 0;
    std::vector<std::vector<std::size_t>> class_index_;
    std::map<PointId, std::size_t> id_lookup_;
};

// Per-entry side information that some measures carry alongside the matrix.
struct DistanceMetadata {
    // euclidean_cosine: Euclidean × signed cosine, before taking |cos|.
    std::vector<double> signed_values;
    // hopping: number of source points of class k that could not reach class l
    // and were left out of the mean for entry (k, l).
    std::vector<std::size_t> unreachable_sources;
};

class DistanceMatrix {
public:
    // Throws Error(validation) unless the diagonal is exactly zero, entries are
    // non-negative (+inf allowed only for hopping) and, when undirected, the
    // matrix is symmetric to within 1e-9.
    DistanceMatrix(Measure measure, std::size_t n, std::vector<double> values, bool directed,
                   DistanceMetadata metadata = {});

    Measure measure() const noexcept { return measure_; }
    std::size_t size() const noexcept { return n_; }
    bool directed() const noexcept { return directed_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
    std::span<const double> values() const noexcept { return values_; }
    const DistanceMetadata& metadata() const noexcept { return metadata_; }

private:
    Measure measure_;
    std::size_t n_;
    std::vector<double> values_;
    bool directed_;
    DistanceMetadata metadata_;
};

struct AttackRecord {
    PointId id = 0;
    double epsilon = 0.0;
    ClassId actual = 0;
    ClassId adversarial = 0;

    bool misclassified() const noexcept { return actual != adversarial; }

    friend bool operator==(const AttackRecord&, const AttackRecord&) = default;
};

class AttackLog {
public:
    // Throws Error(validation) for class indices >= n_classes, negative or
    // non-finite epsilon, or a repeated (id, epsilon) pair.
    static AttackLog create(std::vector<AttackRecord> records, std::size_t n_classes,
                            std::map<std::string, std::string> metadata = {});

    std::span<const AttackRecord> records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    std::size_t n_classes() const noexcept { return n_classes_; }
    const std::map<std::string, std::string>& metadata() const noexcept { return metadata_; }

    std::size_t misclassified_count() const;
    // Distinct epsilon values, ascending.
    std::vector<double> epsilons() const;

    friend bool operator==(const AttackLog&, const AttackLog&) = default;

private:
    AttackLog() = default;

    std::vector<AttackRecord> records_;
    std::size_t n_classes_ = 0;
    std::map<std::string, std::string> metadata_;
};

}  // namespace advgeo
