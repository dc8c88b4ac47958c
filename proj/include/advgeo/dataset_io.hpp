#pragma once

// Readers and writers for the dataset (CSV and binary) and attack log formats.
//
// Dataset CSV:   optional "# n_classes=K" line, header "id,label,f0,...,f{N-1}".
// Dataset bin:   "ADVG" 0x01, u32 n_points, u32 n_dims, u32 n_classes, then per
//                point u64 id, u32 label, n_dims x f64; all little-endian.
// Attack log:    optional "# key=value" metadata lines, header
//                "id,epsilon,actual,adversarial".
//
// Parse failures throw Error(parse) naming the offending row (1-based line).

#include <cstddef>
#include <optional>
#include <string>

#include "advgeo/types.hpp"

namespace advgeo {

enum class DatasetFormat { csv, binary };

// ".bin" selects binary, anything else CSV.
DatasetFormat format_from_path(const std::string& path);

LabeledDataset load_dataset(const std::string& path, DatasetFormat format);
void save_dataset(const LabeledDataset& dataset, const std::string& path, DatasetFormat format);

// n_classes precedence: argument, then a "# n_classes=" line, then 1 + the
// largest class index seen (at least 1).
AttackLog load_attack_log(const std::string& path,
                          std::optional<std::size_t> n_classes = std::nullopt);
void save_attack_log(const AttackLog& log, const std::string& path);

}  // namespace advgeo
