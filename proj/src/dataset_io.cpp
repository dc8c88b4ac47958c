#include "advgeo/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <iterator>

#include "text.hpp"

namespace advgeo {
namespace {

constexpr std::array<char, 4> kMagic{'A', 'D', 'V', 'G'};
constexpr std::uint8_t kBinaryVersion = 0x01;

template <typename T>
void put_le(std::string& buf, T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    U bits = std::bit_cast<U>(value);
    for (std::size_t b = 0; b < sizeof(U); ++b) {
        buf.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
    }
}

class ByteReader {
public:
    ByteReader(const std::string& path, std::string bytes)
        : path_(path), bytes_(std::move(bytes)) {}

    template <typename T>
    T get(const char* what) {
        using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
        if (pos_ + sizeof(U) > bytes_.size()) {
            throw Error(ErrorKind::parse, path_ + ": truncated while reading " + what);
        }
        U bits = 0;
        for (std::size_t b = 0; b < sizeof(U); ++b) {
            bits |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
        }
        pos_ += sizeof(U);
        return std::bit_cast<T>(bits);
    }

    std::string_view take(std::size_t n, const char* what) {
        if (pos_ + n > bytes_.size()) {
            throw Error(ErrorKind::parse, path_ + ": truncated while reading " + what);
        }
        std::string_view out(bytes_.data() + pos_, n);
        pos_ += n;
        return out;
    }

    bool at_end() const { return pos_ == bytes_.size(); }

private:
    std::string path_;
    std::string bytes_;
    std::size_t pos_ = 0;
};

LabeledDataset load_dataset_csv(const std::string& path) {
    auto in = text::open_input(path);
    std::optional<std::size_t> n_classes;
    std::vector<PointId> ids;
    std::vector<ClassId> labels;
    std::vector<double> features;
    std::size_t n_dims = 0;
    bool have_header = false;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = text::trim(line);
        if (view.empty()) continue;
        if (view.front() == '#') {
            auto kv = text::parse_directive(view);
            if (kv && kv->first == "n_classes") {
                auto v = text::parse_uint<std::size_t>(kv->second);
                if (!v || *v == 0) text::parse_fail(path, line_no, "invalid n_classes");
                n_classes = *v;
            }
            continue;
        }
        const auto cells = text::split(view);
        if (!have_header) {
            if (cells.size() < 3 || text::trim(cells[0]) != "id" ||
                text::trim(cells[1]) != "label") {
                text::parse_fail(path, line_no, "expected header 'id,label,f0,...'");
            }
            for (std::size_t k = 2; k < cells.size(); ++k) {
                if (text::trim(cells[k]) != "f" + std::to_string(k - 2)) {
                    text::parse_fail(path, line_no,
                                     "header column " + std::to_string(k) + " should be f" +
                                         std::to_string(k - 2));
                }
            }
            n_dims = cells.size() - 2;
            have_header = true;
            continue;
        }
        if (cells.size() != n_dims + 2) {
            text::parse_fail(path, line_no,
                             "expected " + std::to_string(n_dims) + " features, found " +
                                 std::to_string(cells.size() < 2 ? 0 : cells.size() - 2));
        }
        auto id = text::parse_uint<PointId>(cells[0]);
        auto label = text::parse_uint<ClassId>(cells[1]);
        if (!id) text::parse_fail(path, line_no, "malformed id");
        if (!label) text::parse_fail(path, line_no, "malformed label");
        ids.push_back(*id);
        labels.push_back(*label);
        for (std::size_t k = 0; k < n_dims; ++k) {
            auto v = text::parse_double(cells[k + 2]);
            if (!v) text::parse_fail(path, line_no, "malformed feature f" + std::to_string(k));
            if (!std::isfinite(*v)) {
                text::parse_fail(path, line_no, "non-finite feature f" + std::to_string(k));
            }
            features.push_back(*v);
        }
    }
    if (!have_header) throw Error(ErrorKind::parse, path + ": missing header");
    if (ids.empty()) throw Error(ErrorKind::validation, path + ": dataset has no points");
    try {
        return LabeledDataset::create(std::move(ids), std::move(labels), std::move(features),
                                      n_dims, n_classes);
    } catch (const Error& e) {
        throw Error(e.kind(), path + ": " + e.what());
    }
}

void save_dataset_csv(const LabeledDataset& ds, const std::string& path) {
    std::string out;
    out += "# n_classes=" + std::to_string(ds.n_classes()) + "\n";
    out += "id,label";
    for (std::size_t k = 0; k < ds.n_dims(); ++k) out += ",f" + std::to_string(k);
    out += '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out += std::to_string(ds.id(i));
        out += ',';
        out += std::to_string(ds.label(i));
        for (double v : ds.features(i)) {
            out += ',';
            out += text::format_double(v);
        }
        out += '\n';
    }
    auto file = text::open_output(path);
    file << out;
    if (!file) throw Error(ErrorKind::io, "failed writing '" + path + "'");
}

LabeledDataset load_dataset_binary(const std::string& path) {
    auto in = text::open_input(path, true);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ByteReader reader(path, std::move(bytes));

    const auto magic = reader.take(4, "magic");
    if (std::memcmp(magic.data(), kMagic.data(), 4) != 0) {
        throw Error(ErrorKind::parse, path + ": bad magic (expected ADVG)");
    }
    const auto version = reader.take(1, "version");
    if (static_cast<std::uint8_t>(version[0]) != kBinaryVersion) {
        throw Error(ErrorKind::parse, path + ": unsupported version " +
                                          std::to_string(static_cast<unsigned char>(version[0])));
    }
    const auto n_points = reader.get<std::uint32_t>("n_points");
    const auto n_dims = reader.get<std::uint32_t>("n_dims");
    const auto n_classes = reader.get<std::uint32_t>("n_classes");

    std::vector<PointId> ids(n_points);
    std::vector<ClassId> labels(n_points);
    std::vector<double> features(static_cast<std::size_t>(n_points) * n_dims);
    for (std::size_t i = 0; i < n_points; ++i) {
        ids[i] = reader.get<std::uint64_t>("point id");
        labels[i] = reader.get<std::uint32_t>("label");
        for (std::size_t k = 0; k < n_dims; ++k) {
            const double v = reader.get<double>("feature");
            if (!std::isfinite(v)) {
                throw Error(ErrorKind::parse, path + ": row " + std::to_string(i + 1) +
                                                  ": non-finite feature f" + std::to_string(k));
            }
            features[i * n_dims + k] = v;
        }
    }
    if (!reader.at_end()) throw Error(ErrorKind::parse, path + ": trailing bytes after points");
    try {
        return LabeledDataset::create(std::move(ids), std::move(labels), std::move(features),
                                      n_dims, n_classes);
    } catch (const Error& e) {
        throw Error(e.kind(), path + ": " + e.what());
    }
}

void save_dataset_binary(const LabeledDataset& ds, const std::string& path) {
    std::string buf(kMagic.begin(), kMagic.end());
    buf.push_back(static_cast<char>(kBinaryVersion));
    put_le(buf, static_cast<std::uint32_t>(ds.size()));
    put_le(buf, static_cast<std::uint32_t>(ds.n_dims()));
    put_le(buf, static_cast<std::uint32_t>(ds.n_classes()));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        put_le(buf, static_cast<std::uint64_t>(ds.id(i)));
        put_le(buf, static_cast<std::uint32_t>(ds.label(i)));
        for (double v : ds.features(i)) put_le(buf, v);
    }
    auto file = text::open_output(path, true);
    file.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!file) throw Error(ErrorKind::io, "failed writing '" + path + "'");
}

}  // namespace

DatasetFormat format_from_path(const std::string& path) {
    return path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0
               ? DatasetFormat::binary
               : DatasetFormat::csv;
}

LabeledDataset load_dataset(const std::string& path, DatasetFormat format) {
    return format == DatasetFormat::binary ? load_dataset_binary(path) : load_dataset_csv(path);
}

void save_dataset(const LabeledDataset& dataset, const std::string& path, DatasetFormat format) {
    if (format == DatasetFormat::binary) {
        save_dataset_binary(dataset, path);
    } else {
        save_dataset_csv(dataset, path);
    }
}

AttackLog load_attack_log(const std::string& path, std::optional<std::size_t> n_classes) {
    auto in = text::open_input(path);
    std::map<std::string, std::string> metadata;
    std::vector<AttackRecord> records;
    bool have_header = false;
    std::size_t max_class = 0;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = text::trim(line);
        if (view.empty()) continue;
        if (view.front() == '#') {
            if (auto kv = text::parse_directive(view)) metadata[kv->first] = kv->second;
            continue;
        }
        const auto cells = text::split(view);
        if (!have_header) {
            const bool ok = cells.size() == 4 && text::trim(cells[0]) == "id" &&
                            text::trim(cells[1]) == "epsilon" &&
                            text::trim(cells[2]) == "actual" &&
                            text::trim(cells[3]) == "adversarial";
            if (!ok) text::parse_fail(path, line_no, "expected header 'id,epsilon,actual,adversarial'");
            have_header = true;
            continue;
        }
        if (cells.size() != 4) text::parse_fail(path, line_no, "expected 4 columns");
        auto id = text::parse_uint<PointId>(cells[0]);
        auto eps = text::parse_double(cells[1]);
        auto actual = text::parse_uint<ClassId>(cells[2]);
        auto adversarial = text::parse_uint<ClassId>(cells[3]);
        if (!id) text::parse_fail(path, line_no, "malformed id");
        if (!eps) text::parse_fail(path, line_no, "malformed epsilon");
        if (!std::isfinite(*eps) || *eps < 0.0) {
            text::parse_fail(path, line_no, "epsilon must be finite and >= 0");
        }
        if (!actual) text::parse_fail(path, line_no, "malformed actual class");
        if (!adversarial) text::parse_fail(path, line_no, "malformed adversarial class");
        if (n_classes && (*actual >= *n_classes || *adversarial >= *n_classes)) {
            text::parse_fail(path, line_no,
                             "class index >= n_classes (" + std::to_string(*n_classes) + ")");
        }
        max_class = std::max<std::size_t>({max_class, *actual, *adversarial});
        records.push_back({*id, *eps, *actual, *adversarial});
    }
    if (!have_header) throw Error(ErrorKind::parse, path + ": missing header");

    std::size_t classes = max_class + 1;
    if (n_classes) {
        classes = *n_classes;
    } else if (auto it = metadata.find("n_classes"); it != metadata.end()) {
        auto v = text::parse_uint<std::size_t>(it->second);
        if (!v || *v == 0) throw Error(ErrorKind::parse, path + ": invalid n_classes directive");
        classes = *v;
    }
    metadata.erase("n_classes");
    try {
        return AttackLog::create(std::move(records), classes, std::move(metadata));
    } catch (const Error& e) {
        throw Error(e.kind(), path + ": " + e.what());
    }
}

void save_attack_log(const AttackLog& log, const std::string& path) {
    std::string out;
    out += "# n_classes=" + std::to_string(log.n_classes()) + "\n";
    for (const auto& [key, value] : log.metadata()) out += "# " + key + "=" + value + "\n";
    out += "id,epsilon,actual,adversarial\n";
    for (const auto& r : log.records()) {
        out += std::to_string(r.id);
        out += ',';
        out += text::format_double(r.epsilon);
        out += ',';
        out += std::to_string(r.actual);
        out += ',';
        out += std::to_string(r.adversarial);
        out += '\n';
    }
    auto file = text::open_output(path);
    file << out;
    if (!file) throw Error(ErrorKind::io, "failed writing '" + path + "'");
}

}  // namespace advgeo
