#include "advgeo/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "advgeo/centroid.hpp"
#include "advgeo/simd/kernels.hpp"
#include "text.hpp"

namespace advgeo {
namespace {

constexpr int kMaxBisectionSteps = 200;
constexpr double kEntropyTolerance = 1e-12;  // nats; stop criterion
constexpr double kEntropyAcceptBits = 1e-5;  // failure threshold

// Bandwidth search for one row. `dist` holds squared distances with the self
// entry already excluded. Writes normalized conditionals into `out`.
// Returns beta = 1 / (2 sigma²), or nullopt if the target is not reached.
std::optional<double> calibrate_row(std::span<const double> dist, double log_perplexity,
                                    std::span<double> out) {
    const double d_min = *std::min_element(dist.begin(), dist.end());
    double beta = 1.0;
    double beta_lo = 0.0;
    double beta_hi = std::numeric_limits<double>::infinity();
    double entropy = 0.0;
    for (int step = 0; step < kMaxBisectionSteps; ++step) {
        // Shifting by the smallest distance keeps the largest weight at 1.
        double sum = 0.0;
        double weighted = 0.0;
        for (std::size_t j = 0; j < dist.size(); ++j) {
            const double shifted = dist[j] - d_min;
            out[j] = std::exp(-beta * shifted);
            sum += out[j];
            weighted += out[j] * shifted;
        }
        entropy = std::log(sum) + beta * weighted / sum;
        const double diff = entropy - log_perplexity;
        if (std::abs(diff) < kEntropyTolerance) break;
        if (diff > 0.0) {
            beta_lo = beta;
            beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta + beta_hi);
        } else {
            beta_hi = beta;
            beta = 0.5 * (beta + beta_lo);
        }
    }
    double sum = 0.0;
    for (double v : out) sum += v;
    for (double& v : out) v /= sum;
    if (std::abs(entropy - log_perplexity) / std::log(2.0) > kEntropyAcceptBits) {
        return std::nullopt;
    }
    return beta;
}

// Structure-of-arrays view of the embedding plus the Student-t kernel matrix
// evaluated at those coordinates.
struct KernelState {
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<double> w;  // m x m
    double z = 0.0;
};

void evaluate_kernel(KernelState& s, const simd::KernelTable& kernels) {
    const std::size_t m = s.xs.size();
    s.w.resize(m * m);
    double z = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        z += kernels.student_t_row(s.xs.data(), s.ys.data(), m, i, s.w.data() + i * m);
    }
    s.z = z;
}

// KL(P || Q) = Σ p log p - Σ p log w + (Σ p) log Z.
double kl_from_kernel(const AffinityMatrix& a, double sum_plogp, double sum_p,
                      const KernelState& s) {
    double cross = 0.0;
    const std::size_t mm = a.m * a.m;
    for (std::size_t e = 0; e < mm; ++e) {
        if (a.p[e] > 0.0) cross += a.p[e] * std::log(s.w[e]);
    }
    return sum_plogp - cross + sum_p * std::log(s.z);
}

void gradient_from_kernel(const AffinityMatrix& a, const KernelState& s, double exaggeration,
                          const simd::KernelTable& kernels, std::vector<double>& gx,
                          std::vector<double>& gy) {
    const std::size_t m = a.m;
    const double inv_z = 1.0 / s.z;
    for (std::size_t i = 0; i < m; ++i) {
        double fx = 0.0;
        double fy = 0.0;
        kernels.tsne_force_row(s.xs.data(), s.ys.data(), m, i, a.p.data() + i * m,
                               s.w.data() + i * m, exaggeration, inv_z, &fx, &fy);
        gx[i] = 4.0 * fx;
        gy[i] = 4.0 * fy;
    }
}

KernelState state_from_coords(std::span<const double> coords, std::size_t m) {
    if (coords.size() != 2 * m) {
        throw Error(ErrorKind::invalid_argument, "coordinates must hold 2 values per point");
    }
    KernelState s;
    s.xs.resize(m);
    s.ys.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        s.xs[i] = coords[2 * i];
        s.ys[i] = coords[2 * i + 1];
    }
    return s;
}

void plogp_sums(const AffinityMatrix& a, double& sum_plogp, double& sum_p) {
    sum_plogp = 0.0;
    sum_p = 0.0;
    for (double v : a.p) {
        sum_p += v;
        if (v > 0.0) sum_plogp += v * std::log(v);
    }
}

void recenter(KernelState& s) {
    const std::size_t m = s.xs.size();
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += s.xs[i];
        my += s.ys[i];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
        s.xs[i] -= mx;
        s.ys[i] -= my;
    }
}

bool all_finite(const KernelState& s) {
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
        if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) return false;
    }
    return std::isfinite(s.z);
}

}  // namespace

AffinityMatrix conditional_affinities(std::span<const double> features, std::size_t n_dims,
                                      std::span<const PointId> ids, double perplexity) {
    const std::size_t m = ids.size();
    if (n_dims == 0 || features.size() != m * n_dims) {
        throw Error(ErrorKind::invalid_argument, "feature buffer does not match ids x n_dims");
    }
    if (m < 3) throw Error(ErrorKind::invalid_argument, "t-SNE needs at least 3 points");
    if (!(perplexity > 0.0) || !(perplexity < static_cast<double>(m))) {
        throw Error(ErrorKind::invalid_argument,
                    "perplexity must lie in (0, " + std::to_string(m) + ")");
    }
    const auto& kernels = simd::active_kernels();
    AffinityMatrix a;
    a.m = m;
    a.perplexity = perplexity;
    a.conditional.assign(m * m, 0.0);
    a.sigmas.resize(m);

    const double log_perplexity = std::log(perplexity);
    std::vector<double> row(m);
    std::vector<double> others(m - 1);
    std::vector<double> cond(m - 1);
    for (std::size_t i = 0; i < m; ++i) {
        kernels.squared_l2_rows(features.data() + i * n_dims, features.data(), m, n_dims,
                                row.data());
        std::size_t o = 0;
        for (std::size_t j = 0; j < m; ++j) {
            if (j != i) others[o++] = row[j];
        }
        const auto beta = calibrate_row(others, log_perplexity, cond);
        if (!beta) {
            throw Error(ErrorKind::numerical,
                        "perplexity calibration did not converge for point id " +
                            std::to_string(ids[i]));
        }
        a.sigmas[i] = std::sqrt(1.0 / (2.0 * *beta));
        o = 0;
        for (std::size_t j = 0; j < m; ++j) {
            if (j != i) a.conditional[i * m + j] = cond[o++];
        }
    }

    a.p.assign(m * m, 0.0);
    const double denom = 2.0 * static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double v = (a.conditional[i * m + j] + a.conditional[j * m + i]) / denom;
            a.p[i * m + j] = v;
            a.p[j * m + i] = v;
        }
    }
    return a;
}

AffinityMatrix conditional_affinities(const LabeledDataset& dataset, double perplexity) {
    return conditional_affinities(dataset.all_features(), dataset.n_dims(), dataset.ids(),
                                  perplexity);
}

double kl_divergence(const AffinityMatrix& affinities, std::span<const double> coords) {
    KernelState s = state_from_coords(coords, affinities.m);
    evaluate_kernel(s, simd::active_kernels());
    double sum_plogp = 0.0;
    double sum_p = 0.0;
    plogp_sums(affinities, sum_plogp, sum_p);
    return kl_from_kernel(affinities, sum_plogp, sum_p, s);
}

std::vector<double> kl_gradient(const AffinityMatrix& affinities, std::span<const double> coords,
                                double exaggeration) {
    const auto& kernels = simd::active_kernels();
    KernelState s = state_from_coords(coords, affinities.m);
    evaluate_kernel(s, kernels);
    std::vector<double> gx(affinities.m);
    std::vector<double> gy(affinities.m);
    gradient_from_kernel(affinities, s, exaggeration, kernels, gx, gy);
    std::vector<double> out(2 * affinities.m);
    for (std::size_t i = 0; i < affinities.m; ++i) {
        out[2 * i] = gx[i];
        out[2 * i + 1] = gy[i];
    }
    return out;
}

Embedding2D tsne_embed(const LabeledDataset& dataset, const TsneParams& params) {
    if (!(params.learning_rate > 0.0) || !(params.early_exaggeration > 0.0) ||
        !(params.init_stddev > 0.0) || params.max_iters == 0) {
        throw Error(ErrorKind::invalid_argument,
                    "t-SNE learning rate, exaggeration, init spread and iterations must be positive");
    }
    const auto& kernels = simd::active_kernels();
    const AffinityMatrix a = conditional_affinities(dataset, params.perplexity);
    const std::size_t m = a.m;
    double sum_plogp = 0.0;
    double sum_p = 0.0;
    plogp_sums(a, sum_plogp, sum_p);

    KernelState cur;
    cur.xs.resize(m);
    cur.ys.resize(m);
    {
        std::mt19937_64 rng(params.seed);
        std::normal_distribution<double> init(0.0, params.init_stddev);
        for (std::size_t i = 0; i < m; ++i) {
            cur.xs[i] = init(rng);
            cur.ys[i] = init(rng);
        }
    }
    evaluate_kernel(cur, kernels);
    double kl_cur = kl_from_kernel(a, sum_plogp, sum_p, cur);

    std::vector<double> gx(m), gy(m);
    std::vector<double> vx(m, 0.0), vy(m, 0.0);
    std::vector<double> gain_x(m, 1.0), gain_y(m, 1.0);
    KernelState cand;

    Embedding2D out;
    out.kl_trace.reserve(params.max_iters);
    for (std::size_t it = 0; it < params.max_iters; ++it) {
        const bool exaggerating = it < params.exaggeration_iters;
        const double exaggeration = exaggerating ? params.early_exaggeration : 1.0;
        const double momentum =
            it < params.momentum_switch_iter ? params.initial_momentum : params.final_momentum;

        gradient_from_kernel(a, cur, exaggeration, kernels, gx, gy);
        for (std::size_t i = 0; i < m; ++i) {
            gain_x[i] = (gx[i] > 0.0) != (vx[i] > 0.0) ? gain_x[i] + 0.2 : gain_x[i] * 0.8;
            gain_y[i] = (gy[i] > 0.0) != (vy[i] > 0.0) ? gain_y[i] + 0.2 : gain_y[i] * 0.8;
            gain_x[i] = std::max(gain_x[i], 0.01);
            gain_y[i] = std::max(gain_y[i], 0.01);
            vx[i] = momentum * vx[i] - params.learning_rate * gain_x[i] * gx[i];
            vy[i] = momentum * vy[i] - params.learning_rate * gain_y[i] * gy[i];
        }

        cand.xs.resize(m);
        cand.ys.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            cand.xs[i] = cur.xs[i] + vx[i];
            cand.ys[i] = cur.ys[i] + vy[i];
        }
        recenter(cand);
        evaluate_kernel(cand, kernels);
        double kl_cand = kl_from_kernel(a, sum_plogp, sum_p, cand);

        if (!exaggerating && !(kl_cand <= kl_cur)) {
            // Drop momentum and gains and backtrack along the gradient.
            std::fill(vx.begin(), vx.end(), 0.0);
            std::fill(vy.begin(), vy.end(), 0.0);
            std::fill(gain_x.begin(), gain_x.end(), 1.0);
            std::fill(gain_y.begin(), gain_y.end(), 1.0);
            bool accepted = false;
            double step = params.learning_rate;
            for (int halving = 0; halving < 40 && !accepted; ++halving, step *= 0.5) {
                for (std::size_t i = 0; i < m; ++i) {
                    cand.xs[i] = cur.xs[i] - step * gx[i];
                    cand.ys[i] = cur.ys[i] - step * gy[i];
                }
                recenter(cand);
                evaluate_kernel(cand, kernels);
                kl_cand = kl_from_kernel(a, sum_plogp, sum_p, cand);
                accepted = kl_cand <= kl_cur;
            }
            if (!accepted) {
                out.kl_trace.push_back(kl_cur);
                continue;
            }
        }
        if (!all_finite(cand) || !std::isfinite(kl_cand)) {
            throw Error(ErrorKind::numerical,
                        "t-SNE diverged at iteration " + std::to_string(it));
        }
        std::swap(cur, cand);
        kl_cur = kl_cand;
        out.kl_trace.push_back(kl_cur);
    }

    out.ids.assign(dataset.ids().begin(), dataset.ids().end());
    out.labels.assign(dataset.labels().begin(), dataset.labels().end());
    out.n_classes = dataset.n_classes();
    out.coords.resize(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
        out.coords[2 * i] = cur.xs[i];
        out.coords[2 * i + 1] = cur.ys[i];
    }
    out.params = params;
    return out;
}

DistanceMatrix tsne_distance_matrix(const Embedding2D& embedding) {
    const ClassCentroids c =
        class_centroids(embedding.coords, embedding.labels, 2, embedding.n_classes);
    return euclidean_distance_matrix(c, Measure::tsne);
}

Embedding2D load_embedding(const std::string& path) {
    auto in = text::open_input(path);
    Embedding2D emb;
    std::optional<std::size_t> n_classes;
    bool have_header = false;
    std::size_t max_label = 0;
    std::map<PointId, std::size_t> seen;
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
            const bool ok = cells.size() == 4 && text::trim(cells[0]) == "id" &&
                            text::trim(cells[1]) == "label" && text::trim(cells[2]) == "y0" &&
                            text::trim(cells[3]) == "y1";
            if (!ok) {
                text::parse_fail(path, line_no,
                                 "expected header 'id,label,y0,y1' (embeddings are 2-D)");
            }
            have_header = true;
            continue;
        }
        if (cells.size() != 4) text::parse_fail(path, line_no, "expected 2 coordinates");
        auto id = text::parse_uint<PointId>(cells[0]);
        auto label = text::parse_uint<ClassId>(cells[1]);
        auto y0 = text::parse_double(cells[2]);
        auto y1 = text::parse_double(cells[3]);
        if (!id || !label || !y0 || !y1) text::parse_fail(path, line_no, "malformed row");
        if (!std::isfinite(*y0) || !std::isfinite(*y1)) {
            text::parse_fail(path, line_no, "non-finite coordinate");
        }
        if (!seen.emplace(*id, emb.ids.size()).second) {
            text::parse_fail(path, line_no, "duplicate id " + std::to_string(*id));
        }
        emb.ids.push_back(*id);
        emb.labels.push_back(*label);
        emb.coords.push_back(*y0);
        emb.coords.push_back(*y1);
        max_label = std::max<std::size_t>(max_label, *label);
    }
    if (!have_header) throw Error(ErrorKind::parse, path + ": missing header");
    if (emb.ids.empty()) throw Error(ErrorKind::validation, path + ": embedding has no points");
    emb.n_classes = n_classes.value_or(max_label + 1);
    if (max_label >= emb.n_classes) {
        throw Error(ErrorKind::validation, path + ": label out of range");
    }
    std::vector<std::size_t> counts(emb.n_classes, 0);
    for (ClassId l : emb.labels) ++counts[l];
    for (std::size_t c = 0; c < emb.n_classes; ++c) {
        if (counts[c] == 0) {
            throw Error(ErrorKind::validation, path + ": class " + std::to_string(c) + " is empty");
        }
    }
    emb.params = TsneParams{};
    return emb;
}

void save_embedding(const Embedding2D& embedding, const std::string& path) {
    std::string out = "# n_classes=" + std::to_string(embedding.n_classes) + "\nid,label,y0,y1\n";
    for (std::size_t i = 0; i < embedding.size(); ++i) {
        out += std::to_string(embedding.ids[i]) + "," + std::to_string(embedding.labels[i]) + "," +
               text::format_double(embedding.coords[2 * i]) + "," +
               text::format_double(embedding.coords[2 * i + 1]) + "\n";
    }
    auto file = text::open_output(path);
    file << out;
    if (!file) throw Error(ErrorKind::io, "failed writing '" + path + "'");
}

void check_embedding_matches(const Embedding2D& embedding, const LabeledDataset& dataset) {
    if (embedding.size() != dataset.size()) {
        throw Error(ErrorKind::validation,
                    "embedding has " + std::to_string(embedding.size()) +
                        " points but the dataset has " + std::to_string(dataset.size()));
    }
    if (embedding.n_classes != dataset.n_classes()) {
        throw Error(ErrorKind::validation, "embedding and dataset disagree on class count");
    }
    for (std::size_t i = 0; i < embedding.size(); ++i) {
        const auto idx = dataset.index_of(embedding.ids[i]);
        if (!idx) {
            throw Error(ErrorKind::validation,
                        "embedding id " + std::to_string(embedding.ids[i]) + " is not in the dataset");
        }
        if (dataset.label(*idx) != embedding.labels[i]) {
            throw Error(ErrorKind::validation, "embedding id " + std::to_string(embedding.ids[i]) +
                                                   " has a different label than the dataset");
        }
    }
}

}  // namespace advgeo
