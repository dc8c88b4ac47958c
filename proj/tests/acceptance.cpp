// Acceptance run: one PASS/FAIL line per criterion; nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "advgeo/adversarial_map.hpp"
#include "advgeo/centroid.hpp"
#include "advgeo/knn_hopping.hpp"
#include "advgeo/report.hpp"
#include "advgeo/susceptibility.hpp"
#include "advgeo/synth.hpp"
#include "advgeo/transition.hpp"
#include "advgeo/tsne.hpp"

using namespace advgeo;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double time_limit_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (time_limit_s > 0 && secs >= time_limit_s) {
        o.pass = false;
        o.detail += " [over time limit " + std::to_string(time_limit_s) + " s]";
    }
    if (!o.pass) ++failures;
    std::printf("%s  %-28s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

LabeledDataset uniform_points(std::size_t m, std::size_t dims, std::size_t n_classes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<PointId> ids(m);
    std::vector<ClassId> labels(m);
    std::vector<double> f(m * dims);
    for (std::size_t i = 0; i < m; ++i) {
        ids[i] = 3 * i + 1;
        labels[i] = ClassId(i % n_classes);
    }
    for (auto& x : f) x = u(rng);
    return LabeledDataset::create(ids, labels, f, dims, n_classes);
}

// Ten classes on a line with gaps 1, 2, ..., 9, spread 0.5 in 8 dimensions.
LabeledDataset line_blobs(std::size_t per_class, std::uint64_t seed) {
    std::vector<double> gaps;
    for (int g = 1; g <= 9; ++g) gaps.push_back(g);
    return generate_blobs({per_class, 8, centers_on_line(gaps, 8), 0.5, seed});
}

std::vector<std::size_t> bfs(const std::vector<std::vector<std::size_t>>& adj, std::size_t s) {
    std::vector<std::size_t> dist(adj.size(), kUnreached);
    std::deque<std::size_t> q{s};
    dist[s] = 0;
    while (!q.empty()) {
        const auto u = q.front();
        q.pop_front();
        for (auto v : adj[u]) {
            if (dist[v] == kUnreached) {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    return dist;
}

double naive_kl(const AffinityMatrix& a, const std::vector<double>& y) {
    const std::size_t m = a.m;
    double z = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (i != j) z += 1.0 / (1.0 + std::pow(y[2 * i] - y[2 * j], 2) + std::pow(y[2 * i + 1] - y[2 * j + 1], 2));
    double kl = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double p = a.p[i * m + j];
            if (i == j || p <= 0) continue;
            const double q = 1.0 / (1.0 + std::pow(y[2 * i] - y[2 * j], 2) + std::pow(y[2 * i + 1] - y[2 * j + 1], 2)) / z;
            kl += p * std::log(p / q);
        }
    }
    return kl;
}

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        for (std::size_t t = i; t <= j; ++t) r[order[t]] = 0.5 * double(i + j);
        i = j + 1;
    }
    return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const auto ra = ranks(a), rb = ranks(b);
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / ra.size();
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / rb.size();
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

DistanceMatrix matrix3(std::vector<double> v) { return DistanceMatrix(Measure::hopping, 3, std::move(v), true); }

}  // namespace

int main() {
    criterion("hopping-oracle", 10.0, [] {
        std::mt19937_64 rng(2024);
        std::size_t pairs = 0;
        for (int g = 0; g < 100; ++g) {
            const std::size_t m = 10 + rng() % 41;
            const std::size_t k = 2 + rng() % 5;
            const auto ds = uniform_points(m, 2 + rng() % 4, 3, rng());
            const auto graph = build_knn_graph(ds, k);
            std::vector<std::vector<std::size_t>> adj(m);
            for (std::size_t i = 0; i < m; ++i) adj[i].assign(graph.neighbors(i).begin(), graph.neighbors(i).end());
            for (std::size_t s = 0; s < m; ++s) {
                const auto d = bfs(adj, s);
                for (std::size_t t = 0; t < m; ++t) {
                    const auto r = hop_distance_point(graph, ds.id(s), PointTarget{ds.id(t)});
                    const std::size_t got = r.hops.value_or(kUnreached);
                    if (got != d[t]) return Outcome{false, "graph " + std::to_string(g) + " pair mismatch"};
                    ++pairs;
                }
            }
        }
        return Outcome{true, "100 graphs, " + std::to_string(pairs) + " pairs exact"};
    });

    criterion("knn-oracle", 5.0, [] {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto ds = uniform_points(200, 4, 5, seed);
            const auto g = build_knn_graph(ds, 6);
            for (std::size_t i = 0; i < ds.size(); ++i) {
                std::vector<std::pair<double, std::size_t>> all;
                for (std::size_t j = 0; j < ds.size(); ++j) {
                    if (j == i) continue;
                    double s = 0;
                    for (std::size_t d = 0; d < 4; ++d) s += std::pow(ds.features(i)[d] - ds.features(j)[d], 2);
                    all.push_back({s, j});
                }
                std::sort(all.begin(), all.end(), [&](auto a, auto b) {
                    return a.first != b.first ? a.first < b.first : ds.id(a.second) < ds.id(b.second);
                });
                for (std::size_t r = 0; r < 5; ++r) {
                    if (g.neighbors(i)[r] != all[r].second) {
                        return Outcome{false, "seed " + std::to_string(seed) + " point " + std::to_string(i)};
                    }
                }
            }
        }
        return Outcome{true, "10 seeds x 200 points, k=6, exact"};
    });

    criterion("centroid-distances", 0, [] {
        double worst = 0;
        auto check = [&](double got, double want) { worst = std::max(worst, std::fabs(got - want)); };
        ClassCentroids c{4, 2, {1, 0, 0, 1, 3, 0, -2, 0}, {1, 1, 1, 1}};
        const auto e = euclidean_distance_matrix(c);
        const auto cs = cosine_scaled_distance_matrix(c);
        check(e(0, 1), std::sqrt(2.0));
        check(cs(0, 1), 0.0);                         // orthogonal centroids
        check(e(0, 2), 2.0);
        check(cs(0, 2), 2.0);                         // same direction
        check(e(0, 3), 3.0);
        check(cs(0, 3), 3.0);
        check(cs.metadata().signed_values[3], -3.0);  // opposite direction
        std::mt19937_64 rng(5);
        std::normal_distribution<double> n(0, 2);
        ClassCentroids r{3, 5, std::vector<double>(15), {1, 1, 1}};
        for (auto& v : r.centroids) v = n(rng);
        const auto re = euclidean_distance_matrix(r);
        const auto rc = cosine_scaled_distance_matrix(r);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                double sq = 0, dot = 0, ni = 0, nj = 0;
                for (std::size_t k = 0; k < 5; ++k) {
                    const double a = r.centroids[i * 5 + k], b = r.centroids[j * 5 + k];
                    sq += (b - a) * (b - a);
                    dot += a * b;
                    ni += a * a;
                    nj += b * b;
                }
                check(re(i, j), std::sqrt(sq));
                if (i != j) check(rc(i, j), std::sqrt(sq) * std::fabs(dot / std::sqrt(ni * nj)));
            }
        }
        return Outcome{worst <= 1e-12, fmt("max abs error %.3g (tol 1e-12)", worst)};
    });

    criterion("tsne", 60.0, [] {
        // gradient check on 6 points, 10 random iterates
        const auto small = uniform_points(6, 3, 2, 8);
        const auto a6 = conditional_affinities(small, 2.0);
        std::mt19937_64 rng(1);
        std::normal_distribution<double> n(0, 1);
        double worst_grad = 0;
        for (int t = 0; t < 10; ++t) {
            std::vector<double> y(12);
            for (auto& v : y) v = n(rng);
            const auto g = kl_gradient(a6, y);
            for (std::size_t k = 0; k < 12; ++k) {
                auto yp = y, ym = y;
                yp[k] += 1e-5;
                ym[k] -= 1e-5;
                const double fd = (naive_kl(a6, yp) - naive_kl(a6, ym)) / 2e-5;
                worst_grad = std::max(worst_grad, std::fabs(g[k] - fd) / std::max(std::fabs(fd), 1e-3));
            }
        }
        // m = 500 full run
        const auto ds = line_blobs(50, 3);
        TsneParams p;
        const auto aff = conditional_affinities(ds, p.perplexity);
        double worst_perp = 0;
        for (std::size_t i = 0; i < aff.m; ++i) {
            double h = 0;
            for (std::size_t j = 0; j < aff.m; ++j) {
                const double q = aff.conditional[i * aff.m + j];
                if (q > 0) h -= q * std::log2(q);
            }
            worst_perp = std::max(worst_perp, std::fabs(std::exp2(h) - p.perplexity));
        }
        const auto e = tsne_embed(ds, p);
        double worst_rise = 0;
        for (std::size_t it = 251; it < e.kl_trace.size(); ++it) {
            worst_rise = std::max(worst_rise, e.kl_trace[it] - e.kl_trace[it - 1]);
        }
        const bool ok = worst_grad <= 1e-4 && worst_perp <= 1e-4 && worst_rise <= 1e-6;
        return Outcome{ok, fmt("grad rel err %.2g (1e-4), perplexity err %.2g (1e-4), ", worst_grad, worst_perp) +
                               fmt("max KL rise after 250 %.2g (1e-6)", worst_rise)};
    });

    criterion("adversarial-map", 0, [] {
        const auto map = create_map(matrix3({0, 1, 5, 1, 0, 2, 5, 2, 0}),
                                    {2.0, Measure::hopping, ForbiddenDistance::Derivation::user_supplied});
        std::set<std::pair<int, int>> edges;
        for (const auto& e : map.edges()) edges.insert({int(e.source), int(e.target)});
        const bool fixture_ok = edges == std::set<std::pair<int, int>>{{0, 1}, {1, 0}, {1, 2}, {2, 1}};
        std::mt19937_64 rng(12);
        std::uniform_real_distribution<double> u(0.1, 20.0);
        int violations = 0;
        for (int t = 0; t < 50; ++t) {
            const std::size_t n = 2 + rng() % 9;
            std::vector<double> v(n * n, 0.0);
            for (std::size_t i = 0; i < n * n; ++i) if (i % (n + 1)) v[i] = u(rng);
            const DistanceMatrix d(Measure::hopping, n, v, true);
            double f1 = u(rng), f2 = u(rng);
            if (f1 > f2) std::swap(f1, f2);
            const auto lo = create_map(d, {f1, Measure::hopping, ForbiddenDistance::Derivation::user_supplied});
            const auto hi = create_map(d, {f2, Measure::hopping, ForbiddenDistance::Derivation::user_supplied});
            for (const auto& e : lo.edges()) violations += !hi.has_edge(e.source, e.target);
        }
        return Outcome{fixture_ok && violations == 0,
                       std::string(fixture_ok ? "fixture edges {0-1, 1-2}" : "fixture edges wrong") +
                           ", monotonicity violations " + std::to_string(violations) + " / 50 matrices"};
    });

    criterion("entropy-closed-form", 0, [] {
        const double target = std::log(9.0) / 9.0;
        double worst = 0;
        const auto uni = uniform_transition(10);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto ds = line_blobs(20, seed);
            const auto s = hopping_distance_matrix(build_knn_graph(ds, 6));
            const auto logs = {simulate_attack(ds, weighted_transition(s), {{0.5, 1.0}, {0.3, 0.8}, seed}),
                               simulate_attack(ds, uni, {{1.0}, {1.0}, seed + 100})};
            for (const auto& log : logs) worst = std::max(worst, std::fabs(model_entropy(log, uni).e_m - target));
        }
        return Outcome{worst <= 1e-12, fmt("e_M = ln9/9 = %.6f, max error %.2g (tol 1e-12)", target, worst)};
    });

    criterion("entropy-reduction", 30.0, [] {
        int wins = 0;
        double mean_w = 0, mean_u = 0, mean_nll_w = 0, mean_nll_u = 0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto ds = line_blobs(100, seed);
            const auto s = hopping_distance_matrix(build_knn_graph(ds, 6));
            const auto t = weighted_transition(s);
            const auto log = simulate_attack(ds, t, {{1.0}, {1.0}, mix_seed(seed, 77)});
            const auto w = model_entropy(log, t);
            const auto u = model_entropy(log, uniform_transition(10));
            wins += w.e_m < u.e_m;
            mean_w += w.e_m / 100;
            mean_u += u.e_m / 100;
            mean_nll_w += w.mean_nll / 100;
            mean_nll_u += u.mean_nll / 100;
        }
        return Outcome{wins >= 95, std::to_string(wins) + "/100 runs weighted < uniform (need 95); " +
                                       fmt("mean e_M %.4f vs %.4f; ", mean_w, mean_u) +
                                       fmt("mean NLL %.4f vs %.4f", mean_nll_w, mean_nll_u)};
    });

    criterion("displacement", 0, [] {
        int bound_violations = 0;
        double min_rho = 1.0;
        std::vector<double> eps;
        for (int i = 1; i <= 20; ++i) eps.push_back(i / 10.0);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto ds = line_blobs(60, seed);
            const auto s = hopping_distance_matrix(build_knn_graph(ds, 6));
            const auto fd = forbidden_distance(s);
            const auto map = create_map(s, fd);
            // classes with no map neighbours have nowhere to go, so they never flip
            const auto weighted = weighted_transition(s, &map);
            std::vector<double> p(100, 0.0);
            for (std::size_t i = 0; i < 10; ++i)
                for (std::size_t j = 0; j < 10; ++j)
                    if (map.has_edge(i, j)) p[i * 10 + j] = weighted(i, j);
            TransitionProvenance prov;
            prov.kind = TransitionProvenance::Kind::custom;
            const TransitionModel restricted(10, std::move(p), prov);
            const auto log_r = simulate_attack(ds, restricted, {eps, {}, seed});
            for (double e : eps) bound_violations += average_displacement(log_r, s, e).value > fd.value;
            bound_violations += average_displacement(log_r, s).mean_over_flips > fd.value;

            std::vector<double> rate;
            for (double e : eps) rate.push_back(e / 2.0);
            const auto log = simulate_attack(ds, weighted_transition(s), {eps, rate, seed + 50});
            std::vector<double> disp;
            for (double e : eps) disp.push_back(average_displacement(log, s, e).value);
            min_rho = std::min(min_rho, spearman(eps, disp));
        }
        return Outcome{bound_violations == 0 && min_rho >= 0.9,
                       std::to_string(bound_violations) + " bound violations over 5 runs; " +
                           fmt("min Spearman(eps, D) %.3f (need 0.9)", min_rho)};
    });

    criterion("topk-calibration", 0, [] {
        const auto ds = line_blobs(100, 7);
        const auto s = hopping_distance_matrix(build_knn_graph(ds, 6));
        const auto t = weighted_transition(s);
        std::vector<double> eps;
        for (int i = 1; i <= 10; ++i) eps.push_back(i / 10.0);
        std::string detail;
        bool ok = true;
        for (const auto* model : {&t, static_cast<const TransitionModel*>(nullptr)}) {
            const TransitionModel tm = model ? *model : uniform_transition(10);
            const auto log = simulate_attack(ds, tm, {eps, {1.0}, 99});
            const auto ranking = rank_susceptibility(model ? t : tm);
            double mass = 0, var = 0;
            std::size_t n = 0;
            for (const auto& r : log.records()) {
                if (!r.misclassified()) continue;
                double p = 0;
                for (ClassId c : predict_targets(ranking, r.actual, 4)) p += tm(r.actual, c);
                mass += p;
                var += p * (1 - p);
                ++n;
            }
            const auto rep = evaluate_accuracy(log, ranking, {4}, false);
            const double acc = rep.rows.back().accuracy;
            const double expected = model ? mass / n : 4.0 / 9.0;
            const double se = std::sqrt(model ? var : n * (4.0 / 9.0) * (5.0 / 9.0)) / n;
            const bool within = std::fabs(acc - expected) <= 3 * se;
            ok = ok && within && n >= 10000;
            detail += std::string(model ? "weighted" : "uniform") + fmt(": acc %.4f vs %.4f (3se %.4f); ", acc, expected, 3 * se);
        }
        return Outcome{ok, detail + "10^4 records each"};
    });

    criterion("report-determinism", 0, [] {
        const fs::path root = fs::temp_directory_path() / ("advgeo_accept_" + std::to_string(::getpid()));
        fs::remove_all(root);
        RunConfig c;
        c.dataset = std::string(ADVGEO_FIXTURES) + "/blobs.csv";
        c.log = std::string(ADVGEO_FIXTURES) + "/blobs_log.csv";
        c.seed = 11;
        c.perplexity = 10;
        c.out = (root / "a").string();
        run_command(Command::report, c);
        c.out = (root / "b").string();
        run_command(Command::report, c);
        std::size_t compared = 0, differing = 0;
        for (const auto& e : fs::directory_iterator(root / "a")) {
            const auto name = e.path().filename();
            if (name == "manifest.json") continue;
            ++compared;
            differing += read_file(e.path()) != read_file(root / "b" / name);
        }
        const std::size_t count_b = std::distance(fs::directory_iterator(root / "b"), fs::directory_iterator{});
        fs::remove_all(root);
        const bool ok = differing == 0 && compared > 0 && count_b == compared + 1;
        return Outcome{ok, std::to_string(compared) + " files compared, " + std::to_string(differing) + " differ"};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
