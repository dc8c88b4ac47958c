#pragma once

// Data-parallel inner loops used by the k-NN search, centroid accumulation and
// the t-SNE optimizer. Every kernel has a scalar reference implementation; an
// AVX2+FMA variant is selected at runtime when the CPU supports it. The two
// agree to rounding (see tests/test_kernels.cpp), not bit-for-bit.

#include <cstddef>
#include <span>
#include <string_view>

namespace advgeo::simd {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

// Throws std::invalid_argument for an unknown name.
Isa isa_from_string(std::string_view name);

bool isa_available(Isa isa);
Isa best_available_isa();

// The ISA used by the free functions below. Defaults to best_available_isa().
Isa active_isa();
// Throws std::invalid_argument if the ISA is not available on this CPU.
void set_active_isa(Isa isa);

struct KernelTable {
    Isa isa;

    // Σ (a_k - b_k)²
    double (*squared_l2)(const double* a, const double* b, std::size_t dim);
    // Σ a_k b_k
    double (*dot)(const double* a, const double* b, std::size_t dim);
    // acc_k += x_k. Elementwise, so every ISA gives identical results.
    void (*accumulate)(double* acc, const double* x, std::size_t dim);
    // out_r = squared_l2(query, rows + r*dim) for r in [0, n_rows)
    void (*squared_l2_rows)(const double* query, const double* rows,
                            std::size_t n_rows, std::size_t dim, double* out);
    // Student-t kernel row over SoA 2-D points: w_j = 1 / (1 + |y_i - y_j|²),
    // w_i = 0. Returns Σ_j w_j.
    double (*student_t_row)(const double* xs, const double* ys, std::size_t m,
                            std::size_t i, double* w);
    // (gx, gy) = Σ_j (p_scale * p_j - inv_z * w_j) * w_j * (y_i - y_j)
    void (*tsne_force_row)(const double* xs, const double* ys, std::size_t m,
                           std::size_t i, const double* p_row,
                           const double* w_row, double p_scale, double inv_z,
                           double* gx, double* gy);
};

// Throws std::invalid_argument if the ISA is not available.
const KernelTable& kernel_table(Isa isa);
const KernelTable& active_kernels();

inline double squared_l2(std::span<const double> a, std::span<const double> b) {
    return active_kernels().squared_l2(a.data(), b.data(), a.size());
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active_kernels().dot(a.data(), b.data(), a.size());
}

inline void accumulate(std::span<double> acc, std::span<const double> x) {
    active_kernels().accumulate(acc.data(), x.data(), acc.size());
}

inline void squared_l2_rows(std::span<const double> query,
                            std::span<const double> rows,
                            std::span<double> out) {
    active_kernels().squared_l2_rows(query.data(), rows.data(), out.size(),
                                     query.size(), out.data());
}

}  // namespace advgeo::simd
