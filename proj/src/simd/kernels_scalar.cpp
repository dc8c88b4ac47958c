#include "simd/kernel_impls.hpp"

namespace advgeo::simd::detail {
namespace {

double squared_l2_ref(const double* a, const double* b, std::size_t dim) {
    double acc = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        const double t = a[k] - b[k];
        acc += t * t;
    }
    return acc;
}

double dot_ref(const double* a, const double* b, std::size_t dim) {
    double acc = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        acc += a[k] * b[k];
    }
    return acc;
}

void accumulate_ref(double* acc, const double* x, std::size_t dim) {
    for (std::size_t k = 0; k < dim; ++k) {
        acc[k] += x[k];
    }
}

void squared_l2_rows_ref(const double* query, const double* rows,
                         std::size_t n_rows, std::size_t dim, double* out) {
    for (std::size_t r = 0; r < n_rows; ++r) {
        out[r] = squared_l2_ref(query, rows + r * dim, dim);
    }
}

double student_t_row_ref(const double* xs, const double* ys, std::size_t m,
                         std::size_t i, double* w) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double dx = xs[i] - xs[j];
        const double dy = ys[i] - ys[j];
        w[j] = 1.0 / (1.0 + dx * dx + dy * dy);
    }
    w[i] = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        sum += w[j];
    }
    return sum;
}

void tsne_force_row_ref(const double* xs, const double* ys, std::size_t m,
                        std::size_t i, const double* p_row, const double* w_row,
                        double p_scale, double inv_z, double* gx, double* gy) {
    double ax = 0.0;
    double ay = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double coeff = (p_scale * p_row[j] - inv_z * w_row[j]) * w_row[j];
        ax += coeff * (xs[i] - xs[j]);
        ay += coeff * (ys[i] - ys[j]);
    }
    *gx = ax;
    *gy = ay;
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{
        Isa::scalar,       squared_l2_ref,    dot_ref,
        accumulate_ref,    squared_l2_rows_ref, student_t_row_ref,
        tsne_force_row_ref,
    };
    return table;
}

}  // namespace advgeo::simd::detail
