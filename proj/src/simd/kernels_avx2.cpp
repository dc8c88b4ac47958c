// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after a runtime CPU check (see kernels.cpp).

#include "simd/kernel_impls.hpp"

#include <immintrin.h>

namespace advgeo::simd::detail {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double squared_l2_avx2(const double* a, const double* b, std::size_t dim) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 8 <= dim; k += 8) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
        const __m256d d1 =
            _mm256_sub_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        acc1 = _mm256_fmadd_pd(d1, d1, acc1);
    }
    if (k + 4 <= dim) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        k += 4;
    }
    double res = hsum(_mm256_add_pd(acc0, acc1));
    for (; k < dim; ++k) {
        const double t = a[k] - b[k];
        res += t * t;
    }
    return res;
}

double dot_avx2(const double* a, const double* b, std::size_t dim) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 8 <= dim; k += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), _mm256_loadu_pd(b + k + 4),
                               acc1);
    }
    if (k + 4 <= dim) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(b + k), acc0);
        k += 4;
    }
    double res = hsum(_mm256_add_pd(acc0, acc1));
    for (; k < dim; ++k) {
        res += a[k] * b[k];
    }
    return res;
}

void accumulate_avx2(double* acc, const double* x, std::size_t dim) {
    std::size_t k = 0;
    for (; k + 4 <= dim; k += 4) {
        _mm256_storeu_pd(acc + k,
                         _mm256_add_pd(_mm256_loadu_pd(acc + k), _mm256_loadu_pd(x + k)));
    }
    for (; k < dim; ++k) {
        acc[k] += x[k];
    }
}

void squared_l2_rows_avx2(const double* query, const double* rows,
                          std::size_t n_rows, std::size_t dim, double* out) {
    for (std::size_t r = 0; r < n_rows; ++r) {
        out[r] = squared_l2_avx2(query, rows + r * dim, dim);
    }
}

double student_t_row_avx2(const double* xs, const double* ys, std::size_t m,
                          std::size_t i, double* w) {
    const __m256d xi = _mm256_set1_pd(xs[i]);
    const __m256d yi = _mm256_set1_pd(ys[i]);
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t j = 0;
    for (; j + 4 <= m; j += 4) {
        const __m256d dx = _mm256_sub_pd(xi, _mm256_loadu_pd(xs + j));
        const __m256d dy = _mm256_sub_pd(yi, _mm256_loadu_pd(ys + j));
        const __m256d d2 = _mm256_fmadd_pd(dy, dy, _mm256_mul_pd(dx, dx));
        _mm256_storeu_pd(w + j, _mm256_div_pd(one, _mm256_add_pd(one, d2)));
    }
    for (; j < m; ++j) {
        const double dx = xs[i] - xs[j];
        const double dy = ys[i] - ys[j];
        w[j] = 1.0 / (1.0 + dx * dx + dy * dy);
    }
    w[i] = 0.0;

    __m256d acc = _mm256_setzero_pd();
    j = 0;
    for (; j + 4 <= m; j += 4) {
        acc = _mm256_add_pd(acc, _mm256_loadu_pd(w + j));
    }
    double sum = hsum(acc);
    for (; j < m; ++j) {
        sum += w[j];
    }
    return sum;
}

void tsne_force_row_avx2(const double* xs, const double* ys, std::size_t m,
                         std::size_t i, const double* p_row, const double* w_row,
                         double p_scale, double inv_z, double* gx, double* gy) {
    const __m256d xi = _mm256_set1_pd(xs[i]);
    const __m256d yi = _mm256_set1_pd(ys[i]);
    const __m256d ps = _mm256_set1_pd(p_scale);
    const __m256d iz = _mm256_set1_pd(inv_z);
    __m256d ax = _mm256_setzero_pd();
    __m256d ay = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= m; j += 4) {
        const __m256d wv = _mm256_loadu_pd(w_row + j);
        const __m256d attract = _mm256_mul_pd(ps, _mm256_loadu_pd(p_row + j));
        const __m256d coeff = _mm256_mul_pd(_mm256_fnmadd_pd(iz, wv, attract), wv);
        ax = _mm256_fmadd_pd(coeff, _mm256_sub_pd(xi, _mm256_loadu_pd(xs + j)), ax);
        ay = _mm256_fmadd_pd(coeff, _mm256_sub_pd(yi, _mm256_loadu_pd(ys + j)), ay);
    }
    double sx = hsum(ax);
    double sy = hsum(ay);
    for (; j < m; ++j) {
        const double coeff = (p_scale * p_row[j] - inv_z * w_row[j]) * w_row[j];
        sx += coeff * (xs[i] - xs[j]);
        sy += coeff * (ys[i] - ys[j]);
    }
    *gx = sx;
    *gy = sy;
}

}  // namespace

const KernelTable& avx2_kernels() {
    static const KernelTable table{
        Isa::avx2,           squared_l2_avx2,    dot_avx2,
        accumulate_avx2,     squared_l2_rows_avx2, student_t_row_avx2,
        tsne_force_row_avx2,
    };
    return table;
}

}  // namespace advgeo::simd::detail
