#include "savar/kernels.hpp"

#include <immintrin.h>

#include <cassert>

namespace savar::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Four dot products sharing the right-hand column.
inline void dot4(const double* a0, const double* a1, const double* a2, const double* a3,
                 const double* b, std::size_t n, double* out) {
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vb = _mm256_loadu_pd(b + i);
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a0 + i), vb, s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a1 + i), vb, s1);
        s2 = _mm256_fmadd_pd(_mm256_loadu_pd(a2 + i), vb, s2);
        s3 = _mm256_fmadd_pd(_mm256_loadu_pd(a3 + i), vb, s3);
    }
    double t0 = hsum(s0), t1 = hsum(s1), t2 = hsum(s2), t3 = hsum(s3);
    for (; i < n; ++i) {
        t0 += a0[i] * b[i];
        t1 += a1[i] * b[i];
        t2 += a2[i] * b[i];
        t3 += a3[i] * b[i];
    }
    out[0] = t0;
    out[1] = t1;
    out[2] = t2;
    out[3] = t3;
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    const std::size_t n = a.size();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i + 4), _mm256_loadu_pd(b.data() + i + 4),
                               acc1);
    }
    if (i + 4 <= n) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc0);
        i += 4;
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    const std::size_t n = x.size();
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vy = _mm256_loadu_pd(y.data() + i);
        _mm256_storeu_pd(y.data() + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x.data() + i), vy));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void gram(const double* a, std::size_t rows, std::size_t cols, std::size_t lda, double scale,
          double* out) {
    double buf[4];
    for (std::size_t j = 0; j < cols; ++j) {
        const double* cj = a + j * lda;
        std::size_t i = j;
        for (; i + 4 <= cols; i += 4) {
            dot4(a + i * lda, a + (i + 1) * lda, a + (i + 2) * lda, a + (i + 3) * lda, cj, rows, buf);
            for (std::size_t q = 0; q < 4; ++q) {
                const double v = scale * buf[q];
                out[(i + q) + j * cols] = v;
                out[j + (i + q) * cols] = v;
            }
        }
        for (; i < cols; ++i) {
            const double v = scale * dot(std::span<const double>(a + i * lda, rows),
                                         std::span<const double>(cj, rows));
            out[i + j * cols] = v;
            out[j + i * cols] = v;
        }
    }
}

void cross(const double* a, std::size_t rows, std::size_t cols_a, std::size_t lda, const double* b,
           std::size_t cols_b, std::size_t ldb, double scale, double* out) {
    double buf[4];
    for (std::size_t j = 0; j < cols_b; ++j) {
        const double* bj = b + j * ldb;
        std::size_t i = 0;
        for (; i + 4 <= cols_a; i += 4) {
            dot4(a + i * lda, a + (i + 1) * lda, a + (i + 2) * lda, a + (i + 3) * lda, bj, rows, buf);
            for (std::size_t q = 0; q < 4; ++q) out[(i + q) + j * cols_a] = scale * buf[q];
        }
        for (; i < cols_a; ++i)
            out[i + j * cols_a] = scale * dot(std::span<const double>(a + i * lda, rows),
                                              std::span<const double>(bj, rows));
    }
}

void harmonics(std::span<const double> cos1, std::span<const double> sin1, std::size_t count,
               double* cos_out, double* sin_out, std::size_t ld) {
    const std::size_t n = cos1.size();
    if (count == 0) return;
    for (std::size_t t = 0; t < n; ++t) {
        cos_out[t] = cos1[t];
        sin_out[t] = sin1[t];
    }
    for (std::size_t m = 1; m < count; ++m) {
        const double* cp = cos_out + (m - 1) * ld;
        const double* sp = sin_out + (m - 1) * ld;
        double* cm = cos_out + m * ld;
        double* sm = sin_out + m * ld;
        std::size_t t = 0;
        for (; t + 4 <= n; t += 4) {
            const __m256d c1 = _mm256_loadu_pd(cos1.data() + t);
            const __m256d s1 = _mm256_loadu_pd(sin1.data() + t);
            const __m256d vc = _mm256_loadu_pd(cp + t);
            const __m256d vs = _mm256_loadu_pd(sp + t);
            _mm256_storeu_pd(cm + t, _mm256_fmsub_pd(vc, c1, _mm256_mul_pd(vs, s1)));
            _mm256_storeu_pd(sm + t, _mm256_fmadd_pd(vs, c1, _mm256_mul_pd(vc, s1)));
        }
        for (; t < n; ++t) {
            cm[t] = cp[t] * cos1[t] - sp[t] * sin1[t];
            sm[t] = sp[t] * cos1[t] + cp[t] * sin1[t];
        }
    }
}

}  // namespace savar::kernels::avx2
