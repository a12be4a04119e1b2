#include "savar/kernels.hpp"

#include <cassert>

namespace savar::kernels::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    // Four partial sums, same association as the vector variant.
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    const std::size_t n = a.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return ((s0 + s1) + (s2 + s3)) + tail;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void gram(const double* a, std::size_t rows, std::size_t cols, std::size_t lda, double scale,
          double* out) {
    for (std::size_t j = 0; j < cols; ++j) {
        std::span<const double> cj(a + j * lda, rows);
        for (std::size_t i = j; i < cols; ++i) {
            const double v = scale * dot(std::span<const double>(a + i * lda, rows), cj);
            out[i + j * cols] = v;
            out[j + i * cols] = v;
        }
    }
}

void cross(const double* a, std::size_t rows, std::size_t cols_a, std::size_t lda, const double* b,
           std::size_t cols_b, std::size_t ldb, double scale, double* out) {
    for (std::size_t j = 0; j < cols_b; ++j) {
        std::span<const double> bj(b + j * ldb, rows);
        for (std::size_t i = 0; i < cols_a; ++i)
            out[i + j * cols_a] = scale * dot(std::span<const double>(a + i * lda, rows), bj);
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
        for (std::size_t t = 0; t < n; ++t) {
            cm[t] = cp[t] * cos1[t] - sp[t] * sin1[t];
            sm[t] = sp[t] * cos1[t] + cp[t] * sin1[t];
        }
    }
}

}  // namespace savar::kernels::scalar
