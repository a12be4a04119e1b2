#include "savar/kernels.hpp"

namespace savar::kernels {
namespace {

struct Table {
    Isa isa;
    double (*dot)(std::span<const double>, std::span<const double>);
    void (*axpy)(double, std::span<const double>, std::span<double>);
    void (*gram)(const double*, std::size_t, std::size_t, std::size_t, double, double*);
    void (*cross)(const double*, std::size_t, std::size_t, std::size_t, const double*, std::size_t,
                  std::size_t, double, double*);
    void (*harmonics)(std::span<const double>, std::span<const double>, std::size_t, double*,
                      double*, std::size_t);
};

bool cpu_has_avx2() noexcept {
#if SAVAR_HAVE_AVX2 && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Table select() noexcept {
#if SAVAR_HAVE_AVX2
    if (cpu_has_avx2())
        return {Isa::avx2, avx2::dot, avx2::axpy, avx2::gram, avx2::cross, avx2::harmonics};
#endif
    return {Isa::scalar, scalar::dot, scalar::axpy, scalar::gram, scalar::cross, scalar::harmonics};
}

const Table& table() noexcept {
    static const Table t = select();
    return t;
}

}  // namespace

Isa active_isa() noexcept { return table().isa; }

bool avx2_available() noexcept { return cpu_has_avx2(); }

const char* isa_name(Isa isa) noexcept {
    return isa == Isa::avx2 ? "avx2" : "scalar";
}

double dot(std::span<const double> a, std::span<const double> b) { return table().dot(a, b); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    table().axpy(alpha, x, y);
}

void gram(const double* a, std::size_t rows, std::size_t cols, std::size_t lda, double scale,
          double* out) {
    table().gram(a, rows, cols, lda, scale, out);
}

void cross(const double* a, std::size_t rows, std::size_t cols_a, std::size_t lda, const double* b,
           std::size_t cols_b, std::size_t ldb, double scale, double* out) {
    table().cross(a, rows, cols_a, lda, b, cols_b, ldb, scale, out);
}

void harmonics(std::span<const double> cos1, std::span<const double> sin1, std::size_t count,
               double* cos_out, double* sin_out, std::size_t ld) {
    table().harmonics(cos1, sin1, count, cos_out, sin_out, ld);
}

}  // namespace savar::kernels
