#pragma once

// Data-parallel inner loops used by the design builder and the solver.
//
// Every kernel has a portable scalar reference in kernels::scalar and, on
// x86-64, an AVX2/FMA variant in kernels::avx2. The unqualified entry points
// dispatch once at startup based on CPUID. Matrices are column-major with
// an explicit leading dimension.

#include <cstddef>
#include <span>

namespace savar::kernels {

enum class Isa { scalar, avx2 };

/// ISA chosen by the dispatcher for this process.
Isa active_isa() noexcept;
/// True when the AVX2 variants were compiled in and the CPU supports them.
bool avx2_available() noexcept;
const char* isa_name(Isa isa) noexcept;

double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// out[i + j*cols] = scale * <A_i, A_j> for the columns of a (rows x cols),
/// lower and upper triangle both written.
void gram(const double* a, std::size_t rows, std::size_t cols, std::size_t lda, double scale,
          double* out);

/// out[i + j*cols_a] = scale * <A_i, B_j>.
void cross(const double* a, std::size_t rows, std::size_t cols_a, std::size_t lda, const double* b,
           std::size_t cols_b, std::size_t ldb, double scale, double* out);

/// Harmonics by angle addition: given cos(theta_t), sin(theta_t) for t < n,
/// writes cos(m theta_t) to cos_out[t + (m-1)*ld] and sin(m theta_t) to
/// sin_out[t + (m-1)*ld] for m = 1..count.
void harmonics(std::span<const double> cos1, std::span<const double> sin1, std::size_t count,
               double* cos_out, double* sin_out, std::size_t ld);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void gram(const double* a, std::size_t rows, std::size_t cols, std::size_t lda, double scale,
          double* out);
void cross(const double* a, std::size_t rows, std::size_t cols_a, std::size_t lda, const double* b,
           std::size_t cols_b, std::size_t ldb, double scale, double* out);
void harmonics(std::span<const double> cos1, std::span<const double> sin1, std::size_t count,
               double* cos_out, double* sin_out, std::size_t ld);
}  // namespace scalar

#if SAVAR_HAVE_AVX2
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void gram(const double* a, std::size_t rows, std::size_t cols, std::size_t lda, double scale,
          double* out);
void cross(const double* a, std::size_t rows, std::size_t cols_a, std::size_t lda, const double* b,
           std::size_t cols_b, std::size_t ldb, double scale, double* out);
void harmonics(std::span<const double> cos1, std::span<const double> sin1, std::size_t count,
               double* cos_out, double* sin_out, std::size_t ld);
}  // namespace avx2
#endif

}  // namespace savar::kernels
