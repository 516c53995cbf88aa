#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bml/matrix.hpp"

namespace bml {

inline constexpr std::uint32_t kSpectralMaxN = 2048;  // dense fallback cap
inline constexpr std::uint64_t kPowerIterSeed = 0x5EEDF00DULL;

// Floating-point spectral diagnostics (exactness lives in the exact module).
struct SpectralReport {
    double s_min = 0.0;
    double s_max = 0.0;
    double centered_norm = 0.0;  // ||M - p*11^T||
    double rel_tol = 0.0;
    int iterations = 0;
    bool converged = true;

    std::string to_json() const;
};

// Largest singular value via power iteration on M^T M with a fixed seeded
// start vector.
double spectral_norm(const SparseBinaryMatrix& m, double rel_tol, int* iterations = nullptr,
                     bool* converged = nullptr);

// ||M - p*11^T|| with the rank-one shift applied matrix-free.
double centered_spectral_norm(const SparseBinaryMatrix& m, double p, double rel_tol,
                              int* iterations = nullptr, bool* converged = nullptr);

// Smallest singular value via Golub-Kahan bidiagonalization followed by
// implicit-shift QR on the bidiagonal. Requires n <= kSpectralMaxN and
// rel_tol in [1e-12, 1e-2].
double smallest_singular_value(const SparseBinaryMatrix& m, double rel_tol,
                               bool* converged = nullptr);

// All singular values (descending) of a dense column-major r x c matrix
// with r >= c. Shared backend for the two entry points above and the
// harness surveys.
std::vector<double> dense_singular_values(std::vector<double> a, std::uint32_t rows,
                                          std::uint32_t cols, int* iterations = nullptr,
                                          bool* converged = nullptr);

// Euclidean distance from column i to the span of the other columns
// (Householder QR least-squares residual).
double dist_to_complement_span(const SparseBinaryMatrix& m, std::uint32_t i);

// Unit normal to the span of all columns except `dropped_col`; nullopt if
// that span is rank deficient.
std::optional<std::vector<double>> normal_to_complement(const SparseBinaryMatrix& m,
                                                        std::uint32_t dropped_col);

SpectralReport spectral_report(const SparseBinaryMatrix& m, double p, double rel_tol);

// y = M x and y = M^T x for dense vectors.
void matvec(const SparseBinaryMatrix& m, const std::vector<double>& x, std::vector<double>& y);
void matvec_t(const SparseBinaryMatrix& m, const std::vector<double>& x, std::vector<double>& y);

}  // namespace bml
