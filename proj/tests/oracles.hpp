// Independent reference implementations used only by tests. These must not
// share code paths with the library routines they check.
#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bml/matrix.hpp"

namespace oracle {

// Determinant by cofactor expansion over exact 64-bit integers (n <= 6).
inline std::int64_t det_cofactor(const std::vector<std::int64_t>& a, std::uint32_t n) {
    if (n == 1) return a[0];
    std::int64_t det = 0;
    std::vector<std::int64_t> minor((n - 1) * (n - 1));
    for (std::uint32_t c = 0; c < n; ++c) {
        if (a[c] != 0) {
            for (std::uint32_t i = 1; i < n; ++i) {
                std::uint32_t mj = 0;
                for (std::uint32_t j = 0; j < n; ++j) {
                    if (j == c) continue;
                    minor[(i - 1) * (n - 1) + mj++] = a[i * n + j];
                }
            }
            std::int64_t sub = det_cofactor(minor, n - 1);
            det += (c % 2 == 0 ? 1 : -1) * a[c] * sub;
        }
    }
    return det;
}

inline std::int64_t det_cofactor(const bml::SparseBinaryMatrix& m) {
    const std::uint32_t n = m.n();
    std::vector<std::int64_t> a(n * n, 0);
    for (std::size_t k = 0; k < m.nnz(); ++k) {
        auto [i, j] = m.entry(k);
        a[i * n + j] = 1;
    }
    return det_cofactor(a, n);
}

// Exact rank over Q by fraction elimination with mpq.
inline std::uint32_t rank_mpq(const bml::SparseBinaryMatrix& m) {
    const std::uint32_t n = m.n();
    std::vector<mpq_class> a(static_cast<std::size_t>(n) * n, 0);
    for (std::size_t k = 0; k < m.nnz(); ++k) {
        auto [i, j] = m.entry(k);
        a[static_cast<std::size_t>(i) * n + j] = 1;
    }
    auto at = [&](std::uint32_t i, std::uint32_t j) -> mpq_class& {
        return a[static_cast<std::size_t>(i) * n + j];
    };
    std::uint32_t rank = 0, pr = 0;
    for (std::uint32_t col = 0; col < n && pr < n; ++col) {
        std::uint32_t sel = pr;
        while (sel < n && at(sel, col) == 0) ++sel;
        if (sel == n) continue;
        if (sel != pr)
            for (std::uint32_t j = 0; j < n; ++j) std::swap(at(sel, j), at(pr, j));
        for (std::uint32_t i = pr + 1; i < n; ++i) {
            if (at(i, col) == 0) continue;
            mpq_class f = at(i, col) / at(pr, col);
            for (std::uint32_t j = col; j < n; ++j) at(i, j) -= f * at(pr, j);
        }
        ++pr;
        ++rank;
    }
    return rank;
}

// One-sided Jacobi SVD on a dense column-major r x c matrix; returns all
// singular values descending. Independent of the bidiagonal-QR path.
inline std::vector<double> jacobi_singular_values(std::vector<double> a, std::uint32_t r,
                                                  std::uint32_t c) {
    auto col = [&](std::uint32_t j) { return a.data() + static_cast<std::size_t>(j) * r; };
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0;
        for (std::uint32_t p = 0; p + 1 < c; ++p) {
            for (std::uint32_t q = p + 1; q < c; ++q) {
                double app = 0, aqq = 0, apq = 0;
                for (std::uint32_t i = 0; i < r; ++i) {
                    app += col(p)[i] * col(p)[i];
                    aqq += col(q)[i] * col(q)[i];
                    apq += col(p)[i] * col(q)[i];
                }
                off = std::max(off, std::abs(apq) / (std::sqrt(app * aqq) + 1e-300));
                if (std::abs(apq) < 1e-280) continue;
                double zeta = (aqq - app) / (2.0 * apq);
                double t = (zeta >= 0 ? 1.0 : -1.0) /
                           (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                double cs = 1.0 / std::sqrt(1.0 + t * t);
                double sn = cs * t;
                for (std::uint32_t i = 0; i < r; ++i) {
                    double vp = col(p)[i], vq = col(q)[i];
                    col(p)[i] = cs * vp - sn * vq;
                    col(q)[i] = sn * vp + cs * vq;
                }
            }
        }
        if (off < 1e-14) break;
    }
    std::vector<double> sv(c);
    for (std::uint32_t j = 0; j < c; ++j) {
        double s = 0;
        for (std::uint32_t i = 0; i < r; ++i) s += col(j)[i] * col(j)[i];
        sv[j] = std::sqrt(s);
    }
    std::sort(sv.begin(), sv.end(), std::greater<>());
    return sv;
}

inline std::vector<double> jacobi_singular_values(const bml::SparseBinaryMatrix& m) {
    const std::uint32_t n = m.n();
    std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
    for (std::size_t k = 0; k < m.nnz(); ++k) {
        auto [i, j] = m.entry(k);
        a[static_cast<std::size_t>(j) * n + i] = 1.0;
    }
    return jacobi_singular_values(std::move(a), n, n);
}

// Regularized upper incomplete gamma Q(a, x) (series + continued fraction),
// for chi-square p-values in distribution tests.
inline double gamma_q(double a, double x) {
    if (x < 0 || a <= 0) return 1.0;
    if (x == 0) return 1.0;
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        double gln = std::lgamma(a);
        return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
    }
    double gln = std::lgamma(a);
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

// Two-sample chi-square homogeneity p-value over shared bins.
inline double chi2_two_sample_pvalue(const std::vector<std::uint64_t>& o1,
                                     const std::vector<std::uint64_t>& o2) {
    double stat = 0;
    int df = 0;
    for (std::size_t b = 0; b < o1.size(); ++b) {
        double tot = static_cast<double>(o1[b] + o2[b]);
        if (tot < 10) continue;  // merge-free: skip sparse bins
        double e = tot / 2.0;
        double d1 = static_cast<double>(o1[b]) - e;
        double d2 = static_cast<double>(o2[b]) - e;
        stat += d1 * d1 / e + d2 * d2 / e;
        ++df;
    }
    if (df <= 1) return 1.0;
    return gamma_q((df - 1) / 2.0, stat / 2.0);
}

}  // namespace oracle
