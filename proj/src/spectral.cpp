#include "bml/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "bml/rng.hpp"

namespace bml {

namespace {

double hypot2(double a, double b) { return std::hypot(a, b); }

double norm2(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void check_spectral_pre(const SparseBinaryMatrix& m, double rel_tol) {
    if (m.n() > kSpectralMaxN) throw RegimeError("spectral: n exceeds dense fallback cap 2048");
    if (rel_tol < 1e-12 || rel_tol > 1e-2)
        throw std::invalid_argument("spectral: rel_tol must lie in [1e-12, 1e-2]");
}

std::vector<double> seeded_unit_vector(std::uint32_t n) {
    Xoshiro256pp rng(kPowerIterSeed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    double nv = norm2(v);
    for (auto& x : v) x /= nv;
    return v;
}

// Power iteration on B^T B where B x is given by `apply` and B^T x by
// `apply_t`. Returns the largest singular value of B.
template <class Apply, class ApplyT>
double power_iteration(std::uint32_t n, Apply apply, ApplyT apply_t, double rel_tol,
                       int* iterations, bool* converged) {
    std::vector<double> v = seeded_unit_vector(n), mv(n), w(n);
    double sigma = 0.0;
    bool ok = false;
    int it = 0;
    const int max_it = 20000;
    for (; it < max_it; ++it) {
        apply(v, mv);
        double s = norm2(mv);
        if (s == 0.0) {  // v happens to lie in the null space
            sigma = 0.0;
            ok = true;
            break;
        }
        apply_t(mv, w);
        double nw = norm2(w);
        double new_sigma = s;  // ||Bv|| with ||v|| = 1
        if (nw == 0.0) {
            sigma = new_sigma;
            ok = true;
            break;
        }
        for (std::uint32_t i = 0; i < n; ++i) v[i] = w[i] / nw;
        if (it > 0 && std::abs(new_sigma - sigma) <= rel_tol * new_sigma) {
            sigma = new_sigma;
            ok = true;
            break;
        }
        sigma = new_sigma;
    }
    if (iterations) *iterations = it + 1;
    if (converged) *converged = ok;
    return sigma;
}

}  // namespace

void matvec(const SparseBinaryMatrix& m, const std::vector<double>& x, std::vector<double>& y) {
    y.assign(m.n(), 0.0);
    const auto& ri = m.entry_rows();
    const auto& ci = m.entry_cols();
    for (std::size_t k = 0; k < ri.size(); ++k) y[ri[k]] += x[ci[k]];
}

void matvec_t(const SparseBinaryMatrix& m, const std::vector<double>& x, std::vector<double>& y) {
    y.assign(m.n(), 0.0);
    const auto& ri = m.entry_rows();
    const auto& ci = m.entry_cols();
    for (std::size_t k = 0; k < ri.size(); ++k) y[ci[k]] += x[ri[k]];
}

double spectral_norm(const SparseBinaryMatrix& m, double rel_tol, int* iterations, bool* converged) {
    check_spectral_pre(m, rel_tol);
    return power_iteration(
        m.n(), [&](const std::vector<double>& x, std::vector<double>& y) { matvec(m, x, y); },
        [&](const std::vector<double>& x, std::vector<double>& y) { matvec_t(m, x, y); }, rel_tol,
        iterations, converged);
}

double centered_spectral_norm(const SparseBinaryMatrix& m, double p, double rel_tol,
                              int* iterations, bool* converged) {
    check_spectral_pre(m, rel_tol);
    // (M - p 11^T) x = M x - p (sum x) 1, applied without materializing the
    // rank-one part.
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        matvec(m, x, y);
        double s = 0;
        for (double v : x) s += v;
        for (auto& v : y) v -= p * s;
    };
    auto apply_t = [&](const std::vector<double>& x, std::vector<double>& y) {
        matvec_t(m, x, y);
        double s = 0;
        for (double v : x) s += v;
        for (auto& v : y) v -= p * s;
    };
    return power_iteration(m.n(), apply, apply_t, rel_tol, iterations, converged);
}

// ---------------------------------------------------------------------------
// Dense singular values: Householder bidiagonalization + implicit-shift QR
// on the bidiagonal (Golub-Kahan-Reinsch, values only).
// ---------------------------------------------------------------------------

std::vector<double> dense_singular_values(std::vector<double> a, std::uint32_t rows,
                                          std::uint32_t cols, int* iterations, bool* converged) {
    if (rows < cols) throw std::invalid_argument("dense_singular_values: rows must be >= cols");
    const std::int64_t m = rows, n = cols;
    auto A = [&](std::int64_t i, std::int64_t j) -> double& { return a[j * m + i]; };

    std::vector<double> w(n, 0.0), rv1(n, 0.0);
    double g = 0, scale = 0, anorm = 0;
    auto sign = [](double v, double s) { return s >= 0 ? std::abs(v) : -std::abs(v); };

    for (std::int64_t i = 0; i < n; ++i) {
        std::int64_t l = i + 1;
        rv1[i] = scale * g;
        g = scale = 0;
        double s = 0;
        if (i < m) {
            for (std::int64_t k = i; k < m; ++k) scale += std::abs(A(k, i));
            if (scale != 0) {
                for (std::int64_t k = i; k < m; ++k) {
                    A(k, i) /= scale;
                    s += A(k, i) * A(k, i);
                }
                double f = A(i, i);
                g = -sign(std::sqrt(s), f);
                double h = f * g - s;
                A(i, i) = f - g;
                for (std::int64_t j = l; j < n; ++j) {
                    s = 0;
                    for (std::int64_t k = i; k < m; ++k) s += A(k, i) * A(k, j);
                    f = s / h;
                    for (std::int64_t k = i; k < m; ++k) A(k, j) += f * A(k, i);
                }
                for (std::int64_t k = i; k < m; ++k) A(k, i) *= scale;
            }
        }
        w[i] = scale * g;
        g = scale = 0;
        s = 0;
        if (i < m && i != n - 1) {
            for (std::int64_t k = l; k < n; ++k) scale += std::abs(A(i, k));
            if (scale != 0) {
                for (std::int64_t k = l; k < n; ++k) {
                    A(i, k) /= scale;
                    s += A(i, k) * A(i, k);
                }
                double f = A(i, l);
                g = -sign(std::sqrt(s), f);
                double h = f * g - s;
                A(i, l) = f - g;
                for (std::int64_t k = l; k < n; ++k) rv1[k] = A(i, k) / h;
                for (std::int64_t j = l; j < m; ++j) {
                    s = 0;
                    for (std::int64_t k = l; k < n; ++k) s += A(j, k) * A(i, k);
                    for (std::int64_t k = l; k < n; ++k) A(j, k) += s * rv1[k];
                }
                for (std::int64_t k = l; k < n; ++k) A(i, k) *= scale;
            }
        }
        anorm = std::max(anorm, std::abs(w[i]) + std::abs(rv1[i]));
    }

    int total_its = 0;
    bool ok = true;
    for (std::int64_t k = n - 1; k >= 0; --k) {
        for (int its = 0;; ++its) {
            if (its >= 60) {
                ok = false;
                break;
            }
            ++total_its;
            bool flag = true;
            std::int64_t l, nm = 0;
            for (l = k; l >= 0; --l) {
                nm = l - 1;
                if (std::abs(rv1[l]) + anorm == anorm) {
                    flag = false;
                    break;
                }
                if (std::abs(w[nm]) + anorm == anorm) break;
            }
            if (flag) {
                // cancel rv1[l] against the zero diagonal above it
                double c = 0.0, s = 1.0;
                for (std::int64_t i = l; i <= k; ++i) {
                    double f = s * rv1[i];
                    rv1[i] = c * rv1[i];
                    if (std::abs(f) + anorm == anorm) break;
                    g = w[i];
                    double h = hypot2(f, g);
                    w[i] = h;
                    h = 1.0 / h;
                    c = g * h;
                    s = -f * h;
                }
            }
            double z = w[k];
            if (l == k) {
                if (z < 0) w[k] = -z;
                break;
            }
            double x = w[l];
            nm = k - 1;
            double y = w[nm];
            g = rv1[nm];
            double h = rv1[k];
            double f = ((y - z) * (y + z) + (g - h) * (g + h)) / (2.0 * h * y);
            g = hypot2(f, 1.0);
            f = ((x - z) * (x + z) + h * ((y / (f + sign(g, f))) - h)) / x;
            double c = 1.0, s = 1.0;
            for (std::int64_t j = l; j <= nm; ++j) {
                std::int64_t i = j + 1;
                g = rv1[i];
                y = w[i];
                h = s * g;
                g = c * g;
                z = hypot2(f, h);
                rv1[j] = z;
                c = f / z;
                s = h / z;
                f = x * c + g * s;
                g = g * c - x * s;
                h = y * s;
                y *= c;
                z = hypot2(f, h);
                w[j] = z;
                if (z != 0) {
                    z = 1.0 / z;
                    c = f * z;
                    s = h * z;
                }
                f = c * g + s * y;
                x = c * y - s * g;
            }
            rv1[l] = 0.0;
            rv1[k] = f;
            w[k] = x;
        }
    }
    if (iterations) *iterations = total_its;
    if (converged) *converged = ok;
    std::sort(w.begin(), w.end(), std::greater<>());
    return w;
}

double smallest_singular_value(const SparseBinaryMatrix& m, double rel_tol, bool* converged) {
    check_spectral_pre(m, rel_tol);
    const std::uint32_t n = m.n();
    std::vector<double> dense(static_cast<std::size_t>(n) * n, 0.0);
    for (std::size_t k = 0; k < m.nnz(); ++k) {
        auto [i, j] = m.entry(k);
        dense[static_cast<std::size_t>(j) * n + i] = 1.0;  // column-major
    }
    auto sv = dense_singular_values(std::move(dense), n, n, nullptr, converged);
    return sv.back();
}

// ---------------------------------------------------------------------------
// Householder QR utilities
// ---------------------------------------------------------------------------

namespace {

// In-place Householder QR of column-major r x c (r >= c). Reflector k is
// stored in column k, rows k..r-1; rdiag[k] receives R_kk.
void householder_qr(std::vector<double>& a, std::int64_t r, std::int64_t c,
                    std::vector<double>& rdiag) {
    rdiag.assign(c, 0.0);
    auto A = [&](std::int64_t i, std::int64_t j) -> double& { return a[j * r + i]; };
    for (std::int64_t k = 0; k < c; ++k) {
        double nrm = 0;
        for (std::int64_t i = k; i < r; ++i) nrm = std::hypot(nrm, A(i, k));
        if (nrm == 0) {
            rdiag[k] = 0;
            continue;
        }
        if (A(k, k) < 0) nrm = -nrm;
        for (std::int64_t i = k; i < r; ++i) A(i, k) /= nrm;
        A(k, k) += 1.0;
        for (std::int64_t j = k + 1; j < c; ++j) {
            double s = 0;
            for (std::int64_t i = k; i < r; ++i) s += A(i, k) * A(i, j);
            s = -s / A(k, k);
            for (std::int64_t i = k; i < r; ++i) A(i, j) += s * A(i, k);
        }
        rdiag[k] = -nrm;
    }
}

// Applies Q^T (product of stored reflectors, first to last) to v in place.
void apply_qt(const std::vector<double>& a, std::int64_t r, std::int64_t c,
              std::vector<double>& v) {
    auto A = [&](std::int64_t i, std::int64_t j) -> double { return a[j * r + i]; };
    for (std::int64_t k = 0; k < c; ++k) {
        if (A(k, k) == 0) continue;
        double s = 0;
        for (std::int64_t i = k; i < r; ++i) s += A(i, k) * v[i];
        s = -s / A(k, k);
        for (std::int64_t i = k; i < r; ++i) v[i] += s * A(i, k);
    }
}

// Applies Q (reflectors last to first) to v in place.
void apply_q(const std::vector<double>& a, std::int64_t r, std::int64_t c, std::vector<double>& v) {
    auto A = [&](std::int64_t i, std::int64_t j) -> double { return a[j * r + i]; };
    for (std::int64_t k = c - 1; k >= 0; --k) {
        if (A(k, k) == 0) continue;
        double s = 0;
        for (std::int64_t i = k; i < r; ++i) s += A(i, k) * v[i];
        s = -s / A(k, k);
        for (std::int64_t i = k; i < r; ++i) v[i] += s * A(i, k);
    }
}

// Dense column-major copy of M with one column dropped.
std::vector<double> complement_dense(const SparseBinaryMatrix& m, std::uint32_t dropped) {
    const std::uint32_t n = m.n();
    std::vector<double> a(static_cast<std::size_t>(n) * (n - 1), 0.0);
    for (std::size_t k = 0; k < m.nnz(); ++k) {
        auto [i, j] = m.entry(k);
        if (j == dropped) continue;
        std::uint32_t jj = j < dropped ? j : j - 1;
        a[static_cast<std::size_t>(jj) * n + i] = 1.0;
    }
    return a;
}

}  // namespace

double dist_to_complement_span(const SparseBinaryMatrix& m, std::uint32_t i) {
    const std::uint32_t n = m.n();
    if (i >= n) throw std::invalid_argument("dist_to_complement_span: column index out of range");
    if (n == 1) return std::sqrt(static_cast<double>(m.col_counts()[0]));  // span of no columns is {0}
    if (n > kSpectralMaxN) throw RegimeError("dist_to_complement_span: n exceeds cap 2048");

    auto a = complement_dense(m, i);
    std::vector<double> rdiag;
    householder_qr(a, n, n - 1, rdiag);

    std::vector<double> c(n, 0.0);
    for (std::size_t k = 0; k < m.nnz(); ++k) {
        auto [r, col] = m.entry(k);
        if (col == i) c[r] = 1.0;
    }
    apply_qt(a, n, n - 1, c);
    return std::abs(c[n - 1]);
}

std::optional<std::vector<double>> normal_to_complement(const SparseBinaryMatrix& m,
                                                        std::uint32_t dropped_col) {
    const std::uint32_t n = m.n();
    if (dropped_col >= n) throw std::invalid_argument("normal_to_complement: bad column");
    if (n < 2) return std::nullopt;
    auto a = complement_dense(m, dropped_col);
    std::vector<double> rdiag;
    householder_qr(a, n, n - 1, rdiag);
    const double tol = 1e-10 * std::sqrt(static_cast<double>(n)) * n;
    for (double d : rdiag)
        if (std::abs(d) <= tol) return std::nullopt;  // complement is rank deficient
    std::vector<double> v(n, 0.0);
    v[n - 1] = 1.0;
    apply_q(a, n, n - 1, v);
    double nv = norm2(v);
    for (auto& x : v) x /= nv;
    return v;
}

SpectralReport spectral_report(const SparseBinaryMatrix& m, double p, double rel_tol) {
    SpectralReport rep;
    rep.rel_tol = rel_tol;
    int it1 = 0, it2 = 0;
    bool c1 = true, c2 = true, c3 = true;
    rep.s_max = spectral_norm(m, rel_tol, &it1, &c1);
    rep.centered_norm = centered_spectral_norm(m, p, rel_tol, &it2, &c2);
    rep.s_min = smallest_singular_value(m, rel_tol, &c3);
    rep.s_max = std::max(rep.s_max, rep.s_min);
    rep.iterations = it1 + it2;
    rep.converged = c1 && c2 && c3;
    return rep;
}

std::string SpectralReport::to_json() const {
    nlohmann::json j;
    j["s_min"] = s_min;
    j["s_max"] = s_max;
    j["centered_norm"] = centered_norm;
    j["rel_tol"] = rel_tol;
    j["iterations"] = iterations;
    j["converged"] = converged;
    return j.dump();
}

}  // namespace bml
