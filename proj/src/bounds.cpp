#include "bml/bounds.hpp"

#include <gmp.h>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bml/common.hpp"

namespace bml {

double bennett_h(double u) {
    if (u < 0) throw std::invalid_argument("bennett_h: u must be >= 0");
    if (u == 0) return 0.0;
    return (1.0 + u) * std::log1p(u) - u;
}

double bennett_tail_log(std::uint32_t n, double q, double t) {
    if (n < 1 || !(q > 0.0) || !(q < 1.0)) throw std::invalid_argument("bennett_tail: bad n or q");
    if (t < 0) throw std::invalid_argument("bennett_tail: t must be >= 0");
    const double mx = std::max(q, 1.0 - q);
    const double var = n * q * (1.0 - q);
    return -(var / (mx * mx)) * bennett_h(t * mx / var);
}

double bennett_tail_eps_log(std::uint32_t n, double q, double eps) {
    if (!(eps > 0.0) || !(eps <= q) || !(q <= 0.5))
        throw std::invalid_argument("bennett_tail_eps: need 0 < eps <= q <= 1/2");
    return -(n * eps * eps / (2.0 * q * (1.0 - q))) * (1.0 - eps / (3.0 * q));
}

double bennett_tail_tau_log(std::uint32_t n, double q, double tau) {
    const double e = std::exp(1.0);
    if (!(q > 0.0) || !(q <= 0.5) || !(tau > e))
        throw std::invalid_argument("bennett_tail_tau: need 0 < q <= 1/2 and tau > e");
    return -tau * std::log(tau / e) * q * static_cast<double>(n);
}

double bennett_tail(std::uint32_t n, double q, double t) {
    return std::min(1.0, std::exp(bennett_tail_log(n, q, t)));
}
double bennett_tail_eps(std::uint32_t n, double q, double eps) {
    return std::min(1.0, std::exp(bennett_tail_eps_log(n, q, eps)));
}
double bennett_tail_tau(std::uint32_t n, double q, double tau) {
    return std::min(1.0, std::exp(bennett_tail_tau_log(n, q, tau)));
}

double zero_row_probability(std::uint32_t n, double p) {
    // 1 - (1 - x)^n with x = (1-p)^n, kept accurate for tiny x.
    double log_x = n * std::log1p(-p);
    double x = std::exp(log_x);
    return -std::expm1(static_cast<double>(n) * std::log1p(-x));
}

namespace {

double log_binom(std::uint32_t n, std::uint32_t k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

struct SignSplitSum {
    KahanSum pos, neg;
    double max_log = -1e300;
};

// Inclusion-exclusion term (i, j) != (0, 0):
//   (-1)^{i+j+1} C(n,i) C(n,j) (1-p)^{ni+nj-ij}
double zero_rowcol_double(std::uint32_t n, double p, double* cancellation) {
    const double lq = std::log1p(-p);
    double max_log = -1e300;
    std::vector<double> logs;
    std::vector<int> signs;
    logs.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
    signs.reserve(logs.capacity());
    for (std::uint32_t i = 0; i <= n; ++i) {
        for (std::uint32_t j = 0; j <= n; ++j) {
            if (i == 0 && j == 0) continue;
            double e = static_cast<double>(n) * i + static_cast<double>(n) * j -
                       static_cast<double>(i) * j;
            double lg = log_binom(n, i) + log_binom(n, j) + e * lq;
            logs.push_back(lg);
            signs.push_back((i + j) % 2 == 1 ? +1 : -1);
            max_log = std::max(max_log, lg);
        }
    }
    KahanSum pos, neg;
    for (std::size_t t = 0; t < logs.size(); ++t) {
        double v = std::exp(logs[t] - max_log);
        if (signs[t] > 0)
            pos.add(v);
        else
            neg.add(v);
    }
    double diff = pos.value() - neg.value();
    double scale = std::max(pos.value(), neg.value());
    *cancellation = scale > 0 ? std::abs(diff) / scale : 1.0;
    return diff * std::exp(max_log);
}

}  // namespace

double zero_rowcol_exact_hp(std::uint32_t n, double p) {
    if (n < 1 || n > 400) throw std::invalid_argument("zero_rowcol_exact: need 1 <= n <= 400");
    const int prec = 768;
    mpfr_t q, term, acc, binpow;
    mpfr_inits2(prec, q, term, acc, binpow, static_cast<mpfr_ptr>(nullptr));
    mpfr_set_d(q, 1.0, MPFR_RNDN);
    mpfr_sub_d(q, q, p, MPFR_RNDN);  // exact double 1-p rounding handled in 768 bits
    mpfr_set_zero(acc, 1);

    mpz_t bi, bj, bij;
    mpz_inits(bi, bj, bij, nullptr);
    for (std::uint32_t i = 0; i <= n; ++i) {
        mpz_bin_uiui(bi, n, i);
        for (std::uint32_t j = 0; j <= n; ++j) {
            if (i == 0 && j == 0) continue;
            mpz_bin_uiui(bj, n, j);
            mpz_mul(bij, bi, bj);
            unsigned long e = static_cast<unsigned long>(n) * i + static_cast<unsigned long>(n) * j -
                              static_cast<unsigned long>(i) * j;
            mpfr_pow_ui(binpow, q, e, MPFR_RNDN);
            mpfr_mul_z(term, binpow, bij, MPFR_RNDN);
            if ((i + j) % 2 == 1)
                mpfr_add(acc, acc, term, MPFR_RNDN);
            else
                mpfr_sub(acc, acc, term, MPFR_RNDN);
        }
    }
    double out = mpfr_get_d(acc, MPFR_RNDN);
    mpz_clears(bi, bj, bij, nullptr);
    mpfr_clears(q, term, acc, binpow, static_cast<mpfr_ptr>(nullptr));
    return out;
}

double zero_rowcol_exact(std::uint32_t n, double p) {
    if (n < 1 || n > 400) throw std::invalid_argument("zero_rowcol_exact: need 1 <= n <= 400");
    if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("zero_rowcol_exact: p in (0,1)");
    double cancellation = 1.0;
    double fast = zero_rowcol_double(n, p, &cancellation);
    // Escalate when the alternating sum cancels past the point where the
    // double path can hold the 1e-9 agreement target.
    if (cancellation < 1e-3 || fast < 0.0 || fast > 1.0) return zero_rowcol_exact_hp(n, p);
    return fast;
}

double zero_rowcol_lower_bound(std::uint32_t n, double p) {
    double log_x = n * std::log1p(-p);
    double x = std::exp(log_x);  // (1-p)^n
    double first = 2.0 - 2.0 * std::pow(1.0 - x, static_cast<double>(n));
    double second = 4.0 * static_cast<double>(n) * n * std::exp((2.0 * n - 1.0) * std::log1p(-p));
    return first - second;
}

double singularity_prediction(std::uint32_t n, double p) {
    if (p == 0.0) return 2.0 * n;
    return 2.0 * static_cast<double>(n) * std::exp(n * std::log1p(-p));
}

double net_cardinality_log(std::uint32_t n, std::uint32_t m, double p, double eps, double beta) {
    if (m < 1 || m > n) throw std::invalid_argument("net_cardinality_log: need 1 <= m <= n");
    if (!(eps > 0.0) || !(beta > 0.0) || !(p > 0.0))
        throw std::invalid_argument("net_cardinality_log: eps, beta, p must be positive");
    double front = 10.0 * std::log(2.0) + 0.5 * std::log(p) + 2.0 * std::log(n) -
                   2.0 * std::log(eps) - 0.5 * std::log(static_cast<double>(m));
    return front + m * std::log(9.0 * beta / eps) + log_binom(n, m);
}

RegimeCheck regime_check(std::uint32_t n, double p, double C) {
    if (C < 1.0) throw std::invalid_argument("regime_check: C must be >= 1");
    RegimeCheck rc;
    rc.n = n;
    rc.p = p;
    double ln_n = std::log(static_cast<double>(n));
    rc.np_over_logn = ln_n > 0 ? n * p / ln_n : std::numeric_limits<double>::infinity();
    rc.in_theorem_regime = (n * p >= C * ln_n) && (p <= 1.0 / C);
    return rc;
}

}  // namespace bml
