#include "bml/anticonc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "bml/rng.hpp"

namespace bml {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double binom_log(std::uint32_t n, std::uint32_t k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Largest count of sorted values inside a closed window of width 2*tau.
std::uint64_t max_window_count(const std::vector<double>& sorted, double tau) {
    std::uint64_t best = 0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (j < i) j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] <= sorted[i] + 2.0 * tau) ++j;
        best = std::max<std::uint64_t>(best, j - i + 1);
    }
    return best;
}

}  // namespace

double psi_eval(const SmoothingPsi& psi, double t) {
    if (psi.K2 < 1.0) throw std::invalid_argument("psi_eval: K2 must be >= 1");
    if (t < 0.0) throw std::invalid_argument("psi_eval: t must be >= 0");
    const double b = 1.0 / psi.K2;
    const double a = 0.5 * b;
    if (t <= a) return b;
    if (t >= b) return t;
    // Quintic Hermite blend: value/slope/curvature (b, 0, 0) at a and
    // (b, 1, 0) at b.
    const double h = b - a;
    const double u = (t - a) / h;
    return b + h * u * u * u * (-4.0 + u * (7.0 - 3.0 * u));
}

double a_nm_log(std::uint32_t n, std::uint32_t m) {
    if (m < 1 || m > n) throw std::invalid_argument("a_nm_log: need 1 <= m <= n");
    const double b = std::floor(static_cast<double>(n) / m);
    return m * std::lgamma(b + 1.0) + std::lgamma(n - m * b + 1.0) - std::lgamma(n + 1.0);
}

unsigned __int128 sequence_count_exact(std::uint32_t n, std::uint32_t m) {
    if (m < 1 || m > n) throw std::invalid_argument("sequence_count_exact: need 1 <= m <= n");
    if (n > 33) throw BudgetError("sequence_count_exact: n too large for 128-bit result");
    const std::uint32_t b = n / m;
    unsigned __int128 total = 1;
    std::uint32_t remaining = n;
    for (std::uint32_t i = 0; i < m; ++i) {
        std::uint64_t c = 1;  // C(remaining, b) fits 64 bits for n <= 33
        for (std::uint32_t t = 1; t <= b; ++t) c = c * (remaining - b + t) / t;
        total *= c;
        remaining -= b;
    }
    return total;
}

double levy_q_fixed_support(std::span<const double> v, std::uint32_t m, double tau) {
    const std::uint32_t n = static_cast<std::uint32_t>(v.size());
    if (m < 1 || m > n) throw std::invalid_argument("levy_q_fixed_support: need 1 <= m <= n");
    if (tau < 0) throw std::invalid_argument("levy_q_fixed_support: tau must be >= 0");
    const double log_count = binom_log(n, m);
    if (log_count > std::log(static_cast<double>(kLevyOracleBudget)) + 1e-9)
        throw BudgetError("levy_q_fixed_support: C(n, m) exceeds oracle budget; use the MC variant");

    std::vector<double> sums;
    sums.reserve(static_cast<std::size_t>(std::exp(log_count) + 8));
    std::vector<std::uint32_t> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
        double s = 0;
        for (std::uint32_t i : idx) s += v[i];
        sums.push_back(s);
        // next combination in lexicographic order
        std::int64_t k = static_cast<std::int64_t>(m) - 1;
        while (k >= 0 && idx[k] == n - m + k) --k;
        if (k < 0) break;
        ++idx[k];
        for (std::int64_t t = k + 1; t < m; ++t) idx[t] = idx[t - 1] + 1;
    }
    std::sort(sums.begin(), sums.end());
    return static_cast<double>(max_window_count(sums, tau)) / static_cast<double>(sums.size());
}

LevyEstimate levy_q_fixed_support_mc(std::span<const double> v, std::uint32_t m, double tau,
                                     std::uint64_t samples, std::uint64_t seed) {
    const std::uint32_t n = static_cast<std::uint32_t>(v.size());
    if (m < 1 || m > n) throw std::invalid_argument("levy_q_fixed_support_mc: need 1 <= m <= n");
    Xoshiro256pp rng(seed);
    std::vector<std::uint32_t> pool(n);
    std::vector<double> sums;
    sums.reserve(samples);
    for (std::uint64_t t = 0; t < samples; ++t) {
        std::iota(pool.begin(), pool.end(), 0);
        double s = 0;
        for (std::uint32_t i = 0; i < m; ++i) {  // partial Fisher-Yates
            std::uint32_t j = i + static_cast<std::uint32_t>(rng.below(n - i));
            std::swap(pool[i], pool[j]);
            s += v[pool[i]];
        }
        sums.push_back(s);
    }
    std::sort(sums.begin(), sums.end());
    std::uint64_t hits = max_window_count(sums, tau);
    LevyEstimate est;
    est.samples = samples;
    est.estimate = static_cast<double>(hits) / static_cast<double>(samples);
    auto [lo, hi] = wilson_ci(hits, samples);
    est.lo = lo;
    est.hi = hi;
    return est;
}

double levy_q_iid(std::span<const double> v, double p, double tau) {
    const std::uint32_t n = static_cast<std::uint32_t>(v.size());
    if (n > 24) throw BudgetError("levy_q_iid: n > 24 exceeds the 2^n enumeration budget");
    if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("levy_q_iid: p must lie in (0,1)");
    std::vector<double> pw(n + 1), qw(n + 1);
    pw[0] = qw[0] = 1.0;
    for (std::uint32_t k = 1; k <= n; ++k) {
        pw[k] = pw[k - 1] * p;
        qw[k] = qw[k - 1] * (1.0 - p);
    }
    const std::uint64_t total = 1ULL << n;
    std::vector<std::pair<double, double>> atoms(total);  // (sum, weight)
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        double s = 0;
        for (std::uint32_t i = 0; i < n; ++i)
            if (mask >> i & 1) s += v[i];
        auto pc = static_cast<std::uint32_t>(__builtin_popcountll(mask));
        atoms[mask] = {s, pw[pc] * qw[n - pc]};
    }
    std::sort(atoms.begin(), atoms.end());
    // sliding closed window of width 2*tau maximizing total weight
    std::vector<double> prefix(atoms.size() + 1, 0.0);
    for (std::size_t t = 0; t < atoms.size(); ++t) prefix[t + 1] = prefix[t] + atoms[t].second;
    double best = 0.0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (j < i) j = i;
        while (j + 1 < atoms.size() && atoms[j + 1].first <= atoms[i].first + 2.0 * tau) ++j;
        best = std::max(best, prefix[j + 1] - prefix[i]);
    }
    return best;
}

PartitionSequence sample_partition(std::uint32_t n, std::uint32_t m, Xoshiro256pp& rng) {
    const std::uint32_t b = n / m;
    std::vector<std::uint32_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::uint32_t i = 0; i + 1 < n; ++i) {
        std::uint32_t j = i + static_cast<std::uint32_t>(rng.below(n - i));
        std::swap(pool[i], pool[j]);
    }
    PartitionSequence seq(m);
    for (std::uint32_t i = 0; i < m; ++i)
        seq[i].assign(pool.begin() + static_cast<std::size_t>(i) * b,
                      pool.begin() + static_cast<std::size_t>(i + 1) * b);
    return seq;
}

double ud_integrand(std::span<const double> v, const UDegreeParams& params,
                    const PartitionSequence& seq, double s) {
    const std::uint32_t b = static_cast<std::uint32_t>(v.size()) / params.m;
    SmoothingPsi psi{params.K2};
    double prod = 1.0;
    const double scale = kTwoPi * s / std::sqrt(static_cast<double>(params.m));
    for (const auto& subset : seq) {
        if (subset.size() != b) throw std::invalid_argument("ud_integrand: malformed partition");
        double re = 0, im = 0;
        for (std::uint32_t w : subset) {
            re += std::cos(scale * v[w]);
            im += std::sin(scale * v[w]);
        }
        double mod = std::sqrt(re * re + im * im) / static_cast<double>(subset.size());
        prod *= psi_eval(psi, std::min(mod, 1.0));
    }
    return prod;
}

namespace {

// Accumulates the integrand of one partition sample over the whole grid.
// Phases advance by complex rotation per grid step; exact trig restart
// every 8192 steps bounds the drift.
void accumulate_sample_grid(std::span<const double> v, const UDegreeParams& params,
                            const PartitionSequence& seq, double h, std::vector<double>& grid) {
    const std::uint32_t m = params.m;
    const std::uint32_t b = static_cast<std::uint32_t>(v.size()) / m;
    const std::size_t used = static_cast<std::size_t>(m) * b;
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));
    const SmoothingPsi psi{params.K2};

    std::vector<double> coord(used), zr(used, 1.0), zi(used, 0.0), rr(used), ri(used);
    for (std::uint32_t i = 0; i < m; ++i)
        for (std::uint32_t t = 0; t < b; ++t) coord[static_cast<std::size_t>(i) * b + t] = v[seq[i][t]];
    for (std::size_t w = 0; w < used; ++w) {
        double ang = kTwoPi * coord[w] * inv_sqrt_m * h;
        rr[w] = std::cos(ang);
        ri[w] = std::sin(ang);
    }

    const double bd = static_cast<double>(b);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (j != 0 && j % 8192 == 0) {
            double s = static_cast<double>(j) * h;
            for (std::size_t w = 0; w < used; ++w) {
                double ang = kTwoPi * coord[w] * inv_sqrt_m * s;
                zr[w] = std::cos(ang);
                zi[w] = std::sin(ang);
            }
        }
        double prod = 1.0;
        for (std::uint32_t i = 0; i < m; ++i) {
            const std::size_t base = static_cast<std::size_t>(i) * b;
            double sre = 0, sim = 0;
            for (std::uint32_t t = 0; t < b; ++t) {
                sre += zr[base + t];
                sim += zi[base + t];
            }
            double mod = std::sqrt(sre * sre + sim * sim) / bd;
            prod *= psi_eval(psi, std::min(mod, 1.0));
        }
        grid[j] += prod;
        for (std::size_t w = 0; w < used; ++w) {
            double nr = zr[w] * rr[w] - zi[w] * ri[w];
            zi[w] = zr[w] * ri[w] + zi[w] * rr[w];
            zr[w] = nr;
        }
    }
}

}  // namespace

UDegreeEstimate u_degree_estimate(std::span<const double> v, const UDegreeParams& params,
                                  std::uint64_t seed, unsigned workers) {
    const std::uint32_t n = static_cast<std::uint32_t>(v.size());
    if (params.m < 1 || params.m > n / 2)
        throw std::invalid_argument("u_degree_estimate: need 1 <= m <= n/2");
    if (params.K1 < 1 || params.K2 < 1)
        throw std::invalid_argument("u_degree_estimate: K1, K2 must be >= 1");
    if (params.partition_samples < 1 || params.quad_step_factor <= 0 || params.t_max <= 0)
        throw std::invalid_argument("u_degree_estimate: budgets must be positive");

    UDegreeEstimate est;
    double y = 0;
    for (double x : v) y = std::max(y, std::abs(x));

    if (y == 0.0) {  // integrand identically psi(1) = 1: criterion is 2t <= K1
        double ud = params.K1 / 2.0;
        est.censored = ud > params.t_max;
        est.ud_lower = est.ud_upper = est.censored ? params.t_max : ud;
        est.integral_at_ud = 2.0 * est.ud_lower;
        est.samples_used = params.partition_samples;
        return est;
    }

    // Grid step from the (8 K2 pi y m)-Lipschitz bound on the product.
    const double kPi = kTwoPi / 2.0;
    const double h = params.quad_step_factor / (8.0 * params.K2 * kPi * y * params.m);
    const double steps = std::ceil(params.t_max / h);
    if (steps > 6.7e7)
        throw BudgetError("u_degree_estimate: quadrature grid too large; raise quad_step_factor");
    const std::size_t grid_n = static_cast<std::size_t>(steps) + 1;

    const std::uint32_t S = params.partition_samples;
    std::vector<double> total(grid_n, 0.0);
    const unsigned wave = std::max(1u, std::min(S, 4 * std::max(1u, workers)));
    std::vector<std::vector<double>> slots(wave);
    for (std::uint32_t begin = 0; begin < S; begin += wave) {
        const std::uint32_t end = std::min(S, begin + wave);
        parallel_chunks(end - begin, workers, 1, [&](std::uint64_t lo, std::uint64_t hi) {
            for (std::uint64_t k = lo; k < hi; ++k) {
                Xoshiro256pp rng(seed, begin + k);
                auto seq = sample_partition(n, params.m, rng);
                auto& g = slots[k];
                g.assign(grid_n, 0.0);
                accumulate_sample_grid(v, params, seq, h, g);
            }
        });
        // in-order reduction keeps the result identical at any worker count
        for (std::uint32_t k = begin; k < end; ++k)
            for (std::size_t j = 0; j < grid_n; ++j) total[j] += slots[k - begin][j];
    }

    // F(t) = mean over samples of int_{-t}^{t} = 2 * prefix trapezoid (the
    // integrand is even in s).
    const double inv_s = 1.0 / static_cast<double>(S);
    double integral = 0.0;
    double prev_f = 0.0;
    std::size_t cut = grid_n;  // first grid index where F exceeds K1
    for (std::size_t j = 1; j < grid_n; ++j) {
        integral += 0.5 * h * (total[j - 1] + total[j]) * inv_s;
        double f = 2.0 * integral;
        if (f > params.K1) {
            cut = j;
            break;
        }
        prev_f = f;
    }
    est.samples_used = S;
    if (cut == grid_n) {
        est.censored = true;
        est.ud_lower = est.ud_upper = static_cast<double>(grid_n - 1) * h;
        est.integral_at_ud = prev_f;
    } else {
        est.ud_lower = static_cast<double>(cut - 1) * h;
        est.ud_upper = static_cast<double>(cut) * h;
        est.integral_at_ud = prev_f;
    }
    return est;
}

std::vector<double> randomized_round(std::span<const double> v, std::uint64_t k, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("randomized_round: k must be >= 1");
    Xoshiro256pp rng(seed);
    const double kd = static_cast<double>(k);
    std::vector<double> y(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double t = v[i] * kd;
        double f = std::floor(t);
        double frac = t - f;  // P{round up}
        if (frac <= 1e-12) {
            y[i] = f / kd;
        } else if (frac >= 1.0 - 1e-12) {
            y[i] = (f + 1.0) / kd;
        } else {
            y[i] = (rng.next_double() < frac ? f + 1.0 : f) / kd;
        }
    }
    return y;
}

std::string UDegreeEstimate::to_json(const UDegreeParams& params, std::uint64_t seed) const {
    nlohmann::json j;
    j["ud_lower"] = ud_lower;
    j["ud_upper"] = ud_upper;
    j["integral_at_ud"] = integral_at_ud;
    j["samples_used"] = samples_used;
    j["censored"] = censored;
    j["params"] = {{"m", params.m},
                   {"K1", params.K1},
                   {"K2", params.K2},
                   {"partition_samples", params.partition_samples},
                   {"quad_step_factor", params.quad_step_factor},
                   {"t_max", params.t_max}};
    j["seed"] = seed;
    return j.dump();
}

}  // namespace bml
