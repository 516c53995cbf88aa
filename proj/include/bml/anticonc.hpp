#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bml/common.hpp"

namespace bml {

// C^2 smoothing of max(1/K2, t): flat at 1/K2 below 1/(2 K2), identity
// above 1/K2, quintic Hermite blend in between (matching value and first
// two derivatives at both ends). 1-Lipschitz with bounded second
// derivative.
struct SmoothingPsi {
    double K2 = 8.0;
};

double psi_eval(const SmoothingPsi& psi, double t);

// Natural log of the sequence-count normalizer:
// ln A_{nm} = m lnG(floor(n/m)+1) + lnG(n - m floor(n/m) + 1) - lnG(n+1).
double a_nm_log(std::uint32_t n, std::uint32_t m);

// Exact number of ordered sequences of m disjoint subsets of [n], each of
// size floor(n/m): n! / ((floor(n/m)!)^m (n - m floor(n/m))!). Fits
// unsigned __int128 for n <= 33.
unsigned __int128 sequence_count_exact(std::uint32_t n, std::uint32_t m);

inline constexpr std::uint64_t kLevyOracleBudget = 10'000'000;

// Exact Levy concentration function Q(sum_i v_i X_i, tau) for X uniform on
// 0/1 vectors with exactly m ones, by enumerating all C(n, m) supports.
// Throws BudgetError if C(n, m) > kLevyOracleBudget.
double levy_q_fixed_support(std::span<const double> v, std::uint32_t m, double tau);

struct LevyEstimate {
    double estimate = 0.0;
    double lo = 0.0, hi = 0.0;  // Wilson 95% CI
    std::uint64_t samples = 0;
};

// Monte Carlo variant of the above for budgets past the oracle cap.
LevyEstimate levy_q_fixed_support_mc(std::span<const double> v, std::uint32_t m, double tau,
                                     std::uint64_t samples, std::uint64_t seed);

// Exact Q(sum_i v_i b_i, tau) for i.i.d. Bernoulli(p) b_i via weighted
// enumeration of all 2^n outcomes; n <= 24.
double levy_q_iid(std::span<const double> v, double p, double tau);

struct UDegreeParams {
    std::uint32_t m = 1;
    double K1 = 10.0;
    double K2 = 8.0;
    std::uint32_t partition_samples = 64;
    double quad_step_factor = 1.0;  // grid step multiplier vs the Lipschitz bound
    double t_max = 64.0;            // bisection ceiling (censored when reached)
};

struct UDegreeEstimate {
    double ud_lower = 0.0;
    double ud_upper = 0.0;
    double integral_at_ud = 0.0;
    std::uint64_t samples_used = 0;
    bool censored = false;

    std::string to_json(const UDegreeParams& params, std::uint64_t seed) const;
};

// A sequence of m pairwise disjoint subsets of [n], each of size
// floor(n/m), drawn uniformly.
using PartitionSequence = std::vector<std::vector<std::uint32_t>>;

class Xoshiro256pp;
PartitionSequence sample_partition(std::uint32_t n, std::uint32_t m, Xoshiro256pp& rng);

// prod_i psi_K2(|mean_{w in S_i} exp(2 pi i v_w s / sqrt(m))|); reference
// scalar evaluation used by tests and small callers.
double ud_integrand(std::span<const double> v, const UDegreeParams& params,
                    const PartitionSequence& seq, double s);

// Estimates UD_n(v, m, K1, K2) = sup{t : mean over sequences of
// int_{-t}^{t} integrand ds <= K1}. The average over sampled sequences is
// unbiased for the A_{nm}-normalized sum since A_{nm} x (sequence count)
// = 1. Trapezoid quadrature on a grid with step quad_step_factor /
// (8 K2 pi |v|_inf m), the integrand's Lipschitz bound.
UDegreeEstimate u_degree_estimate(std::span<const double> v, const UDegreeParams& params,
                                  std::uint64_t seed, unsigned workers = 1);

// Randomized rounding to the grid (1/k)Z^n: E Y = v and |v - Y|_inf <= 1/k.
std::vector<double> randomized_round(std::span<const double> v, std::uint64_t k,
                                     std::uint64_t seed);

}  // namespace bml
