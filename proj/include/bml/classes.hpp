#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bml/common.hpp"

namespace bml {

// Growth function g used by the gradual test: const_p uses (2t)^{3/2};
// general switches to exp(ln^2(2t)) at t = 64 p n.
struct GrowthFunction {
    enum class Kind { const_p, general };
    Kind kind = Kind::general;
    double p = 0.0;
    std::uint32_t n = 0;

    double operator()(double t) const;
};

// All classifier thresholds. The paper fixes these only as "sufficiently
// small/large" absolute constants; the defaults below are desk-scale
// choices and are recorded in every output.
struct ClassifierConfig {
    double r = 0.01;
    double delta = 0.01 / 3.01;
    double rho = 0.1;
    double C_tau = 100.0;
    double c_0 = 1e-3;
    double C_0 = 20.0;  // Rogozin constant stand-in
    GrowthFunction growth;
    double p = 0.0;
    std::uint32_t n = 0;
    bool constant_p_mode = false;
    std::uint32_t m_constp = 0;  // 0 => floor(r n)

    void validate() const;  // throws RegimeError / invalid_argument
    nlohmann::json to_json() const;
};

ClassifierConfig default_config(std::uint32_t n, double p, bool constant_p_mode = false);

// Index ladder for the steep classes: n_0 = 2, n_j = 30 l0^{j-1} for
// j <= s0, then the 1/(64p), sqrt(n/p) and rn levels.
struct SteepLadder {
    double d = 0.0;        // pn
    std::uint32_t ell0 = 0;
    std::uint32_t s0 = 0;
    std::vector<std::uint32_t> n_idx;  // n_idx[j], j = 0..s0+3, 1-based order-stat indices
    double kappa = 0.0;    // ln(6pn)/ln(l0)
};

// Throws RegimeError when l0 < 2 (p n too small for the ladder).
SteepLadder make_steep_ladder(std::uint32_t n, double p, double r);

enum class LabelKind { Vn, T0, T1j, T2, T3, R1, R2, B1, B2, B3k, B4k, unclassified };

const char* label_kind_name(LabelKind k);

struct ClassLabel {
    LabelKind kind = LabelKind::unclassified;
    int sub = 0;               // j for T1j, k for R1/R2/B3k/B4k
    double normalization = 1;  // scale divided out before classification
    nlohmann::json details;    // witness data re-verifying the label

    std::string to_string() const;
    nlohmann::json to_json() const;
};

// Non-increasing rearrangement of |x| plus the tie-stable permutation
// (sigma[i] = original index of the i-th largest magnitude).
struct OrderStats {
    std::vector<double> xstar;        // xstar[i-1] = x*_i
    std::vector<std::uint32_t> sigma;
};
OrderStats order_stats(std::span<const double> x);

// x / x*_{floor(rn)}; nullopt when x*_{floor(rn)} = 0 (degenerate).
std::optional<std::pair<std::vector<double>, double>> normalize_upsilon(std::span<const double> x,
                                                                        double r);

struct VnWitness {
    std::vector<std::uint32_t> Q1, Q2;
};

// Gradual test x*_i <= g(n/i) plus the non-constant condition, the latter
// evaluated through the signed-rearrangement equivalence
// x#_k - x#_{n-k+1} >= rho with k = ceil(delta n).
bool in_Vn(std::span<const double> x_normalized, const ClassifierConfig& cfg,
           VnWitness* witness = nullptr);

// First matching steep class in the order T0, T1_1..T1_{s0+1}, T2, T3;
// scale invariant.
std::optional<ClassLabel> classify_steep(std::span<const double> x, const SteepLadder& ladder,
                                         const ClassifierConfig& cfg);

// R-class membership at tail cut k (s = 1 or 2). Evaluates the flatness
// and norm-window conditions (plus AC(rho) for s = 1); exclusion of steep
// vectors is the caller's responsibility in the classification chain.
bool in_R(std::span<const double> x_normalized, std::uint32_t k, int s, const SteepLadder& ladder,
          const ClassifierConfig& cfg, nlohmann::json* witness = nullptr);

// Almost-constant vectors: some lambda with |lambda| = x*_{floor(rn)} puts
// all but floor(rn) coordinates within rho |lambda| of lambda.
bool in_AC(std::span<const double> x, const ClassifierConfig& cfg);

// Shifted sparse vectors U(m, gamma): all but m coordinates within
// gamma/sqrt(n) of some |lambda| <= 2/sqrt(m).
bool in_U(std::span<const double> x, std::uint32_t m, double gamma);

// V(beta): sup-norm at most 1 and ||Qx|| <= beta.
bool in_Vbeta(std::span<const double> x, double beta);

// |||x|||^2 = ||P_e x||^2 + p n ||P_e^perp x||^2 with e = 1/sqrt(n).
double triple_norm(std::span<const double> x, double p);

// Zeroes the single largest-magnitude coordinate (ties: lowest index).
std::vector<double> q_drop_max(std::span<const double> x);

// Constant-p classifier over B_1, B_2, B_3k, B_4k for unit vectors.
ClassLabel classify_constp(std::span<const double> x_unit, std::uint32_t m,
                           const ClassifierConfig& cfg);

// Full classifier: normalize, V_n, steep chain, R-scan over a geometric
// grid of tail cuts k (constant-p mode replaces T/R with the B classes).
// `unclassified` is a legal output.
ClassLabel classify(std::span<const double> x, const ClassifierConfig& cfg);

// For x in Upsilon_n(r) failing the non-constant condition: the (A, lambda)
// pair with |A| > n - floor(rn), |lambda| = 1 and |x_i - lambda| < rho on A
// whose existence the signed-rearrangement argument guarantees.
std::optional<std::pair<std::vector<std::uint32_t>, double>> almost_constant_witness(
    std::span<const double> x_normalized, const ClassifierConfig& cfg);

}  // namespace bml
