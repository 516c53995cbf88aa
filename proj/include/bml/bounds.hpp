#pragma once

#include <cstdint>
#include <string>

namespace bml {

struct RegimeCheck {
    std::uint32_t n = 0;
    double p = 0.0;
    double np_over_logn = 0.0;
    bool in_theorem_regime = false;
};

// h(u) = (1+u) ln(1+u) - u.
double bennett_h(double u);

// Natural logs of the three Bennett-type tail bounds (values can underflow
// double, so the log form is primary; the plain forms clip to [0, 1]).
double bennett_tail_log(std::uint32_t n, double q, double t);
double bennett_tail_eps_log(std::uint32_t n, double q, double eps);
double bennett_tail_tau_log(std::uint32_t n, double q, double tau);
double bennett_tail(std::uint32_t n, double q, double t);
double bennett_tail_eps(std::uint32_t n, double q, double eps);
double bennett_tail_tau(std::uint32_t n, double q, double tau);

// P{some row of an n x n Bernoulli(p) matrix is zero} = 1 - (1-(1-p)^n)^n.
double zero_row_probability(std::uint32_t n, double p);

// Exact inclusion-exclusion probability that the matrix has a zero row or
// a zero column. Sign-split log-sum-exp with a cancellation monitor that
// escalates to 768-bit MPFR arithmetic; n <= 400.
double zero_rowcol_exact(std::uint32_t n, double p);

// The same sum evaluated directly in high precision (test oracle and
// escalation backend).
double zero_rowcol_exact_hp(std::uint32_t n, double p);

// 2 - 2(1-(1-p)^n)^n - 4 n^2 (1-p)^{2n-1}; may be negative (returned raw).
double zero_rowcol_lower_bound(std::uint32_t n, double p);

// Leading-order singularity prediction 2 n (1-p)^n.
double singularity_prediction(std::uint32_t n, double p);

// ln of the epsilon-net cardinality bound
// (2^10 sqrt(p) n^2 / (eps^2 sqrt(m))) (9 beta/eps)^m C(n, m).
double net_cardinality_log(std::uint32_t n, std::uint32_t m, double p, double eps, double beta);

RegimeCheck regime_check(std::uint32_t n, double p, double C);

}  // namespace bml
