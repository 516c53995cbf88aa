#include "bml/classes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bml {

double GrowthFunction::operator()(double t) const {
    if (t < 1.0) t = 1.0;
    if (kind == Kind::general && t >= 64.0 * p * static_cast<double>(n)) {
        double l = std::log(2.0 * t);
        return std::exp(l * l);
    }
    return std::pow(2.0 * t, 1.5);
}

void ClassifierConfig::validate() const {
    if (n == 0 || !(p > 0.0) || !(p < 1.0))
        throw std::invalid_argument("ClassifierConfig: need n >= 1 and p in (0,1)");
    if (!(delta > 0.0 && delta < r / 3.0 && r / 3.0 < 1.0))
        throw std::invalid_argument("ClassifierConfig: need 0 < delta < r/3 < 1");
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("ClassifierConfig: rho in (0,1)");
    if (C_tau <= 0 || c_0 <= 0 || C_0 <= 0)
        throw std::invalid_argument("ClassifierConfig: constants must be positive");
    if (static_cast<std::uint32_t>(r * n) < 2)
        throw RegimeError("ClassifierConfig: floor(r n) < 2; n too small for this r");
}

nlohmann::json ClassifierConfig::to_json() const {
    return {{"r", r},
            {"delta", delta},
            {"rho", rho},
            {"C_tau", C_tau},
            {"c_0", c_0},
            {"C_0", C_0},
            {"growth", growth.kind == GrowthFunction::Kind::const_p ? "const_p" : "general"},
            {"p", p},
            {"n", n},
            {"constant_p_mode", constant_p_mode},
            {"m_constp", m_constp}};
}

ClassifierConfig default_config(std::uint32_t n, double p, bool constant_p_mode) {
    ClassifierConfig cfg;
    cfg.n = n;
    cfg.p = p;
    cfg.delta = cfg.r / 3.01;
    cfg.constant_p_mode = constant_p_mode;
    cfg.growth.kind =
        constant_p_mode ? GrowthFunction::Kind::const_p : GrowthFunction::Kind::general;
    cfg.growth.p = p;
    cfg.growth.n = n;
    return cfg;
}

SteepLadder make_steep_ladder(std::uint32_t n, double p, double r) {
    SteepLadder lad;
    lad.d = p * static_cast<double>(n);
    double l0 = std::floor(lad.d / (4.0 * std::log(1.0 / p)));
    if (l0 < 2.0) throw RegimeError("make_steep_ladder: l0 < 2 (p n too small)");
    lad.ell0 = static_cast<std::uint32_t>(l0);

    const double inv64p = 1.0 / (64.0 * p);
    std::uint32_t s0 = 1;
    double pw = l0;
    while (pw <= inv64p) {
        pw *= l0;
        ++s0;
    }
    lad.s0 = s0;

    lad.n_idx.assign(s0 + 4, 0);
    lad.n_idx[0] = 2;
    double nj = 30.0;
    for (std::uint32_t j = 1; j <= s0; ++j) {
        lad.n_idx[j] = static_cast<std::uint32_t>(std::min(nj, static_cast<double>(n)));
        nj *= l0;
    }
    auto floor64p = static_cast<std::uint32_t>(inv64p);
    lad.n_idx[s0 + 1] = floor64p >= 15 * lad.n_idx[s0] ? floor64p : lad.n_idx[s0];
    lad.n_idx[s0 + 2] =
        static_cast<std::uint32_t>(std::sqrt(static_cast<double>(n) / p));
    lad.n_idx[s0 + 3] = static_cast<std::uint32_t>(r * n);
    if (lad.n_idx[s0 + 2] <= lad.n_idx[s0 + 1])
        throw RegimeError("make_steep_ladder: ladder not increasing at s0+2");
    for (std::uint32_t j = 0; j < lad.n_idx.size(); ++j)
        if (lad.n_idx[j] < 1 || lad.n_idx[j] > n)
            throw RegimeError("make_steep_ladder: ladder index out of [1, n]");
    lad.kappa = std::log(6.0 * lad.d) / std::log(l0);
    return lad;
}

const char* label_kind_name(LabelKind k) {
    switch (k) {
        case LabelKind::Vn: return "Vn";
        case LabelKind::T0: return "T0";
        case LabelKind::T1j: return "T1";
        case LabelKind::T2: return "T2";
        case LabelKind::T3: return "T3";
        case LabelKind::R1: return "R1";
        case LabelKind::R2: return "R2";
        case LabelKind::B1: return "B1";
        case LabelKind::B2: return "B2";
        case LabelKind::B3k: return "B3";
        case LabelKind::B4k: return "B4";
        case LabelKind::unclassified: return "unclassified";
    }
    return "?";
}

std::string ClassLabel::to_string() const {
    std::string s = label_kind_name(kind);
    if (kind == LabelKind::T1j || kind == LabelKind::R1 || kind == LabelKind::R2 ||
        kind == LabelKind::B3k || kind == LabelKind::B4k)
        s += "(" + std::to_string(sub) + ")";
    return s;
}

nlohmann::json ClassLabel::to_json() const {
    return {{"label", to_string()},
            {"normalization", normalization},
            {"witness", details}};
}

OrderStats order_stats(std::span<const double> x) {
    OrderStats st;
    const auto n = static_cast<std::uint32_t>(x.size());
    st.sigma.resize(n);
    std::iota(st.sigma.begin(), st.sigma.end(), 0);
    std::stable_sort(st.sigma.begin(), st.sigma.end(), [&](std::uint32_t a, std::uint32_t b) {
        return std::abs(x[a]) > std::abs(x[b]);
    });
    st.xstar.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) st.xstar[i] = std::abs(x[st.sigma[i]]);
    return st;
}

std::optional<std::pair<std::vector<double>, double>> normalize_upsilon(std::span<const double> x,
                                                                        double r) {
    const auto n = static_cast<std::uint32_t>(x.size());
    bool all_zero = std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
    if (all_zero) throw std::invalid_argument("normalize_upsilon: zero vector");
    auto m = static_cast<std::uint32_t>(r * n);
    if (m < 1) throw RegimeError("normalize_upsilon: floor(r n) < 1");
    auto st = order_stats(x);
    double scale = st.xstar[m - 1];
    if (scale == 0.0) return std::nullopt;
    std::vector<double> y(x.begin(), x.end());
    for (auto& v : y) v /= scale;
    return std::make_pair(std::move(y), scale);
}

namespace {

// Signed non-increasing rearrangement (no absolute values).
std::vector<double> signed_sorted_desc(std::span<const double> x) {
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end(), std::greater<>());
    return s;
}

}  // namespace

bool in_Vn(std::span<const double> x, const ClassifierConfig& cfg, VnWitness* witness) {
    const auto n = static_cast<std::uint32_t>(x.size());
    auto m = static_cast<std::uint32_t>(cfg.r * n);
    auto st = order_stats(x);
    if (std::abs(st.xstar[m - 1] - 1.0) > 1e-9)
        throw std::invalid_argument("in_Vn: input must be Upsilon-normalized (x*_{rn} = 1)");

    for (std::uint32_t i = 1; i <= n; ++i) {
        if (st.xstar[i - 1] > cfg.growth(static_cast<double>(n) / i)) return false;
    }

    const auto k = static_cast<std::uint32_t>(std::ceil(cfg.delta * n));
    if (k < 1 || 2 * k > n) return false;
    std::vector<std::uint32_t> by_value(n);
    std::iota(by_value.begin(), by_value.end(), 0);
    std::stable_sort(by_value.begin(), by_value.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return x[a] > x[b]; });
    double top = x[by_value[k - 1]];        // x#_k
    double bottom = x[by_value[n - k]];     // x#_{n-k+1}
    if (top - bottom < cfg.rho) return false;
    if (witness) {
        witness->Q1.assign(by_value.begin(), by_value.begin() + k);
        witness->Q2.assign(by_value.end() - k, by_value.end());
    }
    return true;
}

std::optional<ClassLabel> classify_steep(std::span<const double> x, const SteepLadder& ladder,
                                         const ClassifierConfig& cfg) {
    auto st = order_stats(x);
    auto xs = [&](std::uint32_t one_based) { return st.xstar[one_based - 1]; };
    const double d = ladder.d;

    auto make = [&](LabelKind kind, int sub, std::uint32_t lo, std::uint32_t hi, double thr) {
        ClassLabel lab;
        lab.kind = kind;
        lab.sub = sub;
        lab.details = {{"idx_hi", lo},       {"idx_lo", hi},        {"xstar_hi", xs(lo)},
                       {"xstar_lo", xs(hi)}, {"threshold_factor", thr}};
        return lab;
    };

    if (xs(1) > 6.0 * d * xs(2)) return make(LabelKind::T0, 0, 1, 2, 6.0 * d);
    for (std::uint32_t j = 1; j <= ladder.s0 + 1; ++j) {
        if (xs(ladder.n_idx[j - 1]) > 6.0 * d * xs(ladder.n_idx[j]))
            return make(LabelKind::T1j, static_cast<int>(j), ladder.n_idx[j - 1], ladder.n_idx[j],
                        6.0 * d);
    }
    const double ct_sqrt_d = cfg.C_tau * std::sqrt(d);
    for (int kcls = 2; kcls <= 3; ++kcls) {
        std::uint32_t j = ladder.s0 + static_cast<std::uint32_t>(kcls);
        if (xs(ladder.n_idx[j - 1]) > ct_sqrt_d * xs(ladder.n_idx[j]))
            return make(kcls == 2 ? LabelKind::T2 : LabelKind::T3, 0, ladder.n_idx[j - 1],
                        ladder.n_idx[j], ct_sqrt_d);
    }
    return std::nullopt;
}

bool in_R(std::span<const double> x, std::uint32_t k, int s, const SteepLadder& ladder,
          const ClassifierConfig& cfg, nlohmann::json* witness) {
    const auto n = static_cast<std::uint32_t>(x.size());
    const double d = ladder.d;
    const double k_hi = static_cast<double>(n) / (std::log(d) * std::log(d));
    if (k <= ladder.n_idx[ladder.s0 + 1] || static_cast<double>(k) > k_hi)
        throw std::invalid_argument("in_R: k out of range (n_{s0+1}, n/ln^2 d]");
    if (s != 1 && s != 2) throw std::invalid_argument("in_R: s must be 1 or 2");

    auto st = order_stats(x);
    double tail_sq = 0.0;
    for (std::uint32_t i = k; i <= n; ++i) tail_sq += st.xstar[i - 1] * st.xstar[i - 1];
    const double tail_norm = std::sqrt(tail_sq);
    const double tail_inf = st.xstar[k - 1];

    if (tail_inf <= 0.0) return false;
    const double flat_thr = cfg.C_0 / std::sqrt(cfg.p);
    if (tail_norm / tail_inf < flat_thr) return false;

    double win_lo, win_hi;
    if (s == 1) {
        if (!in_AC(x, cfg)) return false;
        win_lo = std::sqrt(static_cast<double>(n) / 2.0);
        win_hi = cfg.C_tau * std::sqrt(d * static_cast<double>(n));
    } else {
        win_lo = 2.0 * std::sqrt(static_cast<double>(n)) / cfg.r;
        win_hi = cfg.C_tau * cfg.C_tau * d * std::sqrt(static_cast<double>(n));
    }
    if (!(win_lo <= tail_norm && tail_norm <= win_hi)) return false;
    if (witness) {
        *witness = {{"k", k},
                    {"s", s},
                    {"tail_norm", tail_norm},
                    {"tail_inf", tail_inf},
                    {"flat_threshold", flat_thr},
                    {"window_lo", win_lo},
                    {"window_hi", win_hi}};
    }
    return true;
}

bool in_AC(std::span<const double> x, const ClassifierConfig& cfg) {
    const auto n = static_cast<std::uint32_t>(x.size());
    auto m = static_cast<std::uint32_t>(cfg.r * n);
    auto st = order_stats(x);
    const double mag = st.xstar[m - 1];
    for (double lambda : {mag, -mag}) {
        std::uint32_t cnt = 0;
        for (double v : x)
            if (std::abs(v - lambda) <= cfg.rho * std::abs(lambda)) ++cnt;
        if (cnt > n - m) return true;
        if (mag == 0.0) break;
    }
    return false;
}

bool in_U(std::span<const double> x, std::uint32_t m, double gamma) {
    const auto n = static_cast<std::uint32_t>(x.size());
    const double lam_max = 2.0 / std::sqrt(static_cast<double>(m));
    if (m >= n) return true;  // |A| = n - m <= 0: any lambda works
    const double slack = gamma / std::sqrt(static_cast<double>(n));
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    const std::uint32_t len = n - m;
    for (std::uint32_t i = 0; i + len <= n; ++i) {
        double lo = std::max(s[i + len - 1] - slack, -lam_max);
        double hi = std::min(s[i] + slack, lam_max);
        if (lo <= hi) return true;
    }
    return false;
}

bool in_Vbeta(std::span<const double> x, double beta) {
    double inf = 0.0;
    for (double v : x) inf = std::max(inf, std::abs(v));
    if (inf > 1.0) return false;
    auto q = q_drop_max(x);
    double s = 0.0;
    for (double v : q) s += v * v;
    return std::sqrt(s) <= beta;
}

double triple_norm(std::span<const double> x, double p) {
    const auto n = static_cast<double>(x.size());
    double sum = 0.0, sq = 0.0;
    for (double v : x) {
        sum += v;
        sq += v * v;
    }
    double along = sum * sum / n;  // ||P_e^perp x||^2
    double perp = std::max(0.0, sq - along);
    return std::sqrt(perp + p * n * along);
}

std::vector<double> q_drop_max(std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    if (y.empty()) return y;
    std::size_t arg = 0;
    for (std::size_t i = 1; i < y.size(); ++i)
        if (std::abs(y[i]) > std::abs(y[arg])) arg = i;  // ties keep lowest index
    y[arg] = 0.0;
    return y;
}

ClassLabel classify_constp(std::span<const double> x, std::uint32_t m,
                           const ClassifierConfig& cfg) {
    double nrm = 0.0;
    for (double v : x) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (std::abs(nrm - 1.0) > 1e-10)
        throw std::invalid_argument("classify_constp: input must be a unit vector");

    const double pn = cfg.p * static_cast<double>(cfg.n);
    const double beta_p = std::sqrt(cfg.p) / cfg.C_0;
    auto st = order_stats(x);
    const double x1 = st.xstar[0];
    const double x2 = st.xstar.size() > 1 ? st.xstar[1] : 0.0;

    ClassLabel lab;
    lab.kind = LabelKind::unclassified;
    if (x1 > 6.0 * pn * x2) {
        lab.kind = LabelKind::B1;
        lab.details = {{"x1", x1}, {"x2", x2}, {"threshold", 6.0 * pn}};
        return lab;
    }
    if (x1 <= beta_p) {  // B2' holds; membership then hinges on U(m, c_0)
        if (in_U(x, m, cfg.c_0)) {
            lab.kind = LabelKind::B2;
            lab.details = {{"x1", x1}, {"beta_p", beta_p}, {"m", m}, {"gamma", cfg.c_0}};
        }
        return lab;
    }

    auto ladder_to_one = [](double first) {
        std::vector<double> lv;
        if (first < 1.0) {
            lv.push_back(first);
            while (lv.back() < 1.0 / 3.0) lv.push_back(3.0 * lv.back());
        }
        lv.push_back(1.0);
        return lv;
    };

    auto qx = q_drop_max(x);
    double qn = 0.0;
    for (double v : qx) qn += v * v;
    qn = std::sqrt(qn);

    if (x2 <= beta_p * qn) {
        auto lambdas = ladder_to_one(1.0 / (6.0 * pn));
        for (std::size_t k = 0; k + 1 < lambdas.size(); ++k) {
            if (lambdas[k] <= qn && qn < lambdas[k + 1]) {
                double gamma = cfg.c_0 * lambdas[k];
                if (in_U(x, m, gamma)) {
                    lab.kind = LabelKind::B3k;
                    lab.sub = static_cast<int>(k + 1);
                    lab.details = {{"qnorm", qn},       {"lambda_k", lambdas[k]},
                                   {"lambda_k1", lambdas[k + 1]}, {"x2", x2},
                                   {"beta_p", beta_p},  {"gamma", gamma},
                                   {"m", m}};
                }
                return lab;
            }
        }
        return lab;
    }

    auto mus = ladder_to_one(beta_p / (6.0 * pn));
    for (std::size_t k = 0; k + 1 < mus.size(); ++k) {
        if (mus[k] <= x2 && x2 < mus[k + 1]) {
            double gamma = cfg.c_0 * mus[k] / std::sqrt(std::log(std::exp(1.0) / cfg.p));
            if (in_U(x, m, gamma)) {
                lab.kind = LabelKind::B4k;
                lab.sub = static_cast<int>(k + 1);
                lab.details = {{"x2", x2},         {"mu_k", mus[k]}, {"mu_k1", mus[k + 1]},
                               {"qnorm", qn},      {"beta_p", beta_p}, {"gamma", gamma},
                               {"m", m}};
            }
            return lab;
        }
    }
    return lab;
}

namespace {

// <= 64 geometric points covering (lo, hi], endpoints included.
std::vector<std::uint32_t> k_grid(std::uint32_t lo_excl, std::uint32_t hi) {
    std::vector<std::uint32_t> ks;
    if (hi <= lo_excl) return ks;
    const std::uint32_t lo = lo_excl + 1;
    const double ratio = static_cast<double>(hi) / lo;
    for (int t = 0; t < 64; ++t) {
        double f = static_cast<double>(t) / 63.0;
        auto k = static_cast<std::uint32_t>(std::lround(lo * std::pow(ratio, f)));
        k = std::clamp(k, lo, hi);
        if (ks.empty() || ks.back() != k) ks.push_back(k);
    }
    return ks;
}

}  // namespace

ClassLabel classify(std::span<const double> x, const ClassifierConfig& cfg) {
    cfg.validate();
    const auto n = static_cast<std::uint32_t>(x.size());
    if (n != cfg.n) throw std::invalid_argument("classify: vector length != cfg.n");
    bool all_zero = std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
    if (all_zero) throw std::invalid_argument("classify: zero vector");

    if (cfg.constant_p_mode) {
        double nrm = 0.0;
        for (double v : x) nrm += v * v;
        nrm = std::sqrt(nrm);
        std::vector<double> unit(x.begin(), x.end());
        for (auto& v : unit) v /= nrm;
        std::uint32_t m = cfg.m_constp ? cfg.m_constp : static_cast<std::uint32_t>(cfg.r * n);
        ClassLabel lab = classify_constp(unit, m, cfg);
        lab.normalization = nrm;
        return lab;
    }

    auto ladder = make_steep_ladder(n, cfg.p, cfg.r);
    auto normalized = normalize_upsilon(x, cfg.r);
    if (!normalized) {
        // x*_{rn} = 0: such vectors are limits of steep vectors; the steep
        // chain is scale invariant, so evaluate it on x directly.
        auto steep = classify_steep(x, ladder, cfg);
        ClassLabel lab = steep ? *steep : ClassLabel{};
        lab.normalization = 0.0;
        lab.details["degenerate_normalization"] = true;
        return lab;
    }
    auto& [y, scale] = *normalized;

    VnWitness w;
    if (in_Vn(y, cfg, &w)) {
        ClassLabel lab;
        lab.kind = LabelKind::Vn;
        lab.normalization = scale;
        lab.details = {{"Q1", w.Q1}, {"Q2", w.Q2}};
        return lab;
    }
    if (auto steep = classify_steep(y, ladder, cfg)) {
        steep->normalization = scale;
        return *steep;
    }

    const double d = ladder.d;
    const auto k_hi = static_cast<std::uint32_t>(static_cast<double>(n) /
                                                 (std::log(d) * std::log(d)));
    for (std::uint32_t k : k_grid(ladder.n_idx[ladder.s0 + 1], k_hi)) {
        for (int s : {1, 2}) {
            nlohmann::json wit;
            if (in_R(y, k, s, ladder, cfg, &wit)) {
                ClassLabel lab;
                lab.kind = s == 1 ? LabelKind::R1 : LabelKind::R2;
                lab.sub = static_cast<int>(k);
                lab.normalization = scale;
                lab.details = wit;
                return lab;
            }
        }
    }
    ClassLabel lab;
    lab.normalization = scale;
    return lab;
}

std::optional<std::pair<std::vector<std::uint32_t>, double>> almost_constant_witness(
    std::span<const double> x, const ClassifierConfig& cfg) {
    const auto n = static_cast<std::uint32_t>(x.size());
    const auto k = static_cast<std::uint32_t>(std::ceil(cfg.delta * n));
    const auto m = static_cast<std::uint32_t>(cfg.r * n);
    if (!(n >= 2 * m && 2 * m > 4 * k)) return std::nullopt;  // lemma hypotheses

    std::vector<std::uint32_t> by_value(n);
    std::iota(by_value.begin(), by_value.end(), 0);
    std::stable_sort(by_value.begin(), by_value.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return x[a] > x[b]; });
    if (x[by_value[k - 1]] - x[by_value[n - k]] >= cfg.rho) return std::nullopt;  // cond2 holds

    std::vector<std::uint32_t> A(by_value.begin() + k, by_value.begin() + (n - k));
    double lambda = 0.0;
    bool found = false;
    for (std::uint32_t idx : A) {
        if (std::abs(std::abs(x[idx]) - 1.0) <= 1e-9) {
            lambda = x[idx];
            found = true;
            break;
        }
    }
    if (!found) return std::nullopt;
    for (std::uint32_t idx : A)
        if (!(std::abs(x[idx] - lambda) < cfg.rho)) return std::nullopt;
    return std::make_pair(std::move(A), lambda);
}

}  // namespace bml
