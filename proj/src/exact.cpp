#include "bml/exact.hpp"

#include <gmpxx.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "bml/rng.hpp"

namespace bml {

const char* to_string(SingularMethod m) {
    switch (m) {
        case SingularMethod::early_nonzero_mod_p: return "early_nonzero_mod_p";
        case SingularMethod::crt_certified_zero: return "crt_certified_zero";
        case SingularMethod::rank_deficient: return "rank_deficient";
    }
    return "?";
}

std::string SingularityVerdict::to_json() const {
    nlohmann::json j;
    j["singular"] = singular;
    j["method"] = to_string(method);
    j["primes_used"] = primes_used;
    j["det_residues"] = det_residues;
    j["hadamard_log2_bound"] = hadamard_log2_bound;
    if (rank)
        j["rank"] = *rank;
    else
        j["rank"] = nullptr;
    return j.dump();
}

namespace {

using u128 = unsigned __int128;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t q) {
    return static_cast<std::uint64_t>(static_cast<u128>(a) * b % q);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t q) {
    std::uint64_t r = 1 % q;
    a %= q;
    while (e) {
        if (e & 1) r = mulmod(r, a, q);
        a = mulmod(a, a, q);
        e >>= 1;
    }
    return r;
}

bool miller_rabin_round(std::uint64_t n, std::uint64_t a, std::uint64_t d, int s) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) return true;
    for (int i = 1; i < s; ++i) {
        x = mulmod(x, x, n);
        if (x == n - 1) return true;
    }
    return false;
}

std::uint64_t invmod(std::uint64_t a, std::uint64_t q) { return powmod(a, q - 2, q); }

// Dense GF(q) elimination; returns (det mod q, rank).
std::pair<std::uint64_t, std::uint32_t> eliminate_mod(const SparseBinaryMatrix& m, std::uint64_t q) {
    const std::uint32_t n = m.n();
    std::vector<std::uint64_t> a(static_cast<std::size_t>(n) * n, 0);
    for (std::size_t k = 0; k < m.nnz(); ++k) {
        auto [i, j] = m.entry(k);
        a[static_cast<std::size_t>(i) * n + j] = 1 % q;
    }

    std::uint64_t det = 1 % q;
    std::uint32_t rank = 0;
    std::uint32_t pivot_row = 0;
    for (std::uint32_t col = 0; col < n && pivot_row < n; ++col) {
        std::uint32_t sel = pivot_row;
        while (sel < n && a[static_cast<std::size_t>(sel) * n + col] == 0) ++sel;
        if (sel == n) {
            det = 0;
            continue;
        }
        if (sel != pivot_row) {
            for (std::uint32_t j = col; j < n; ++j)
                std::swap(a[static_cast<std::size_t>(sel) * n + j],
                          a[static_cast<std::size_t>(pivot_row) * n + j]);
            det = det == 0 ? 0 : q - det;  // row swap flips the sign
        }
        const std::uint64_t piv = a[static_cast<std::size_t>(pivot_row) * n + col];
        det = mulmod(det, piv, q);
        const std::uint64_t inv = invmod(piv, q);
        for (std::uint32_t i = pivot_row + 1; i < n; ++i) {
            std::uint64_t f = a[static_cast<std::size_t>(i) * n + col];
            if (f == 0) continue;
            f = mulmod(f, inv, q);
            a[static_cast<std::size_t>(i) * n + col] = 0;
            for (std::uint32_t j = col + 1; j < n; ++j) {
                std::uint64_t& cell = a[static_cast<std::size_t>(i) * n + j];
                std::uint64_t sub = mulmod(f, a[static_cast<std::size_t>(pivot_row) * n + j], q);
                cell = cell >= sub ? cell - sub : cell + q - sub;
            }
        }
        ++pivot_row;
        ++rank;
    }
    if (rank < n) det = 0;
    return {det, rank};
}

}  // namespace

bool is_probable_prime(std::uint64_t q, int rounds) {
    if (q < 2) return false;
    for (std::uint64_t p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL}) {
        if (q == p) return true;
        if (q % p == 0) return false;
    }
    std::uint64_t d = q - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    Xoshiro256pp rng(q ^ 0xA2C2A2C2A2C2A2C2ULL);
    for (int r = 0; r < rounds; ++r) {
        std::uint64_t a = 2 + rng.below(q - 3);
        if (!miller_rabin_round(q, a, d, s)) return false;
    }
    return true;
}

std::uint64_t random_prime_61_62(Xoshiro256pp& rng) {
    for (;;) {
        std::uint64_t c = (1ULL << 61) + rng.below(1ULL << 61);
        c |= 1;
        if (is_probable_prime(c)) return c;
    }
}

std::uint64_t det_mod_prime(const SparseBinaryMatrix& m, std::uint64_t q) {
    if (q < 2 || !is_probable_prime(q)) throw std::invalid_argument("det_mod_prime: q must be prime");
    return eliminate_mod(m, q).first;
}

double hadamard_log2(const SparseBinaryMatrix& m) {
    double acc = 0.0;
    for (std::uint32_t c : m.row_counts()) {
        if (c == 0) return -std::numeric_limits<double>::infinity();
        acc += 0.5 * std::log2(static_cast<double>(c));
    }
    return acc;
}

SingularityVerdict decide_singular(const SparseBinaryMatrix& m, std::uint64_t prime_seed) {
    SingularityVerdict v;
    v.hadamard_log2_bound = hadamard_log2(m);

    bool zero_row = false, zero_col = false;
    for (std::uint32_t i = 0; i < m.n(); ++i) {
        zero_row |= m.row_counts()[i] == 0;
        zero_col |= m.col_counts()[i] == 0;
    }
    if (zero_row || zero_col) {
        v.singular = true;
        v.method = SingularMethod::rank_deficient;
        return v;
    }

    Xoshiro256pp rng(prime_seed);
    double certified_log2 = 0.0;
    while (certified_log2 <= v.hadamard_log2_bound + 1.0) {
        std::uint64_t q = random_prime_61_62(rng);
        std::uint64_t res = det_mod_prime(m, q);
        v.primes_used.push_back(q);
        v.det_residues.push_back(res);
        if (res != 0) {
            v.singular = false;
            v.method = SingularMethod::early_nonzero_mod_p;
            return v;
        }
        certified_log2 += std::log2(static_cast<double>(q));
    }
    v.singular = true;
    v.method = SingularMethod::crt_certified_zero;
    return v;
}

std::uint32_t rank_mod_prime(const SparseBinaryMatrix& m, std::uint64_t q) {
    if (q < 2 || !is_probable_prime(q)) throw std::invalid_argument("rank_mod_prime: q must be prime");
    return eliminate_mod(m, q).second;
}

std::uint32_t bareiss_rank(const SparseBinaryMatrix& m) {
    const std::uint32_t n = m.n();
    std::vector<mpz_class> a(static_cast<std::size_t>(n) * n);
    for (std::size_t k = 0; k < m.nnz(); ++k) {
        auto [i, j] = m.entry(k);
        a[static_cast<std::size_t>(i) * n + j] = 1;
    }
    auto at = [&](std::uint32_t i, std::uint32_t j) -> mpz_class& {
        return a[static_cast<std::size_t>(i) * n + j];
    };

    mpz_class prev = 1;
    std::uint32_t rank = 0;
    std::uint32_t pr = 0;
    for (std::uint32_t col = 0; col < n && pr < n; ++col) {
        std::uint32_t sel = pr;
        while (sel < n && at(sel, col) == 0) ++sel;
        if (sel == n) continue;
        if (sel != pr)
            for (std::uint32_t j = 0; j < n; ++j) std::swap(at(sel, j), at(pr, j));
        for (std::uint32_t i = pr + 1; i < n; ++i) {
            for (std::uint32_t j = col + 1; j < n; ++j) {
                mpz_class num = at(i, j) * at(pr, col) - at(i, col) * at(pr, j);
                mpz_divexact(at(i, j).get_mpz_t(), num.get_mpz_t(), prev.get_mpz_t());
            }
            at(i, col) = 0;
        }
        prev = at(pr, col);
        ++pr;
        ++rank;
    }
    return rank;
}

std::uint32_t rank_over_rationals(const SparseBinaryMatrix& m, std::uint64_t prime_seed) {
    Xoshiro256pp rng(prime_seed);
    std::uint64_t q1 = random_prime_61_62(rng);
    std::uint64_t q2 = random_prime_61_62(rng);
    std::uint32_t r1 = rank_mod_prime(m, q1);
    std::uint32_t r2 = rank_mod_prime(m, q2);
    if (r1 != r2) return bareiss_rank(m);
    return r1;
}

}  // namespace bml
