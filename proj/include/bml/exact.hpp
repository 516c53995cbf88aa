#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bml/matrix.hpp"

namespace bml {

enum class SingularMethod { early_nonzero_mod_p, crt_certified_zero, rank_deficient };

const char* to_string(SingularMethod m);

// Exact singular/nonsingular decision with its certification trail.
struct SingularityVerdict {
    bool singular = false;
    SingularMethod method = SingularMethod::early_nonzero_mod_p;
    std::vector<std::uint64_t> primes_used;
    std::vector<std::uint64_t> det_residues;
    double hadamard_log2_bound = 0.0;
    std::optional<std::uint32_t> rank;

    std::string to_json() const;
};

// Miller-Rabin with the given number of random rounds (plus small-prime
// trial division). Deterministic given the candidate.
bool is_probable_prime(std::uint64_t q, int rounds = 40);

class Xoshiro256pp;
// Uniform prime in [2^61, 2^62).
std::uint64_t random_prime_61_62(Xoshiro256pp& rng);

// det(M) mod q by in-place Gaussian elimination over GF(q), partial
// pivoting on the first nonzero. Rejects q < 2 or composite q.
std::uint64_t det_mod_prime(const SparseBinaryMatrix& m, std::uint64_t q);

// log2 of the Hadamard row-norm bound: sum_i 0.5*log2(row_count[i]).
// -inf if some row is empty (then det = 0 exactly).
double hadamard_log2(const SparseBinaryMatrix& m);

inline constexpr std::uint64_t kDefaultPrimeSeed = 0x42D5AD5EEDULL;

// Exact singularity decision: zero row/column shortcut, then residues at
// random 61-62 bit primes; any nonzero residue proves nonsingular, and
// all-zero residues certify det = 0 once the prime product exceeds twice
// the Hadamard bound.
SingularityVerdict decide_singular(const SparseBinaryMatrix& m,
                                   std::uint64_t prime_seed = kDefaultPrimeSeed);

std::uint32_t rank_mod_prime(const SparseBinaryMatrix& m, std::uint64_t q);

// Fraction-free Bareiss elimination over exact integers; always correct,
// used as the escalation path when modular ranks disagree.
std::uint32_t bareiss_rank(const SparseBinaryMatrix& m);

// Exact rank over the rationals: max of ranks mod two random primes
// (each is a lower bound on the rational rank, equal w.h.p.), Bareiss on
// disagreement.
std::uint32_t rank_over_rationals(const SparseBinaryMatrix& m,
                                  std::uint64_t prime_seed = kDefaultPrimeSeed);

}  // namespace bml
