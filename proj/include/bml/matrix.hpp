#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "bml/common.hpp"

namespace bml {

// Parameters of one Bernoulli(p) matrix draw. (seed, trial_index) uniquely
// determines the generated matrix; see stream_key() in rng.hpp for the
// stream derivation.
struct BernoulliParams {
    std::uint32_t n = 0;
    double p = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t trial_index = 0;
};

// n x n 0/1 matrix stored as a lexicographically sorted coordinate list
// with per-row/column support counts. Immutable after construction.
class SparseBinaryMatrix {
public:
    SparseBinaryMatrix() = default;
    // Takes (row, col) pairs in any order; sorts, validates indices and
    // rejects duplicates.
    SparseBinaryMatrix(std::uint32_t n, std::vector<std::pair<std::uint32_t, std::uint32_t>> entries);

    // Builds from one bitmask per row, bit j = entry (i, j). Test/CLI helper.
    static SparseBinaryMatrix from_row_masks(std::uint32_t n, const std::vector<std::uint64_t>& masks);

    std::uint32_t n() const { return n_; }
    std::size_t nnz() const { return rows_.size(); }
    std::pair<std::uint32_t, std::uint32_t> entry(std::size_t k) const { return {rows_[k], cols_[k]}; }
    const std::vector<std::uint32_t>& entry_rows() const { return rows_; }
    const std::vector<std::uint32_t>& entry_cols() const { return cols_; }
    const std::vector<std::uint32_t>& row_counts() const { return row_counts_; }
    const std::vector<std::uint32_t>& col_counts() const { return col_counts_; }

    // Column indices of row i, ascending.
    std::span<const std::uint32_t> row(std::uint32_t i) const;

    bool operator==(const SparseBinaryMatrix& o) const {
        return n_ == o.n_ && rows_ == o.rows_ && cols_ == o.cols_;
    }

private:
    std::uint32_t n_ = 0;
    std::vector<std::uint32_t> rows_, cols_;  // parallel arrays, sorted lex
    std::vector<std::uint32_t> row_counts_, col_counts_;
    std::vector<std::uint32_t> row_offsets_;  // prefix sums of row_counts_
};

// Draws an n x n matrix with i.i.d. Bernoulli(p) entries. Deterministic in
// (seed, trial_index). Sparse draws (p <= 0.05) use geometric skipping over
// the n^2 cell sequence; dense draws test each cell.
SparseBinaryMatrix generate(const BernoulliParams& params);

SparseBinaryMatrix transpose(const SparseBinaryMatrix& m);

struct WitnessReport {
    std::vector<std::uint32_t> zero_rows;
    std::vector<std::uint32_t> zero_cols;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> dup_rows;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> dup_cols;
    bool has_structural_witness = false;
};

// Zero rows/columns and duplicate row/column pairs (support-set hashing,
// equality verified within hash groups).
WitnessReport structural_scan(const SparseBinaryMatrix& m);

// "SBM v1" text format: `SBM 1 <n> <nnz>` then one `<row> <col>` line per
// entry, 0-based, ascending lexicographic, LF endings.
void write_sbm(std::ostream& os, const SparseBinaryMatrix& m);
SparseBinaryMatrix read_sbm(std::istream& is);

}  // namespace bml
