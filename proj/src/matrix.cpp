#include "bml/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "bml/rng.hpp"

namespace bml {

SparseBinaryMatrix::SparseBinaryMatrix(std::uint32_t n,
                                       std::vector<std::pair<std::uint32_t, std::uint32_t>> entries)
    : n_(n) {
    if (n == 0) throw std::invalid_argument("SparseBinaryMatrix: n must be >= 1");
    std::sort(entries.begin(), entries.end());
    rows_.reserve(entries.size());
    cols_.reserve(entries.size());
    row_counts_.assign(n, 0);
    col_counts_.assign(n, 0);
    for (std::size_t k = 0; k < entries.size(); ++k) {
        auto [i, j] = entries[k];
        if (i >= n || j >= n) throw std::invalid_argument("SparseBinaryMatrix: index out of range");
        if (k > 0 && entries[k] == entries[k - 1])
            throw std::invalid_argument("SparseBinaryMatrix: duplicate entry");
        rows_.push_back(i);
        cols_.push_back(j);
        row_counts_[i]++;
        col_counts_[j]++;
    }
    row_offsets_.assign(n_ + 1, 0);
    for (std::uint32_t i = 0; i < n_; ++i) row_offsets_[i + 1] = row_offsets_[i] + row_counts_[i];
}

SparseBinaryMatrix SparseBinaryMatrix::from_row_masks(std::uint32_t n,
                                                      const std::vector<std::uint64_t>& masks) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;
    for (std::uint32_t i = 0; i < n; ++i) {
        std::uint64_t m = i < masks.size() ? masks[i] : 0;
        for (std::uint32_t j = 0; j < n; ++j)
            if (m >> j & 1) entries.emplace_back(i, j);
    }
    return SparseBinaryMatrix(n, std::move(entries));
}

std::span<const std::uint32_t> SparseBinaryMatrix::row(std::uint32_t i) const {
    return {cols_.data() + row_offsets_[i], cols_.data() + row_offsets_[i + 1]};
}

SparseBinaryMatrix generate(const BernoulliParams& params) {
    if (params.n == 0) throw std::invalid_argument("generate: n must be >= 1");
    if (!(params.p > 0.0) || !(params.p < 1.0))
        throw std::invalid_argument("generate: p must lie in (0, 1)");

    Xoshiro256pp rng(params.seed, params.trial_index);
    const std::uint64_t n = params.n;
    const std::uint64_t cells = n * n;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;

    if (params.p <= 0.05) {
        // Geometric skipping: the gap to the next one is ~ Geometric(p),
        // expected O(p n^2) work.
        const double log1mp = std::log1p(-params.p);
        double pos = -1.0;
        for (;;) {
            double gap = std::floor(std::log(rng.next_open()) / log1mp);
            pos += 1.0 + gap;
            if (pos >= static_cast<double>(cells)) break;
            auto cell = static_cast<std::uint64_t>(pos);
            entries.emplace_back(static_cast<std::uint32_t>(cell / n),
                                 static_cast<std::uint32_t>(cell % n));
        }
    } else {
        entries.reserve(static_cast<std::size_t>(params.p * static_cast<double>(cells) * 1.1) + 8);
        for (std::uint64_t cell = 0; cell < cells; ++cell) {
            if (rng.next_double() < params.p)
                entries.emplace_back(static_cast<std::uint32_t>(cell / n),
                                     static_cast<std::uint32_t>(cell % n));
        }
    }
    return SparseBinaryMatrix(params.n, std::move(entries));
}

SparseBinaryMatrix transpose(const SparseBinaryMatrix& m) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;
    entries.reserve(m.nnz());
    for (std::size_t k = 0; k < m.nnz(); ++k) {
        auto [i, j] = m.entry(k);
        entries.emplace_back(j, i);
    }
    return SparseBinaryMatrix(m.n(), std::move(entries));
}

namespace {

// FNV-1a over a row/column support list.
std::uint64_t support_hash(std::span<const std::uint32_t> support) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint32_t v) {
        for (int b = 0; b < 4; ++b) {
            h ^= (v >> (8 * b)) & 0xFF;
            h *= 1099511628211ULL;
        }
    };
    mix(static_cast<std::uint32_t>(support.size()));
    for (std::uint32_t v : support) mix(v);
    return h;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> duplicate_pairs(
    const std::vector<std::vector<std::uint32_t>>& supports) {
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> groups;
    for (std::uint32_t i = 0; i < supports.size(); ++i)
        groups[support_hash(supports[i])].push_back(i);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (auto& [h, members] : groups) {
        if (members.size() < 2) continue;
        for (std::size_t a = 0; a < members.size(); ++a)
            for (std::size_t b = a + 1; b < members.size(); ++b)
                if (supports[members[a]] == supports[members[b]])
                    pairs.emplace_back(members[a], members[b]);
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

}  // namespace

WitnessReport structural_scan(const SparseBinaryMatrix& m) {
    WitnessReport rep;
    const std::uint32_t n = m.n();
    for (std::uint32_t i = 0; i < n; ++i) {
        if (m.row_counts()[i] == 0) rep.zero_rows.push_back(i);
        if (m.col_counts()[i] == 0) rep.zero_cols.push_back(i);
    }
    std::vector<std::vector<std::uint32_t>> row_supports(n), col_supports(n);
    for (std::size_t k = 0; k < m.nnz(); ++k) {
        auto [i, j] = m.entry(k);
        row_supports[i].push_back(j);  // lex order => already ascending
        col_supports[j].push_back(i);
    }
    rep.dup_rows = duplicate_pairs(row_supports);
    rep.dup_cols = duplicate_pairs(col_supports);
    rep.has_structural_witness = !rep.zero_rows.empty() || !rep.zero_cols.empty() ||
                                 !rep.dup_rows.empty() || !rep.dup_cols.empty();
    return rep;
}

void write_sbm(std::ostream& os, const SparseBinaryMatrix& m) {
    os << "SBM 1 " << m.n() << ' ' << m.nnz() << '\n';
    for (std::size_t k = 0; k < m.nnz(); ++k) {
        auto [i, j] = m.entry(k);
        os << i << ' ' << j << '\n';
    }
}

SparseBinaryMatrix read_sbm(std::istream& is) {
    std::string magic;
    int version = 0;
    std::uint32_t n = 0;
    std::uint64_t nnz = 0;
    if (!(is >> magic >> version >> n >> nnz) || magic != "SBM" || version != 1)
        throw std::invalid_argument("read_sbm: bad header");
    std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;
    entries.reserve(nnz);
    for (std::uint64_t k = 0; k < nnz; ++k) {
        std::uint32_t i = 0, j = 0;
        if (!(is >> i >> j)) throw std::invalid_argument("read_sbm: truncated entry list");
        entries.emplace_back(i, j);
    }
    return SparseBinaryMatrix(n, std::move(entries));
}

}  // namespace bml
