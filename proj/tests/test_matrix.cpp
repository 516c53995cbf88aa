#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "bml/matrix.hpp"
#include "bml/rng.hpp"
#include "oracles.hpp"

using bml::BernoulliParams;
using bml::generate;
using bml::SparseBinaryMatrix;
using bml::structural_scan;
using bml::transpose;

TEST_CASE("generate rejects bad parameters") {
    CHECK_THROWS_AS(generate({0, 0.5, 1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(generate({3, 0.0, 1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(generate({3, 1.0, 1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(generate({3, -0.1, 1, 0}), std::invalid_argument);
}

TEST_CASE("degenerate p limits") {
    for (std::uint64_t t = 0; t < 100; ++t) {
        CHECK(generate({3, 1e-12, 7, t}).nnz() == 0);
        CHECK(generate({3, 1.0 - 1e-12, 7, t}).nnz() == 9);
    }
}

TEST_CASE("generate is reproducible and parameter-sensitive") {
    BernoulliParams params{50, 0.07, 1234, 9};
    auto a = generate(params);
    auto b = generate(params);
    CHECK(a == b);
    CHECK_FALSE(a == generate({50, 0.07, 1234, 10}));
    CHECK_FALSE(a == generate({50, 0.07, 1235, 9}));
}

TEST_CASE("mean support size matches binomial moments") {
    // n=1000, p=0.01 uses the geometric-skip path; mean nnz over trials
    // should sit within 3 sigma of p n^2.
    const std::uint32_t n = 1000;
    const double p = 0.01;
    const std::uint64_t trials = 10000;
    double total = 0;
    for (std::uint64_t t = 0; t < trials; ++t) total += double(generate({n, p, 99, t}).nnz());
    double mean = total / double(trials);
    double per_trial_sigma = std::sqrt(double(n) * n * p * (1 - p));
    double tol = 3.0 * per_trial_sigma / std::sqrt(double(trials));
    CHECK(std::abs(mean - p * n * n) < tol);
}

TEST_CASE("dense and sparse generation paths both honor invariants") {
    for (double p : {0.03, 0.4}) {
        auto m = generate({64, p, 5, 1});
        std::uint64_t row_total = 0, col_total = 0;
        for (auto c : m.row_counts()) row_total += c;
        for (auto c : m.col_counts()) col_total += c;
        CHECK(row_total == m.nnz());
        CHECK(col_total == m.nnz());
        std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
        for (std::size_t k = 0; k < m.nnz(); ++k) {
            auto e = m.entry(k);
            CHECK(e.first < 64);
            CHECK(e.second < 64);
            CHECK(seen.insert(e).second);  // no duplicates; sorted implies ordered
            if (k > 0) CHECK(m.entry(k - 1) < e);
        }
    }
}

TEST_CASE("transpose involution and count swap") {
    auto id = SparseBinaryMatrix::from_row_masks(3, {1, 2, 4});
    CHECK(transpose(id) == id);

    auto e01 = SparseBinaryMatrix(2, {{0, 1}});
    CHECK(transpose(e01) == SparseBinaryMatrix(2, {{1, 0}}));

    for (std::uint64_t t = 0; t < 20; ++t) {
        auto m = generate({40, 0.1, 11, t});
        CHECK(transpose(transpose(m)) == m);
        CHECK(m.row_counts() == transpose(m).col_counts());
        CHECK(m.col_counts() == transpose(m).row_counts());
    }
}

TEST_CASE("structural_scan trivial cases") {
    auto id3 = SparseBinaryMatrix::from_row_masks(3, {1, 2, 4});
    auto rep = structural_scan(id3);
    CHECK_FALSE(rep.has_structural_witness);

    // ones = {(0,0),(1,0)} in n=3: zero row {2}, zero cols {1,2}, dup rows (0,1)
    auto m = SparseBinaryMatrix(3, {{0, 0}, {1, 0}});
    rep = structural_scan(m);
    CHECK(rep.zero_rows == std::vector<std::uint32_t>{2});
    CHECK(rep.zero_cols == std::vector<std::uint32_t>{1, 2});
    CHECK(rep.dup_rows == std::vector<std::pair<std::uint32_t, std::uint32_t>>{{0, 1}});
    CHECK(rep.has_structural_witness);

    auto ones4 = SparseBinaryMatrix::from_row_masks(4, {15, 15, 15, 15});
    rep = structural_scan(ones4);
    CHECK(rep.zero_rows.empty());
    CHECK(rep.zero_cols.empty());
    CHECK(rep.dup_rows.size() == 6);  // C(4,2)
    CHECK(rep.dup_cols.size() == 6);
}

TEST_CASE("zero row detection is exactly row_counts[i] == 0") {
    for (std::uint64_t t = 0; t < 200; ++t) {
        auto m = generate({30, 0.05, 21, t});
        auto rep = structural_scan(m);
        std::vector<std::uint32_t> expect;
        for (std::uint32_t i = 0; i < 30; ++i)
            if (m.row_counts()[i] == 0) expect.push_back(i);
        CHECK(rep.zero_rows == expect);
    }
}

TEST_CASE("duplicate detection agrees with quadratic pairwise comparison") {
    // 500 random seeds, n <= 8, biased toward duplicates via small n and p.
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        std::uint32_t n = 2 + seed % 7;
        auto m = generate({n, 0.35, seed, 0});
        auto rep = structural_scan(m);
        std::vector<std::pair<std::uint32_t, std::uint32_t>> rows_expected, cols_expected;
        auto row_of = [&](const SparseBinaryMatrix& mm, std::uint32_t i) {
            auto sp = mm.row(i);
            return std::vector<std::uint32_t>(sp.begin(), sp.end());
        };
        auto mt = transpose(m);
        for (std::uint32_t a = 0; a < n; ++a)
            for (std::uint32_t b = a + 1; b < n; ++b) {
                if (row_of(m, a) == row_of(m, b)) rows_expected.emplace_back(a, b);
                if (row_of(mt, a) == row_of(mt, b)) cols_expected.emplace_back(a, b);
            }
        CHECK(rep.dup_rows == rows_expected);
        CHECK(rep.dup_cols == cols_expected);
    }
}

TEST_CASE("row and column support distributions are exchangeable") {
    // M and M^T are equidistributed; pooled row-count and col-count
    // histograms over 10^4 trials must pass a chi-square test at 0.001.
    const std::uint32_t n = 64;
    const double p = 0.08;
    std::vector<std::uint64_t> row_hist(n + 1, 0), col_hist(n + 1, 0);
    for (std::uint64_t t = 0; t < 10000; ++t) {
        auto m = generate({n, p, 3141, t});
        for (auto c : m.row_counts()) row_hist[c]++;
        for (auto c : m.col_counts()) col_hist[c]++;
    }
    double pval = oracle::chi2_two_sample_pvalue(row_hist, col_hist);
    CHECK(pval > 0.001);
}

TEST_CASE("SBM v1 round trip") {
    auto check_rt = [](const SparseBinaryMatrix& m) {
        std::ostringstream os;
        bml::write_sbm(os, m);
        std::istringstream is(os.str());
        auto back = bml::read_sbm(is);
        CHECK(back == m);
        std::ostringstream os2;
        bml::write_sbm(os2, back);
        CHECK(os.str() == os2.str());
    };
    check_rt(generate({37, 0.09, 2, 5}));
    check_rt(SparseBinaryMatrix(4, {}));
    check_rt(SparseBinaryMatrix::from_row_masks(2, {3, 3}));

    std::istringstream hdr("SBM 1 3 1\n0 1\n");
    auto m = bml::read_sbm(hdr);
    CHECK(m.n() == 3);
    CHECK(m.nnz() == 1);
    std::istringstream bad("XYZ 1 3 0\n");
    CHECK_THROWS_AS(bml::read_sbm(bad), std::invalid_argument);
}

TEST_CASE("format header matches spec text exactly") {
    std::ostringstream os;
    bml::write_sbm(os, SparseBinaryMatrix(2, {{0, 1}, {1, 0}}));
    CHECK(os.str() == "SBM 1 2 2\n0 1\n1 0\n");
}
