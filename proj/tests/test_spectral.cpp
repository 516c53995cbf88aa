#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bml/exact.hpp"
#include "bml/matrix.hpp"
#include "bml/rng.hpp"
#include "bml/spectral.hpp"
#include "oracles.hpp"

using bml::dist_to_complement_span;
using bml::smallest_singular_value;
using bml::SparseBinaryMatrix;
using bml::spectral_norm;

namespace {
const SparseBinaryMatrix kUpper2 = SparseBinaryMatrix(2, {{0, 0}, {0, 1}, {1, 1}});  // [[1,1],[0,1]]
}

TEST_CASE("preconditions") {
    auto id = SparseBinaryMatrix::from_row_masks(2, {1, 2});
    CHECK_THROWS_AS(smallest_singular_value(id, 1e-13), std::invalid_argument);
    CHECK_THROWS_AS(smallest_singular_value(id, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(dist_to_complement_span(id, 2), std::invalid_argument);
}

TEST_CASE("closed-form singular values of [[1,1],[0,1]]") {
    // eigenvalues of M^T M = [[1,1],[1,2]] are (3 +- sqrt(5))/2
    double lo = std::sqrt((3.0 - std::sqrt(5.0)) / 2.0);
    double hi = std::sqrt((3.0 + std::sqrt(5.0)) / 2.0);
    CHECK(smallest_singular_value(kUpper2, 1e-9) == doctest::Approx(lo).epsilon(1e-9));
    CHECK(spectral_norm(kUpper2, 1e-9) == doctest::Approx(hi).epsilon(1e-7));
    CHECK(lo == doctest::Approx(0.6180339887498949));
    CHECK(hi == doctest::Approx(1.618033988749895));
}

TEST_CASE("identity and rank-one cases") {
    auto id8 = SparseBinaryMatrix::from_row_masks(8, {1, 2, 4, 8, 16, 32, 64, 128});
    CHECK(smallest_singular_value(id8, 1e-9) == doctest::Approx(1.0).epsilon(1e-9));
    auto id5 = SparseBinaryMatrix::from_row_masks(5, {1, 2, 4, 8, 16});
    CHECK(spectral_norm(id5, 1e-9) == doctest::Approx(1.0).epsilon(1e-7));
    auto ones5 = SparseBinaryMatrix::from_row_masks(5, {31, 31, 31, 31, 31});
    CHECK(spectral_norm(ones5, 1e-9) == doctest::Approx(5.0).epsilon(1e-7));
    auto ones2 = SparseBinaryMatrix::from_row_masks(2, {3, 3});
    CHECK(smallest_singular_value(ones2, 1e-9) <= 1e-12 * spectral_norm(ones2, 1e-9));
}

TEST_CASE("oracle agreement on random small matrices") {
    for (std::uint64_t t = 0; t < 200; ++t) {
        std::uint32_t n = 2 + t % 11;
        auto m = bml::generate({n, 0.35, 19, t});
        auto sv = oracle::jacobi_singular_values(m);
        double tol = 1e-8;  // rel_tol 1e-9, oracle agreement to rel_tol*10
        CHECK(smallest_singular_value(m, 1e-9) ==
              doctest::Approx(sv.back()).epsilon(tol).scale(std::max(sv.front(), 1.0)));
        int it = 0;
        bool conv = false;
        double smax = spectral_norm(m, 1e-9, &it, &conv);
        if (conv) CHECK(smax == doctest::Approx(sv.front()).epsilon(1e-6));
    }
}

TEST_CASE("s_min is transpose invariant") {
    for (std::uint64_t t = 0; t < 50; ++t) {
        auto m = bml::generate({24, 0.2, 23, t});
        double a = smallest_singular_value(m, 1e-9);
        double b = smallest_singular_value(bml::transpose(m), 1e-9);
        CHECK(a == doctest::Approx(b).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("centered norm matches explicit dense shift") {
    for (std::uint64_t t = 0; t < 30; ++t) {
        const std::uint32_t n = 10;
        const double p = 0.3;
        auto m = bml::generate({n, p, 29, t});
        std::vector<double> dense(n * n, -p);
        for (std::size_t k = 0; k < m.nnz(); ++k) {
            auto [i, j] = m.entry(k);
            dense[static_cast<std::size_t>(j) * n + i] += 1.0;
        }
        auto sv = oracle::jacobi_singular_values(dense, n, n);
        CHECK(bml::centered_spectral_norm(m, p, 1e-9) == doctest::Approx(sv.front()).epsilon(1e-6));
    }
}

TEST_CASE("distance to complement span closed forms") {
    auto id3 = SparseBinaryMatrix::from_row_masks(3, {1, 2, 4});
    CHECK(dist_to_complement_span(id3, 0) == doctest::Approx(1.0).epsilon(1e-12));

    // columns 0 and 1 equal
    auto dup = SparseBinaryMatrix(3, {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 2}});
    CHECK(dist_to_complement_span(dup, 0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

    CHECK(dist_to_complement_span(kUpper2, 0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("invertibility-via-distance inequality") {
    // deterministic direction: ||Mx|| >= |x_i| dist(C_i, H_i) - 1e-8
    bml::Xoshiro256pp rng(4242);
    for (int rep = 0; rep < 100; ++rep) {
        const std::uint32_t n = 20;
        auto m = bml::generate({n, 0.25, 61, static_cast<std::uint64_t>(rep)});
        std::vector<double> x(n);
        double nx = 0;
        for (auto& v : x) v = rng.normal();
        for (auto v : x) nx += v * v;
        nx = std::sqrt(nx);
        for (auto& v : x) v /= nx;
        std::vector<double> mx;
        bml::matvec(m, x, mx);
        double norm_mx = 0;
        for (double v : mx) norm_mx += v * v;
        norm_mx = std::sqrt(norm_mx);
        std::uint32_t i = static_cast<std::uint32_t>(rng.below(n));
        CHECK(norm_mx >= std::abs(x[i]) * dist_to_complement_span(m, i) - 1e-8);
    }
}

TEST_CASE("singular verdict forces tiny s_min and zero min-distance") {
    int found = 0;
    for (std::uint64_t t = 0; t < 4000 && found < 20; ++t) {
        auto m = bml::generate({30, 0.12, 71, t});
        auto v = bml::decide_singular(m);
        if (!v.singular) continue;
        ++found;
        double smax = std::max(spectral_norm(m, 1e-9), 1e-300);
        CHECK(smallest_singular_value(m, 1e-9) <= 1e-8 * smax);
        double mind = 1e300;
        for (std::uint32_t i = 0; i < m.n(); ++i)
            mind = std::min(mind, dist_to_complement_span(m, i));
        CHECK(mind <= 1e-8);
    }
    CHECK(found >= 5);  // the regime produces singulars regularly
}

TEST_CASE("normal_to_complement produces an orthogonal unit vector") {
    int degenerate = 0;
    for (std::uint64_t t = 0; t < 40; ++t) {
        const std::uint32_t n = 25;
        auto m = bml::generate({n, 0.3, 83, t});
        auto normal = bml::normal_to_complement(m, 0);
        if (!normal) {
            ++degenerate;
            continue;
        }
        double nn = 0;
        for (double v : *normal) nn += v * v;
        CHECK(std::sqrt(nn) == doctest::Approx(1.0).epsilon(1e-10));
        // orthogonal to every kept column
        for (std::uint32_t j = 1; j < n; ++j) {
            double dot = 0;
            for (std::size_t k = 0; k < m.nnz(); ++k) {
                auto [r, c] = m.entry(k);
                if (c == j) dot += (*normal)[r];
            }
            CHECK(std::abs(dot) < 1e-9);
        }
    }
    CHECK(degenerate < 20);
}

TEST_CASE("spectral report invariants") {
    auto m = bml::generate({40, 0.2, 97, 0});
    auto rep = bml::spectral_report(m, 0.2, 1e-8);
    CHECK(rep.s_min <= rep.s_max);
    CHECK(rep.s_min >= 0);
    CHECK(std::isfinite(rep.centered_norm));
    auto j = rep.to_json();
    for (const char* key : {"s_min", "s_max", "centered_norm", "rel_tol", "iterations", "converged"})
        CHECK(j.find(key) != std::string::npos);
}
