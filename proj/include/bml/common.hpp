#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace bml {

// Raised when (n, p) or derived parameters fall outside the range an
// operation is defined for (CLI exit code 2).
struct RegimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when an exact/oracle computation would exceed its combinatorial
// budget and the caller must switch to a sampling variant (CLI exit code 3).
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Kahan compensated accumulator.
class KahanSum {
public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

// Wilson score interval for a binomial proportion (default z: 95%).
inline std::pair<double, double> wilson_ci(std::uint64_t successes, std::uint64_t trials,
                                           double z = 1.959963984540054) {
    if (trials == 0) return {0.0, 1.0};
    double n = static_cast<double>(trials);
    double phat = static_cast<double>(successes) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (phat + z2 / (2.0 * n)) / denom;
    double half = z / denom * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
    return {center - half, center + half};
}

// Runs fn(begin, end) over [0, count) split into fixed-size chunks pulled
// from a shared counter. Chunk boundaries do not depend on the worker
// count, so any output keyed by index is reproducible at any parallelism.
inline void parallel_chunks(std::uint64_t count, unsigned workers, std::uint64_t chunk,
                            const std::function<void(std::uint64_t, std::uint64_t)>& fn) {
    if (count == 0) return;
    if (chunk == 0) chunk = 1;
    if (workers <= 1) {
        for (std::uint64_t b = 0; b < count; b += chunk) fn(b, std::min(count, b + chunk));
        return;
    }
    std::atomic<std::uint64_t> next{0};
    auto body = [&]() {
        for (;;) {
            std::uint64_t b = next.fetch_add(chunk);
            if (b >= count) return;
            fn(b, std::min(count, b + chunk));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
}

}  // namespace bml
