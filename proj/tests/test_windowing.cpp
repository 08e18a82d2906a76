#include <doctest.h>

#include <numeric>
#include <random>

#include "ftdf/error.hpp"
#include "ftdf/windowing.hpp"
#include "oracle.hpp"

using namespace ftdf;

namespace {

PowerTrace ramp(std::size_t n) {
    PowerTrace t{std::vector<double>(n), 1.0, "x", "ramp"};
    std::iota(t.samples.begin(), t.samples.end(), 1.0);
    return t;
}

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an ftdf::Error");
    return Errc::InvalidConfig;
}

}  // namespace

TEST_CASE("plan_windows examples") {
    auto p = plan_windows(10, 4, 0.25);
    CHECK(p.hop == 3);
    CHECK(p.count == 3);
    CHECK(p.offset(1) == 0);
    CHECK(p.offset(2) == 3);
    CHECK(p.offset(3) == 6);

    for (double overlap : {0.0, 0.25, 0.5, 0.9}) CHECK(plan_windows(77, 77, overlap).count == 1);

    auto big = plan_windows(4096, 3072, 0.25);
    CHECK(big.hop == 2304);
    CHECK(big.count == 1);
    CHECK(plan_windows(100, 10).hop == 8);  // floor(2.5) = 2 samples of overlap
}

TEST_CASE("plan_windows errors") {
    CHECK(code_of([] { plan_windows(3, 4); }) == Errc::TraceTooShort);
    CHECK(code_of([] { plan_windows(10, 1); }) == Errc::InvalidWindow);
    CHECK(code_of([] { plan_windows(10, 4, 1.0); }) == Errc::InvalidOverlap);
    CHECK(code_of([] { plan_windows(10, 4, -0.1); }) == Errc::InvalidOverlap);
}

TEST_CASE("extract_segment slices windows") {
    auto t = ramp(10);
    auto p = plan_windows(10, 4);
    auto s = extract_segment(t, p, 2);
    CHECK(s.values == std::vector<double>{4, 5, 6, 7});
    CHECK(s.window_index == 2);
    CHECK(s.trace_ref == "ramp");
    CHECK(extract_segment(t, p, 1).values == std::vector<double>{1, 2, 3, 4});
    CHECK(code_of([&] { extract_segment(t, p, 4); }) == Errc::IndexOutOfRange);
    CHECK(code_of([&] { extract_segment(t, p, 0); }) == Errc::IndexOutOfRange);
    CHECK(code_of([&] { segment_view(t, p, 4); }) == Errc::IndexOutOfRange);
    auto v = segment_view(t, p, 3);
    CHECK(std::vector<double>(v.begin(), v.end()) == std::vector<double>{7, 8, 9, 10});
}

TEST_CASE("window geometry invariants") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = 2 + gen() % 200;
        std::size_t m = n + gen() % 2000;
        auto p = plan_windows(m, n);
        CHECK(p.hop == n - n / 4);
        // consecutive windows share floor(N/4) samples
        if (p.count > 1) CHECK(p.offset(1) + n - p.offset(2) == n / 4);
        for (std::size_t k = 1; k <= p.count; ++k) CHECK(p.offset(k) == (k - 1) * p.hop);
        CHECK(p.offset(p.count) + n <= m);
        CHECK(p.offset(p.count) + p.hop + n > m);
        CHECK(p.count == oracle::count_windows(m, n, p.hop));
    }
}

TEST_CASE("window count matches enumeration for other overlaps") {
    std::mt19937_64 gen(12);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 2 + gen() % 64;
        std::size_t m = n + gen() % 500;
        double overlap = static_cast<double>(gen() % 95) / 100.0;
        auto p = plan_windows(m, n, overlap);
        CHECK(p.hop >= 1);
        CHECK(p.count == oracle::count_windows(m, n, p.hop));
    }
}
