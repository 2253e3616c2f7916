#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wsr/accumulator.hpp"

using namespace wsr;

namespace {

StableAccumulator accumulate(const test::TermSet& s) {
    StableAccumulator acc;
    for (const test::WeightedTerm& t : s.terms) acc.add(t.exponent, t.rgb, t.alpha);
    return acc;
}

double rel_error(double got, const test::BigFloat& want) {
    const test::BigFloat diff = abs(test::BigFloat(got) - want);
    return want == 0 ? static_cast<double>(diff) : static_cast<double>(diff / abs(want));
}

}  // namespace

TEST_SUITE("accumulator") {

TEST_CASE("quotient matches a 50-digit oracle across wide exponent ranges") {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        const test::TermSet s = test::random_term_set(rng);
        const Vec3 got = accum_quotient(accumulate(s), s.background, s.background_weight);
        const auto want = test::big_quotient(s);
        for (std::size_t c = 0; c < 3; ++c) CHECK(rel_error(got[c], want[c]) < 1e-9);
    }
}

TEST_CASE("naive sums fail where the normalized form does not") {
    test::TermSet s;
    s.background = {0.2, 0.2, 0.2};
    s.background_weight = 0.0;
    s.terms = {{800.0, {1.0, 0.0, 0.0}, 0.5}, {810.0, {0.0, 1.0, 0.0}, 0.5}};
    const auto naive = test::naive_quotient(s);
    CHECK(std::isnan(naive[0]));
    const Vec3 got = accum_quotient(accumulate(s), s.background, s.background_weight);
    const double r = 1.0 / (1.0 + std::exp(-10.0));
    CHECK(got.x == doctest::Approx(r).epsilon(1e-14));
    CHECK(got.y == doctest::Approx(1.0 - r).epsilon(1e-14));
}

TEST_CASE("order of insertion does not change the result") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        test::TermSet s = test::random_term_set(rng);
        const Vec3 a = accum_quotient(accumulate(s), s.background, s.background_weight);
        std::shuffle(s.terms.begin(), s.terms.end(), rng);
        const Vec3 b = accum_quotient(accumulate(s), s.background, s.background_weight);
        for (std::size_t c = 0; c < 3; ++c) CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-12));
    }
}

TEST_CASE("mu tracks the minimum exponent and sums stay bounded") {
    StableAccumulator acc;
    acc = accum_add(acc, 3.0, {1, 1, 1}, 1.0);
    CHECK(acc.mu == 3.0);
    acc = accum_add(acc, 5.0, {1, 1, 1}, 1.0);
    CHECK(acc.mu == 3.0);
    CHECK(acc.den == doctest::Approx(1.0 + std::exp(-2.0)));
    acc = accum_add(acc, -1.0, {1, 1, 1}, 1.0);
    CHECK(acc.mu == -1.0);
    CHECK(acc.den == doctest::Approx(1.0 + std::exp(-4.0) + std::exp(-6.0)));
    CHECK(acc.count == 3);
    CHECK_THROWS_AS(acc.add(std::numeric_limits<double>::infinity(), {0, 0, 0}, 1.0), std::invalid_argument);
}

TEST_CASE("empty or zero-weight sums fall back to the background") {
    bool degenerate = false;
    const Vec3 bg{0.1, 0.2, 0.3};
    Vec3 c = accum_quotient(StableAccumulator{}, bg, 0.0, &degenerate);
    CHECK(degenerate);
    CHECK(c.y == 0.2);
    c = accum_quotient(StableAccumulator{}, bg, 2.0, &degenerate);
    CHECK_FALSE(degenerate);
    CHECK(c.z == doctest::Approx(0.3));
}

TEST_CASE("background weight enters in the sums' frame") {
    // Single term with exponent mu; quotient = (c_B w_B + a c e^-mu) / (w_B + a e^-mu).
    for (double mu : {-700.0, -3.0, 0.0, 4.0, 700.0}) {
        StableAccumulator acc;
        acc.add(mu, {1.0, 0.0, 0.5}, 0.25);
        const Vec3 got = accum_quotient(acc, {0.0, 1.0, 0.5}, 0.75);
        test::TermSet s;
        s.terms = {{mu, {1.0, 0.0, 0.5}, 0.25}};
        s.background = {0.0, 1.0, 0.5};
        s.background_weight = 0.75;
        const auto want = test::big_quotient(s);
        for (std::size_t c = 0; c < 3; ++c) CHECK(rel_error(got[c], want[c]) < 1e-12);
    }
}

TEST_CASE("compensated sum recovers small addends") {
    CompensatedSum<double> s;
    s.add(1.0);
    for (int i = 0; i < 1000; ++i) s.add(1e-17);
    CHECK(s.value() == doctest::Approx(1.0 + 1e-14).epsilon(1e-16));
    CompensatedSum<float> f;
    f.add(1e8f);
    f.add(1.0f);
    f.add(-1e8f);
    CHECK(f.value() == 1.0f);
}

}
