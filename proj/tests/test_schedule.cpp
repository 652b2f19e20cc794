#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "support/stats.hpp"
#include "voxdiff/schedule.hpp"

using namespace voxdiff;

TEST_CASE("default schedule satisfies its invariants") {
    NoiseSchedule s = build_schedule(ScheduleSpec{});
    REQUIRE(s.T() == 2000);
    CHECK(s.gamma(0) == 1.0);
    CHECK(s.gamma(s.T()) < 1e-3);
    CHECK(s.gamma(s.T()) > 0.0);
    for (int t = 1; t <= s.T(); ++t) CHECK(s.gamma(t) < s.gamma(t - 1));
}

TEST_CASE("single zero-beta step degenerates to the identity") {
    NoiseSchedule s = build_schedule("linear-beta", 1, 0.0, 0.0);
    REQUIRE(s.T() == 1);
    CHECK(s.alpha_at(1) == 1.0);
    CHECK(s.gamma(1) == 1.0);
}

TEST_CASE("gamma matches a high-precision product oracle") {
    NoiseSchedule s = build_schedule("linear-beta", 10, 1e-4, 1e-1);
    long double prod = 1.0L;
    for (int t = 0; t < 10; ++t) {
        const long double beta = 1e-4L + (1e-1L - 1e-4L) * t / 9.0L;
        prod *= 1.0L - beta;
        const double expect = static_cast<double>(prod);
        CHECK(std::abs(s.gamma(t + 1) - expect) < 1e-13 * expect);
    }
}

TEST_CASE("gamma recurrence holds to 1e-12 relative") {
    for (const auto& spec :
         {ScheduleSpec{}, ScheduleSpec{"linear-beta", 120, 2e-4, 0.12},
          ScheduleSpec{"linear-beta", 200, 1e-4, 0.08}}) {
        NoiseSchedule s = build_schedule(spec);
        for (int t = 1; t <= s.T(); ++t) {
            const double prev = s.gamma(t - 1);
            CHECK(std::abs(s.gamma(t) - prev * s.alpha_at(t)) <= 1e-12 * prev);
        }
        CHECK(s.gamma(s.T()) < 1e-3);
    }
}

TEST_CASE("invalid schedule parameters are rejected") {
    CHECK_THROWS_AS(build_schedule("linear-beta", 0, 1e-4, 1e-2), Error);
    CHECK_THROWS_AS(build_schedule("linear-beta", 10, -0.1, 1e-2), Error);
    CHECK_THROWS_AS(build_schedule("linear-beta", 10, 1e-4, 1.0), Error);
    CHECK_THROWS_AS(build_schedule("cosine", 10, 1e-4, 1e-2), Error);
    CHECK_THROWS_AS(NoiseSchedule(std::vector<double>{0.5, 1.5}), Error);
    CHECK_THROWS_AS(NoiseSchedule(std::vector<double>{}), Error);
}

TEST_CASE("sample_gamma stays inside its step interval") {
    NoiseSchedule s = build_schedule("linear-beta", 50, 1e-3, 5e-2);
    RngStream rng = RngStream(404).child(stream_tag::gamma);
    for (int i = 0; i < 20000; ++i) {
        GammaDraw d = sample_gamma(s, rng);
        REQUIRE(d.t >= 1);
        REQUIRE(d.t <= s.T());
        CHECK(d.gamma > s.gamma(d.t));
        CHECK(d.gamma < s.gamma(d.t - 1));
    }
}

TEST_CASE("single-step prior has the closed-form mean") {
    NoiseSchedule s = build_schedule("linear-beta", 1, 0.3, 0.3);
    REQUIRE(s.gamma(1) == doctest::Approx(0.7));
    RngStream rng = RngStream(11).child(stream_tag::gamma);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_gamma(s, rng).gamma;
    const double mean = sum / n;
    const double expect = 0.5 * (1.0 + s.gamma(1));
    // Uniform(gamma_1, 1): sd of the sample mean is (1-gamma_1)/sqrt(12 n).
    const double sigma = (1.0 - s.gamma(1)) / std::sqrt(12.0 * n);
    CHECK(std::abs(mean - expect) < 3.0 * sigma);
}

TEST_CASE("gamma draws follow the piecewise-uniform mixture") {
    NoiseSchedule s = build_schedule("linear-beta", 50, 1e-3, 5e-2);
    RngStream rng = RngStream(2024).child(stream_tag::gamma);
    const int n = 100000;
    // Each schedule interval carries probability 1/T by construction, so the
    // interval occupancy histogram is the mixture test.
    std::vector<double> counts(static_cast<std::size_t>(s.T()), 0.0);
    for (int i = 0; i < n; ++i) {
        GammaDraw d = sample_gamma(s, rng);
        counts[static_cast<std::size_t>(d.t - 1)] += 1.0;
    }
    std::vector<double> expected(counts.size(), static_cast<double>(n) / s.T());
    const double chi2 = teststat::chi2_statistic(counts, expected);
    CHECK(teststat::chi2_pvalue(chi2, s.T() - 1) > 0.01);

    // Within one interval the draw must be uniform; KS against the linear CDF.
    std::vector<double> within;
    RngStream rng2 = RngStream(77).child(stream_tag::gamma);
    for (int i = 0; i < 40000; ++i) {
        GammaDraw d = sample_gamma(s, rng2);
        if (d.t == 25) within.push_back(d.gamma);
    }
    REQUIRE(within.size() > 300);
    const double lo = s.gamma(25), hi = s.gamma(24);
    const double p = teststat::ks_pvalue(
        within, [&](double g) { return (g - lo) / (hi - lo); });
    CHECK(p > 0.01);
}
