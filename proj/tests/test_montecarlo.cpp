#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "ellipvol/montecarlo.hpp"
#include "ellipvol/volumes.hpp"

using namespace ellipvol;

namespace {
constexpr double kPi = 3.14159265358979323846;

// Zero-variance integrands (ball shadows) leave std_error at rounding level,
// so keep a small absolute floor in the comparison.
bool within_sigmas(const McEstimate& e, double truth, double sigmas) {
    return std::abs(e.mean - truth) <= sigmas * e.std_error + 1e-12 * std::abs(truth);
}
}  // namespace

TEST_CASE("ball volume and projection constants") {
    CHECK(ball_volume(0) == doctest::Approx(1.0));
    CHECK(ball_volume(1) == doctest::Approx(2.0));
    CHECK(ball_volume(2) == doctest::Approx(kPi));
    CHECK(ball_volume(3) == doctest::Approx(4.0 * kPi / 3.0));
    CHECK(ball_volume(4) == doctest::Approx(kPi * kPi / 2.0));

    // In dimension 3 both projection constants collapse to 2.
    CHECK(kubota_constant(3, 1) == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(kubota_constant(3, 2) == doctest::Approx(2.0).epsilon(1e-13));
    // C(4,2) * kappa_4 / kappa_2^2 = 6 * (pi^2/2) / pi^2 = 3.
    CHECK(kubota_constant(4, 2) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("tsirelson estimates on the unit ball") {
    McSpec spec{400'000, 42, 4};
    const SemiaxesN ball({1.0, 1.0, 1.0});

    CHECK(within_sigmas(mc_tsirelson(ball, 3, spec), 4.0 * kPi / 3.0, 4.0));
    CHECK(within_sigmas(mc_tsirelson(ball, 2, spec), 2.0 * kPi, 4.0));
    CHECK(within_sigmas(mc_tsirelson(ball, 1, spec), 4.0, 4.0));
}

TEST_CASE("tsirelson m=1 reproduces the spheroid mean width") {
    McSpec spec{400'000, 7, 4};
    const double truth = v1(Semiaxes(2, 1, 1));
    CHECK(within_sigmas(mc_tsirelson(SemiaxesN({2, 1, 1}), 1, spec), truth, 4.0));
}

TEST_CASE("tsirelson in dimension 4") {
    McSpec spec{400'000, 11, 4};
    const SemiaxesN ball({1.0, 1.0, 1.0, 1.0});
    // V2(B4) = C(4,2) kappa_4 / kappa_2 = 3*pi.
    CHECK(within_sigmas(mc_tsirelson(ball, 2, spec), 3.0 * kPi, 4.0));
}

TEST_CASE("tsirelson input validation") {
    McSpec spec{10, 1, 1};
    CHECK_THROWS_AS(mc_tsirelson(SemiaxesN({1, 1, 1}), 4, spec), std::invalid_argument);
    CHECK_THROWS_AS(mc_tsirelson(SemiaxesN({1, 1, 1}), 0, spec), std::invalid_argument);
    CHECK_THROWS_AS(SemiaxesN({1.0, -1.0}), std::invalid_argument);
    CHECK_THROWS_AS(SemiaxesN({}), std::invalid_argument);
}

TEST_CASE("kubota estimates against forward values") {
    McSpec spec{400'000, 2024, 4};
    const Semiaxes ball(1, 1, 1);
    CHECK(within_sigmas(kubota_estimate(ball, 1, spec), 4.0, 4.0));
    CHECK(within_sigmas(kubota_estimate(ball, 2, spec), 2.0 * kPi, 4.0));

    const Semiaxes sph(2, 1, 1);
    CHECK(within_sigmas(kubota_estimate(sph, 1, spec), v1(sph), 4.0));
    CHECK(within_sigmas(kubota_estimate(sph, 2, spec), v2(sph), 4.0));

    CHECK_THROWS_AS(kubota_estimate(ball, 3, spec), std::invalid_argument);
}

TEST_CASE("distance to ellipsoid") {
    const Semiaxes ball(1, 1, 1);
    CHECK(dist_point_ellipsoid({2, 0, 0}, ball) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dist_point_ellipsoid({0, 0, 0}, ball) == 0.0);

    const Semiaxes sph(2, 1, 1);
    CHECK(dist_point_ellipsoid({3, 0, 0}, sph) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(dist_point_ellipsoid({0, 0.5, 0}, sph) == 0.0);
    CHECK(dist_point_ellipsoid({0, -2, 0}, sph) == doctest::Approx(1.0).epsilon(1e-10));

    // Off-axis check against brute-force boundary sampling.
    const Semiaxes e(2.0, 1.0, 0.5);
    const std::array<double, 3> p{1.7, 1.3, 0.9};
    double best = 1e300;
    const int n = 400;
    for (int i = 0; i <= n; ++i) {
        const double th = kPi * i / n;
        for (int j = 0; j < 2 * n; ++j) {
            const double ph = kPi * j / n;
            const double x = e.a * std::sin(th) * std::cos(ph);
            const double y = e.b * std::sin(th) * std::sin(ph);
            const double z = e.c * std::cos(th);
            const double d2 =
                (p[0] - x) * (p[0] - x) + (p[1] - y) * (p[1] - y) + (p[2] - z) * (p[2] - z);
            best = std::min(best, d2);
        }
    }
    CHECK(dist_point_ellipsoid(p, e) == doctest::Approx(std::sqrt(best)).epsilon(1e-4));
}

TEST_CASE("steiner polynomial matches hit-or-miss volume") {
    const Semiaxes s(1, 1, 1);
    McSpec spec{300'000, 99, 4};

    SteinerCheck chk = steiner_volume_check(s, 1.0, spec);
    CHECK(chk.polynomial == doctest::Approx(32.0 * kPi / 3.0).epsilon(1e-10));
    CHECK(within_sigmas(chk.mc, chk.polynomial, 4.0));

    chk = steiner_volume_check(s, 0.5, spec);
    CHECK(chk.polynomial == doctest::Approx(4.5 * kPi).epsilon(1e-10));
    CHECK(within_sigmas(chk.mc, chk.polynomial, 4.0));

    const Semiaxes e(2, 1, 0.5);
    chk = steiner_volume_check(e, 0.5, spec);
    CHECK(within_sigmas(chk.mc, chk.polynomial, 4.0));
}

TEST_CASE("seeded runs are reproducible bit for bit") {
    McSpec spec{100'000, 77, 8};
    const SemiaxesN s({1.5, 1.0, 0.5});
    const McEstimate a = mc_tsirelson(s, 2, spec);
    const McEstimate b = mc_tsirelson(s, 2, spec);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    CHECK(a.samples == b.samples);

    McSpec other = spec;
    other.seed = 78;
    CHECK(mc_tsirelson(s, 2, other).mean != a.mean);
}

TEST_CASE("thread cap does not change results") {
    McSpec spec{50'000, 5, 8};
    const Semiaxes s(2, 1, 1);
    const McEstimate base = kubota_estimate(s, 1, spec);

    setenv("ELLIPVOL_THREADS", "1", 1);
    const McEstimate capped = kubota_estimate(s, 1, spec);
    unsetenv("ELLIPVOL_THREADS");

    CHECK(base.mean == capped.mean);
    CHECK(base.std_error == capped.std_error);
}

TEST_CASE("quadrupling samples roughly halves the standard error") {
    const SemiaxesN s({2.0, 1.0, 0.5});
    McSpec small{250'000, 4242, 4};
    McSpec big{1'000'000, 4242, 4};
    const double se1 = mc_tsirelson(s, 2, small).std_error;
    const double se4 = mc_tsirelson(s, 2, big).std_error;
    CHECK(se4 < se1);
    CHECK(std::abs(se4 / se1 - 0.5) < 0.2 * 0.5);
}

TEST_CASE("std_error matches the direct formula on a tiny run") {
    McSpec spec{1000, 13, 1};
    const McEstimate e = kubota_estimate(Semiaxes(2, 1, 1), 1, spec);
    CHECK(e.samples == 1000);
    CHECK(e.std_error > 0.0);
    CHECK(std::isfinite(e.std_error));
}
