#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "ellipvol/volumes.hpp"

using namespace ellipvol;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2Pi = 2.50662827463100050242;

// G(1,1,1) = (1/3) E|chi_3| = 2*sqrt(2)/(3*sqrt(pi)).
const double kGIso = 2.0 * std::sqrt(2.0) / (3.0 * std::sqrt(kPi));

// Closed-form prolate spheroid values for semiaxes (2,1,1):
// mean-width integral and half the surface area.
const double kV1Spheroid211 = 4.0 * (1.0 + std::log(2.0 + std::sqrt(3.0)) / (2.0 * std::sqrt(3.0)));
const double kV2Spheroid211 = kPi + 4.0 * kPi * kPi / (3.0 * std::sqrt(3.0));

// Direct sampling of E[a^2 x^2 / sqrt(a^2x^2 + b^2y^2 + c^2z^2)]; the
// independent oracle that fixes the integral-representation prefactor.
double g_montecarlo(double a, double b, double c, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    long double sum = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = normal(rng), y = normal(rng), z = normal(rng);
        sum += a * a * x * x / std::sqrt(a * a * x * x + b * b * y * y + c * c * z * z);
    }
    return static_cast<double>(sum / n);
}

}  // namespace

TEST_CASE("semiaxes validation and canonical order") {
    CHECK_THROWS_AS(Semiaxes(0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Semiaxes(1.0, -2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Semiaxes(1.0, 1.0, std::numeric_limits<double>::infinity()),
                    std::invalid_argument);

    const Semiaxes s = Semiaxes(1.0, 3.0, 2.0).canonical();
    CHECK(s.a == 3.0);
    CHECK(s.b == 2.0);
    CHECK(s.c == 1.0);
}

TEST_CASE("G isotropic value against chi_3 closed form and Monte Carlo") {
    const double g = g_value(1.0, 1.0, 1.0);
    CHECK(g == doctest::Approx(kGIso).epsilon(1e-10));

    // 1e7 samples -> standard error ~ 1e-4; stay within 5 sigma.
    const double mc = g_montecarlo(1.0, 1.0, 1.0, 10'000'000, 20240817u);
    CHECK(std::abs(mc - g) < 5e-4);
}

TEST_CASE("G anisotropic value against Monte Carlo") {
    const double g = g_value(2.0, 1.0, 0.5);
    const double mc = g_montecarlo(2.0, 1.0, 0.5, 10'000'000, 987654321u);
    CHECK(std::abs(mc - g) < 1e-3);
}

TEST_CASE("G degree-1 homogeneity and argument symmetry") {
    CHECK(g_value(2.0, 2.0, 2.0) == doctest::Approx(2.0 * kGIso).epsilon(1e-10));
    CHECK(g_value(3.0, 2.0, 1.0) == doctest::Approx(g_value(3.0, 1.0, 2.0)).epsilon(1e-12));
    for (double lam : {0.5, 2.0, 10.0}) {
        CHECK(g_value(lam * 1.7, lam * 0.9, lam * 0.4) ==
              doctest::Approx(lam * g_value(1.7, 0.9, 0.4)).epsilon(1e-10));
    }
}

TEST_CASE("G cyclic sum equals V1 / sqrt(2*pi)") {
    const double sum = g_value(2, 1, 1) + g_value(1, 2, 1) + g_value(1, 1, 2);
    CHECK(sum == doctest::Approx(kV1Spheroid211 / kSqrt2Pi).epsilon(1e-9));
    CHECK(sum * kSqrt2Pi == doctest::Approx(v1(Semiaxes(2, 1, 1))).epsilon(1e-12));
}

TEST_CASE("unit ball and scaled balls") {
    const Semiaxes ball(1, 1, 1);
    CHECK(v1(ball) == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(v2(ball) == doctest::Approx(2.0 * kPi).epsilon(1e-10));
    CHECK(v3(ball) == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-14));

    for (double r : {0.1, 0.5, 7.0}) {
        const Semiaxes s(r, r, r);
        CHECK(v1(s) == doctest::Approx(4.0 * r).epsilon(1e-10));
        CHECK(v2(s) == doctest::Approx(2.0 * kPi * r * r).epsilon(1e-10));
        CHECK(v3(s) == doctest::Approx(kKappa3 * r * r * r).epsilon(1e-14));
    }
}

TEST_CASE("prolate spheroid closed forms") {
    const Semiaxes s(2, 1, 1);
    CHECK(v1(s) == doctest::Approx(kV1Spheroid211).epsilon(1e-9));
    CHECK(v2(s) == doctest::Approx(kV2Spheroid211).epsilon(1e-9));
    CHECK(v3(s) == doctest::Approx(8.0 * kPi / 3.0).epsilon(1e-14));

    const IntrinsicVolumes iv = forward(s);
    CHECK(iv.v1 == doctest::Approx(kV1Spheroid211).epsilon(1e-9));
    CHECK(iv.v2 == doctest::Approx(kV2Spheroid211).epsilon(1e-9));
    CHECK(iv.v3 == doctest::Approx(8.0 * kPi / 3.0).epsilon(1e-14));
}

TEST_CASE("v3 permutation symmetry") {
    CHECK(v3(Semiaxes(1, 2, 3)) == doctest::Approx(8.0 * kPi).epsilon(1e-14));
    CHECK(v3(Semiaxes(1, 2, 3)) == v3(Semiaxes(3, 2, 1)));
}

TEST_CASE("forward permutation symmetry") {
    const std::array<std::array<double, 3>, 6> perms{{{2.3, 1.1, 0.7},
                                                      {2.3, 0.7, 1.1},
                                                      {1.1, 2.3, 0.7},
                                                      {1.1, 0.7, 2.3},
                                                      {0.7, 2.3, 1.1},
                                                      {0.7, 1.1, 2.3}}};
    const IntrinsicVolumes ref = forward(Semiaxes(2.3, 1.1, 0.7));
    for (const auto& p : perms) {
        const IntrinsicVolumes iv = forward(Semiaxes(p[0], p[1], p[2]));
        CHECK(iv.v1 == doctest::Approx(ref.v1).epsilon(1e-12));
        CHECK(iv.v2 == doctest::Approx(ref.v2).epsilon(1e-12));
        CHECK(iv.v3 == doctest::Approx(ref.v3).epsilon(1e-12));
    }
}

TEST_CASE("homogeneity of degree k") {
    const Semiaxes s(1.9, 1.2, 0.6);
    const IntrinsicVolumes base = forward(s);
    for (double lam : {0.5, 2.0, 10.0}) {
        const IntrinsicVolumes scaled = forward(Semiaxes(lam * s.a, lam * s.b, lam * s.c));
        CHECK(scaled.v1 == doctest::Approx(lam * base.v1).epsilon(1e-10));
        CHECK(scaled.v2 == doctest::Approx(lam * lam * base.v2).epsilon(1e-10));
        CHECK(scaled.v3 == doctest::Approx(lam * lam * lam * base.v3).epsilon(1e-10));
    }
}

TEST_CASE("monotonicity in each semiaxis") {
    const double grid[3] = {0.6, 1.3, 2.8};
    for (double b : grid) {
        for (double c : grid) {
            double prev1 = 0.0, prev2 = 0.0, prev3 = 0.0;
            for (double a : {0.4, 0.9, 1.7, 3.1}) {
                const IntrinsicVolumes iv = forward(Semiaxes(a, b, c));
                CHECK(iv.v1 > prev1);
                CHECK(iv.v2 > prev2);
                CHECK(iv.v3 > prev3);
                prev1 = iv.v1;
                prev2 = iv.v2;
                prev3 = iv.v3;
            }
        }
    }
}

TEST_CASE("ball minimizes v1 at fixed v3") {
    std::mt19937_64 rng(515151u);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int i = 0; i < 20; ++i) {
        Semiaxes s(std::exp(u(rng)), std::exp(u(rng)), std::exp(u(rng)));
        if (s.aspect_ratio() < 1.0 + 1e-3) continue;
        // Rescale to v3 = 4*pi/3.
        const double lam = std::cbrt(kKappa3 / v3(s));
        const Semiaxes t(lam * s.a, lam * s.b, lam * s.c);
        CHECK(v1(t) > 4.0);
    }
}

TEST_CASE("isoperimetric bound v1 >= (48 v3 / pi)^(1/3)") {
    std::mt19937_64 rng(717171u);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 20; ++i) {
        const Semiaxes s(std::exp(u(rng)), std::exp(u(rng)), std::exp(u(rng)));
        const IntrinsicVolumes iv = forward(s);
        CHECK(iv.v1 >= std::cbrt(48.0 * iv.v3 / kPi) * (1.0 - 1e-12));
    }
}

TEST_CASE("jacobian_log rows at the unit ball are degenerate") {
    const Jacobian3 j = jacobian_log(LogSemiaxes{0.0, 0.0, 0.0});
    CHECK(j.coords == JacobianCoords::LogSemiaxes);
    // Rows 2 and 3 are multiples of (1,1,1) there, so the determinant vanishes.
    CHECK(j.m[1][0] == doctest::Approx(j.m[1][1]).epsilon(1e-10));
    CHECK(j.m[2][0] == doctest::Approx(j.m[2][2]).epsilon(1e-10));
    const double scale = std::abs(j.m[0][0] * j.m[1][0] * j.m[2][0]);
    CHECK(std::abs(j.det()) <= 1e-10 * std::max(scale, 1.0));
}

TEST_CASE("jacobian_log matches central finite differences at (ln3, ln2, 0)") {
    const LogSemiaxes p{std::log(3.0), std::log(2.0), 0.0};
    const Jacobian3 j = jacobian_log(p);
    CHECK(std::abs(j.det()) > 0.0);

    // Independent evaluation of the log-scaled triple through forward().
    auto w = [](const LogSemiaxes& q) -> std::array<double, 3> {
        const Semiaxes s = q.exp();
        const IntrinsicVolumes iv = forward(s);
        return {iv.v3 / kKappa3, (4.0 * std::sqrt(2.0) / (3.0 * std::sqrt(kPi))) * iv.v2 / iv.v3,
                iv.v1 / kSqrt2Pi};
    };
    const double h = 1e-5;
    for (int col = 0; col < 3; ++col) {
        LogSemiaxes hi = p, lo = p;
        (col == 0 ? hi.la : col == 1 ? hi.lb : hi.lc) += h;
        (col == 0 ? lo.la : col == 1 ? lo.lb : lo.lc) -= h;
        const auto whi = w(hi), wlo = w(lo);
        for (int row = 0; row < 3; ++row) {
            const double fd = (whi[row] - wlo[row]) / (2.0 * h);
            CHECK(j.m[row][col] == doctest::Approx(fd).epsilon(1e-5));
        }
    }

    // Orderings for a > b > c: the W1 row decreases along the columns and the
    // magnitudes of the (negative) W2 row increase.
    CHECK(j.m[2][0] > j.m[2][1]);
    CHECK(j.m[2][1] > j.m[2][2]);
    CHECK(j.m[1][0] < 0.0);
    CHECK(-j.m[1][0] < -j.m[1][1]);
    CHECK(-j.m[1][1] < -j.m[1][2]);
}

TEST_CASE("jacobian row 3 is exact and ball gradient splits evenly") {
    const Jacobian3 j = jacobian(Semiaxes(2, 1, 1));
    CHECK(j.coords == JacobianCoords::Semiaxes);
    CHECK(j.m[2][0] == doctest::Approx(kKappa3 * 1.0).epsilon(1e-14));
    CHECK(j.m[2][1] == doctest::Approx(kKappa3 * 2.0).epsilon(1e-14));
    CHECK(j.m[2][2] == doctest::Approx(kKappa3 * 2.0).epsilon(1e-14));

    const Jacobian3 jb = jacobian(Semiaxes(1, 1, 1));
    for (int col = 0; col < 3; ++col) {
        CHECK(jb.m[0][col] == doctest::Approx(4.0 / 3.0).epsilon(1e-10));
    }
}

TEST_CASE("jacobian matches central finite differences at (3,2,1)") {
    const Semiaxes s(3, 2, 1);
    const Jacobian3 j = jacobian(s);
    for (int col = 0; col < 3; ++col) {
        std::array<double, 3> hi{s.a, s.b, s.c}, lo{s.a, s.b, s.c};
        const double h = 1e-6 * hi[col];
        hi[col] += h;
        lo[col] -= h;
        const IntrinsicVolumes fhi = forward(Semiaxes(hi[0], hi[1], hi[2]));
        const IntrinsicVolumes flo = forward(Semiaxes(lo[0], lo[1], lo[2]));
        const double fd[3] = {(fhi.v1 - flo.v1) / (2.0 * h), (fhi.v2 - flo.v2) / (2.0 * h),
                              (fhi.v3 - flo.v3) / (2.0 * h)};
        for (int row = 0; row < 3; ++row) {
            CHECK(j.m[row][col] == doctest::Approx(fd[row]).epsilon(1e-5));
        }
    }
}

TEST_CASE("gradient orderings for strictly ordered axes") {
    std::mt19937_64 rng(31337u);
    std::uniform_real_distribution<double> u(std::log(0.3), std::log(4.0));
    for (int i = 0; i < 25; ++i) {
        double x[3] = {std::exp(u(rng)), std::exp(u(rng)), std::exp(u(rng))};
        std::sort(x, x + 3, std::greater<>());
        if (x[0] - x[1] < 1e-6 || x[1] - x[2] < 1e-6) continue;
        const Jacobian3 j = jacobian(Semiaxes(x[0], x[1], x[2]));
        CHECK(j.m[0][0] > j.m[0][1]);
        CHECK(j.m[0][1] > j.m[0][2]);
        CHECK(j.m[2][0] < j.m[2][1]);
        CHECK(j.m[2][1] < j.m[2][2]);
    }
}

TEST_CASE("forward_jacobian agrees with the split evaluations") {
    const Semiaxes s(2.7, 1.4, 0.9);
    const ForwardJacobian fj = forward_jacobian(s);
    const IntrinsicVolumes iv = forward(s);
    const Jacobian3 j = jacobian(s);
    CHECK(fj.values.v1 == doctest::Approx(iv.v1).epsilon(1e-13));
    CHECK(fj.values.v2 == doctest::Approx(iv.v2).epsilon(1e-13));
    CHECK(fj.values.v3 == doctest::Approx(iv.v3).epsilon(1e-13));
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) CHECK(fj.jac.m[r][c] == doctest::Approx(j.m[r][c]).epsilon(1e-13));

    const V1Gradient vg = v1_gradient(s);
    CHECK(vg.value == doctest::Approx(iv.v1).epsilon(1e-13));
    for (int c = 0; c < 3; ++c) CHECK(vg.grad[c] == doctest::Approx(j.m[0][c]).epsilon(1e-13));
}

TEST_CASE("extreme aspect ratio sets the reduced-accuracy flag") {
    EvalStatus st;
    (void)v1(Semiaxes(2e6, 1.0, 1.0), {}, &st);
    CHECK(st.reduced_accuracy);

    EvalStatus ok;
    (void)v1(Semiaxes(2.0, 1.0, 1.0), {}, &ok);
    CHECK_FALSE(ok.reduced_accuracy);
}
