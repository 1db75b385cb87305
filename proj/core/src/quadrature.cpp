#include "ellipvol/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace ellipvol {

namespace {

// Gauss(7)/Kronrod(15) nodes and weights on [-1, 1].
// Odd-indexed abscissae are the embedded Gauss points.
constexpr double kXgk[8] = {
    0.9914553711208126392068547, 0.9491079123427585245261897,
    0.8648644233597690727897128, 0.7415311855993944398638648,
    0.5860872354676911302941448, 0.4058451513773971669066064,
    0.2077849550078984676006894, 0.0};
constexpr double kWgk[8] = {
    0.0229353220105292249637320, 0.0630920926299785532907007,
    0.1047900103222501838398763, 0.1406532597155259187451896,
    0.1690047266392679028265834, 0.1903505780647854099132564,
    0.2044329400752988924141620, 0.2094821410847278280129992};
constexpr double kWg[4] = {
    0.1294849661688696932706114, 0.2797053914892766679014678,
    0.3818300505051189449503698, 0.4179591836734693877551020};

constexpr double kHalfPi = 1.57079632679489661923;

struct Interval {
    double lo, hi;
    double value;
    double error;
};

struct Rule15Result {
    double value;
    double error;
};

// One Kronrod-15 application with the |K15 - G7| based error estimate,
// damped by the integrand's deviation scale as in classic library practice.
template <class F>
Rule15Result kronrod15(const F& g, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);

    const double fc = g(center);
    double resg = kWg[3] * fc;
    double resk = kWgk[7] * fc;
    double resabs = kWgk[7] * std::abs(fc);

    double fv[15];
    fv[7] = fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kXgk[i];
        const double f1 = g(center - dx);
        const double f2 = g(center + dx);
        fv[i] = f1;
        fv[14 - i] = f2;
        resk += kWgk[i] * (f1 + f2);
        resabs += kWgk[i] * (std::abs(f1) + std::abs(f2));
        if (i % 2 == 1) resg += kWg[i / 2] * (f1 + f2);
    }

    const double reskh = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fc - reskh);
    for (int i = 0; i < 7; ++i) {
        resasc += kWgk[i] * (std::abs(fv[i] - reskh) + std::abs(fv[14 - i] - reskh));
    }

    const double value = resk * half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);
    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    const double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
        err = std::max(err, 50.0 * eps * resabs);
    }
    return {value, err};
}

}  // namespace

QuadratureResult integrate_line(const std::function<double(double)>& f,
                                const QuadratureSpec& spec) {
    if (!(spec.rel_tol > 0.0) || !(spec.abs_tol >= 0.0) || spec.max_subdivisions < 1) {
        throw std::invalid_argument("integrate_line: invalid QuadratureSpec");
    }

    // s = tan(theta) maps the line onto (-pi/2, pi/2); ds = (1 + tan^2) dtheta.
    // Non-finite samples are forgiven only at the interval endpoints, where
    // every admissible integrand vanishes in exact arithmetic.
    auto transformed = [&f](double theta) {
        const double t = std::tan(theta);
        const double v = f(t) * (1.0 + t * t);
        if (!std::isfinite(v)) {
            if (theta == -kHalfPi || theta == kHalfPi) return 0.0;
            throw std::domain_error("integrate_line: non-finite integrand sample at s = " +
                                    std::to_string(t));
        }
        return v;
    };

    std::vector<Interval> live;
    live.reserve(64);
    auto seed = [&](double lo, double hi) {
        const Rule15Result r = kronrod15(transformed, lo, hi);
        live.push_back({lo, hi, r.value, r.error});
    };
    seed(-kHalfPi, 0.0);
    seed(0.0, kHalfPi);

    int subdivisions = 0;
    for (;;) {
        long double total = 0.0L, total_err = 0.0L;
        for (const Interval& iv : live) {
            total += iv.value;
            total_err += iv.error;
        }
        const double value = static_cast<double>(total);
        const double error = static_cast<double>(total_err);
        const double target = std::max(spec.abs_tol, spec.rel_tol * std::abs(value));
        if (error <= target) {
            return {value, error, subdivisions};
        }
        if (subdivisions >= spec.max_subdivisions) {
            throw NonConvergence("integrate_line: tolerance not met after " +
                                     std::to_string(subdivisions) + " subdivisions",
                                 {value, error, subdivisions});
        }

        auto worst = std::max_element(
            live.begin(), live.end(),
            [](const Interval& x, const Interval& y) { return x.error < y.error; });
        const Interval split = *worst;
        const double mid = 0.5 * (split.lo + split.hi);
        if (mid <= split.lo || mid >= split.hi) {
            // Interval collapsed to machine width and still above tolerance.
            throw NonConvergence("integrate_line: interval underflow during refinement",
                                 {value, error, subdivisions});
        }
        *worst = live.back();
        live.pop_back();
        seed(split.lo, mid);
        seed(mid, split.hi);
        ++subdivisions;
    }
}

}  // namespace ellipvol
