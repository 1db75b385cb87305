#include "ellipvol/volumes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ellipvol {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2Pi = 2.50662827463100050242;  // sqrt(2*pi)
constexpr double kGPrefactor = 1.0 / kSqrt2Pi;

void check_axis(double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::invalid_argument(std::string("semiaxis ") + name + " must be positive and finite");
    }
}

struct GTriple {
    double s0, s1, s2;  // G(a,b,c), G(b,a,c), G(c,a,b)
};

// The three cyclic G values share one axis triple; callers combine them into
// values and gradients without re-integrating.
GTriple g_triple(double a, double b, double c, const QuadratureSpec& spec) {
    return {g_value(a, b, c, spec), g_value(b, a, c, spec), g_value(c, a, b, spec)};
}

void flag_aspect(double a, double b, double c, EvalStatus* status) {
    if (!status) return;
    const double hi = std::max({a, b, c});
    const double lo = std::min({a, b, c});
    if (hi / lo > kReducedAccuracyAspect) status->reduced_accuracy = true;
}

}  // namespace

Semiaxes::Semiaxes(double a_, double b_, double c_) : a(a_), b(b_), c(c_) {
    check_axis(a, "a");
    check_axis(b, "b");
    check_axis(c, "c");
}

Semiaxes Semiaxes::canonical() const {
    std::array<double, 3> v{a, b, c};
    std::sort(v.begin(), v.end(), std::greater<>());
    return {v[0], v[1], v[2]};
}

double Semiaxes::max_axis() const { return std::max({a, b, c}); }
double Semiaxes::min_axis() const { return std::min({a, b, c}); }

LogSemiaxes LogSemiaxes::from(const Semiaxes& s) {
    return {std::log(s.a), std::log(s.b), std::log(s.c)};
}

Semiaxes LogSemiaxes::exp() const {
    return {std::exp(la), std::exp(lb), std::exp(lc)};
}

double Jacobian3::det() const {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

double g_value(double a, double b, double c, const QuadratureSpec& spec, EvalStatus* status) {
    check_axis(a, "a");
    check_axis(b, "b");
    check_axis(c, "c");
    flag_aspect(a, b, c, status);

    const double inv_a2 = 1.0 / (a * a);
    const double a2 = a * a, b2 = b * b, c2 = c * c;
    auto integrand = [=](double s) {
        const double s2 = s * s;
        return 1.0 / ((s2 + inv_a2) * std::sqrt((a2 * s2 + 1.0) * (b2 * s2 + 1.0) * (c2 * s2 + 1.0)));
    };
    return kGPrefactor * integrate_line(integrand, spec).value;
}

double v1(const Semiaxes& s, const QuadratureSpec& spec, EvalStatus* status) {
    flag_aspect(s.a, s.b, s.c, status);
    const GTriple g = g_triple(s.a, s.b, s.c, spec);
    return kSqrt2Pi * (g.s0 + g.s1 + g.s2);
}

double v2(const Semiaxes& s, const QuadratureSpec& spec, EvalStatus* status) {
    flag_aspect(s.a, s.b, s.c, status);
    const Semiaxes dual{1.0 / s.a, 1.0 / s.b, 1.0 / s.c};
    return 0.5 * kPi * s.a * s.b * s.c * v1(dual, spec);
}

double v3(const Semiaxes& s) { return kKappa3 * s.a * s.b * s.c; }

IntrinsicVolumes forward(const Semiaxes& s, const QuadratureSpec& spec, EvalStatus* status) {
    return {v1(s, spec, status), v2(s, spec, status), v3(s)};
}

Jacobian3 jacobian_log(const LogSemiaxes& p, const QuadratureSpec& spec) {
    const double ea = std::exp(p.la), eb = std::exp(p.lb), ec = std::exp(p.lc);
    const GTriple gd = g_triple(1.0 / ea, 1.0 / eb, 1.0 / ec, spec);
    const GTriple gs = g_triple(ea, eb, ec, spec);
    const double w3 = ea * eb * ec;

    Jacobian3 j{};
    j.coords = JacobianCoords::LogSemiaxes;
    j.m[0] = {w3, w3, w3};
    j.m[1] = {-gd.s0, -gd.s1, -gd.s2};
    j.m[2] = {gs.s0, gs.s1, gs.s2};
    return j;
}

Jacobian3 jacobian(const Semiaxes& s, const QuadratureSpec& spec) {
    return forward_jacobian(s, spec).jac;
}

ForwardJacobian forward_jacobian(const Semiaxes& s, const QuadratureSpec& spec) {
    const double a = s.a, b = s.b, c = s.c;
    const GTriple gs = g_triple(a, b, c, spec);
    const GTriple gd = g_triple(1.0 / a, 1.0 / b, 1.0 / c, spec);

    const double v1_val = kSqrt2Pi * (gs.s0 + gs.s1 + gs.s2);
    const double v1_dual = kSqrt2Pi * (gd.s0 + gd.s1 + gd.s2);
    const double abc = a * b * c;

    ForwardJacobian out{};
    out.values = {v1_val, 0.5 * kPi * abc * v1_dual, kKappa3 * abc};

    // dV1/da = sqrt(2*pi) E[a x^2 / sqrt(a^2x^2+b^2y^2+c^2z^2)] = sqrt(2*pi) G(a,b,c)/a.
    out.jac.coords = JacobianCoords::Semiaxes;
    out.jac.m[0] = {kSqrt2Pi * gs.s0 / a, kSqrt2Pi * gs.s1 / b, kSqrt2Pi * gs.s2 / c};
    // dV2/da = (pi/2) sqrt(2*pi) * bc * (G(1/b,1/a,1/c) + G(1/c,1/a,1/b)):
    // product rule on (pi/2) abc V1(dual); the diagonal dual term cancels.
    const double k2 = 0.5 * kPi * kSqrt2Pi;
    out.jac.m[1] = {k2 * b * c * (gd.s1 + gd.s2),
                    k2 * a * c * (gd.s0 + gd.s2),
                    k2 * a * b * (gd.s0 + gd.s1)};
    out.jac.m[2] = {kKappa3 * b * c, kKappa3 * a * c, kKappa3 * a * b};
    return out;
}

V1Gradient v1_gradient(const Semiaxes& s, const QuadratureSpec& spec) {
    const GTriple gs = g_triple(s.a, s.b, s.c, spec);
    V1Gradient out{};
    out.value = kSqrt2Pi * (gs.s0 + gs.s1 + gs.s2);
    out.grad = {kSqrt2Pi * gs.s0 / s.a, kSqrt2Pi * gs.s1 / s.b, kSqrt2Pi * gs.s2 / s.c};
    return out;
}

}  // namespace ellipvol
