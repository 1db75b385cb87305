#pragma once

#include <array>

#include "ellipvol/quadrature.hpp"

namespace ellipvol {

// Unit-ball volumes kappa_k = pi^{k/2} / Gamma(k/2 + 1) for k = 0..3.
inline constexpr double kKappa0 = 1.0;
inline constexpr double kKappa1 = 2.0;
inline constexpr double kKappa2 = 3.14159265358979323846;
inline constexpr double kKappa3 = 4.18879020478639098462;  // 4*pi/3

/// Semiaxis lengths of a 3-d ellipsoid. Positive and finite by construction.
struct Semiaxes {
    double a, b, c;

    Semiaxes(double a_, double b_, double c_);

    /// The representative with a >= b >= c. All solver outputs use it.
    Semiaxes canonical() const;

    double max_axis() const;
    double min_axis() const;
    double aspect_ratio() const { return max_axis() / min_axis(); }
};

/// Natural logarithms of semiaxes; the coordinates the solver iterates in.
struct LogSemiaxes {
    double la, lb, lc;

    static LogSemiaxes from(const Semiaxes& s);
    Semiaxes exp() const;
};

struct IntrinsicVolumes {
    double v1;  // proportional to mean width (length)
    double v2;  // half the surface area (area)
    double v3;  // volume
};

enum class JacobianCoords { Semiaxes, LogSemiaxes };

/// 3x3 matrix of partial derivatives; m[i][j] = d(row function i)/d(coord j).
struct Jacobian3 {
    std::array<std::array<double, 3>, 3> m;
    JacobianCoords coords;

    double det() const;
};

/// Beyond this axis ratio the integrand develops a spike at the origin and
/// results are flagged as reduced accuracy rather than trusted blindly.
inline constexpr double kReducedAccuracyAspect = 1e6;

struct EvalStatus {
    bool reduced_accuracy = false;
};

/// G(a,b,c) = E[a^2 x^2 / sqrt(a^2 x^2 + b^2 y^2 + c^2 z^2)] for independent
/// standard normal x, y, z, evaluated through the one-dimensional form
///
///   G(a,b,c) = (2*pi)^{-1/2} * Int_R ds / ((s^2 + 1/a^2) *
///              sqrt((a^2 s^2 + 1)(b^2 s^2 + 1)(c^2 s^2 + 1))).
///
/// The prefactor is pinned by the isotropic value G(1,1,1) = 2*sqrt(2)/(3*sqrt(pi)),
/// which the test suite reproduces by direct Monte Carlo of the expectation.
/// Homogeneous of degree 1 and symmetric in its last two arguments.
double g_value(double a, double b, double c, const QuadratureSpec& spec = {},
               EvalStatus* status = nullptr);

/// V1 = sqrt(2*pi) * (G(a,b,c) + G(b,a,c) + G(c,a,b)).
double v1(const Semiaxes& s, const QuadratureSpec& spec = {}, EvalStatus* status = nullptr);

/// V2 = (pi/2) * a*b*c * V1(1/a, 1/b, 1/c), through v1 on the dual semiaxes.
double v2(const Semiaxes& s, const QuadratureSpec& spec = {}, EvalStatus* status = nullptr);

/// V3 = (4*pi/3) * a*b*c, exact.
double v3(const Semiaxes& s);

/// The full triple (V1, V2, V3). Invariant under permutations of the axes.
IntrinsicVolumes forward(const Semiaxes& s, const QuadratureSpec& spec = {},
                         EvalStatus* status = nullptr);

/// Derivatives of the log-scaled functions
///   W3 = e^{la+lb+lc},
///   W2 = E sqrt(e^{-2la} x^2 + e^{-2lb} y^2 + e^{-2lc} z^2),
///   W1 = E sqrt(e^{ 2la} x^2 + e^{ 2lb} y^2 + e^{ 2lc} z^2)
/// with respect to (la, lb, lc), rows in that order. Row 2 is negative: W2
/// decreases in every log-semiaxis.
Jacobian3 jacobian_log(const LogSemiaxes& p, const QuadratureSpec& spec = {});

/// Derivatives of (V1, V2, V3) with respect to the semiaxes.
/// Row 3 is exactly (4*pi/3) * (bc, ac, ab).
Jacobian3 jacobian(const Semiaxes& s, const QuadratureSpec& spec = {});

/// forward() and jacobian() from one shared set of six G evaluations.
struct ForwardJacobian {
    IntrinsicVolumes values;
    Jacobian3 jac;  // semiaxes coordinates
};
ForwardJacobian forward_jacobian(const Semiaxes& s, const QuadratureSpec& spec = {});

/// V1 together with its gradient from the same three G evaluations; the
/// cheap paired evaluation used by level-set tracing.
struct V1Gradient {
    double value;
    std::array<double, 3> grad;
};
V1Gradient v1_gradient(const Semiaxes& s, const QuadratureSpec& spec = {});

}  // namespace ellipvol
