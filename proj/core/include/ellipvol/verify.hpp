#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "ellipvol/quadrature.hpp"
#include "ellipvol/volumes.hpp"

namespace ellipvol {

/// Sampling window for the Jacobian-determinant scan.
struct GridSpec {
    double lo = 0.5;
    double hi = 4.0;
    int count = 200;
    std::uint64_t seed = 0;
};

/// Both sides of the closed-form determinant identity
///
///   det | 1            1            1          |
///       | 1/(t^2+a^2)  1/(t^2+b^2)  1/(t^2+c^2)|
///       | 1/(s^2+1/a^2) ...                    |
///
///   = -(a^2-b^2)(a^2-c^2)(b^2-c^2)(s^2 t^2 - 1)
///     / [(abc)^2 (t^2/a^2+1)(t^2/b^2+1)(t^2/c^2+1)
///              (a^2 s^2+1)(b^2 s^2+1)(c^2 s^2+1)],
///
/// evaluated in extended precision. residual = |lhs - rhs| / max(1, |lhs|).
struct DetIdentityEval {
    double lhs;
    double rhs;
    double residual;
};
DetIdentityEval det_identity_eval(double s, double t, double a, double b, double c);

/// ((st)^2 - 1)(1 - (st)^5); nonpositive for all s, t > 0, zero iff st = 1.
double kernel_sign(double s, double t);

/// Determinant of the matrix with rows (1,1,1), the dual G row and the plain
/// G row, together with the product of row norms as a scale reference.
struct Matrix10Eval {
    double det;
    double row_scale;
};
Matrix10Eval eval_matrix10(const Semiaxes& s, const QuadratureSpec& spec = {});

/// Sign survey of the determinant above over strictly ordered random triples.
/// sign is +1/-1 when every sample agrees and stays away from zero, else 0.
struct Lemma2Report {
    int sign = 0;
    double min_abs_det = 0.0;
    int samples = 0;
};
Lemma2Report lemma2_scan(const GridSpec& grid, const QuadratureSpec& spec = {});

/// Critical points of t -> V1(t, t, C/t^2) inside [t_lo, t_hi], located by
/// slope sign changes over a log-uniform sample and bisection refinement.
/// C is the fixed product abc along the curve. Requires C^{1/3} strictly
/// inside the range and n_samples >= 100.
std::vector<double> lemma1_critical_points(double C, double t_lo, double t_hi, int n_samples,
                                           const QuadratureSpec& spec = {});

enum class CoordPair { AB = 0, AC = 1, BC = 2 };

struct SymmetricPoint {
    std::size_t index;  // into LevelCurve::points
    CoordPair pair;
};

/// Polyline approximation of the intersection of the V1 and V3 level sets
/// through the start parameters.
struct LevelCurve {
    std::vector<std::array<double, 3>> points;
    bool closed = false;
    std::vector<SymmetricPoint> symmetric_points;  // equal-coordinate crossings
    std::vector<double> v2_profile;                // V2 at each point
    double v1_target = 0.0;
    double v3_target = 0.0;
};

class DegenerateStart : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CorrectorFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Predictor-corrector continuation of the level-set intersection curve.
///
/// Targets are (V1, V3) of start. Tracing begins at the equal-coordinate
/// point (u, u, w), u < w, found on the curve by one-dimensional root
/// finding, advances along the normalized cross product of the two
/// gradients, and projects back with a planar two-variable Newton solve.
/// The step is halved on corrector failure (at most 10 times) and relaxed
/// back afterwards. When the trajectory re-enters step/2 of the start the
/// tracer converges onto the start point and marks the curve closed.
/// Equal-coordinate crossings are refined by bisection along the curve and
/// inserted as polyline vertices.
///
/// Throws DegenerateStart for a ball and CorrectorFailure if a step cannot
/// be completed.
LevelCurve trace_intersection_curve(const Semiaxes& start, double step, int max_steps,
                                    const QuadratureSpec& spec = {});

/// Arc number per point: arcs are delimited by the symmetric points, the
/// first of which is the start vertex itself.
std::vector<int> arc_indices(const LevelCurve& curve);

/// CSV export: header a,b,c,v2,arc_index; 17 significant digits.
void write_curve_csv(const LevelCurve& curve, std::ostream& os);

}  // namespace ellipvol
