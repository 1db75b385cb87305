#include "ellipvol/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>

namespace ellipvol {

namespace {

using Vec3 = std::array<double, 3>;

Vec3 add(const Vec3& x, const Vec3& y) { return {x[0] + y[0], x[1] + y[1], x[2] + y[2]}; }
Vec3 sub(const Vec3& x, const Vec3& y) { return {x[0] - y[0], x[1] - y[1], x[2] - y[2]}; }
Vec3 scaled(const Vec3& x, double f) { return {f * x[0], f * x[1], f * x[2]}; }
double dot(const Vec3& x, const Vec3& y) { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; }
double norm(const Vec3& x) { return std::sqrt(dot(x, x)); }
Vec3 cross(const Vec3& x, const Vec3& y) {
    return {x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]};
}
Vec3 normalized(const Vec3& x) {
    const double n = norm(x);
    return {x[0] / n, x[1] / n, x[2] / n};
}

// Relative convergence demanded of the corrector; traced points satisfy the
// level constraints within 10x of this.
constexpr double kCorrectorTol = 1e-10;

struct CurveEval {
    double v1;
    Vec3 grad1;
    double v3;
    Vec3 grad3;
};

CurveEval eval_curve_point(const Vec3& x, const QuadratureSpec& spec) {
    const V1Gradient vg = v1_gradient(Semiaxes(x[0], x[1], x[2]), spec);
    CurveEval e{};
    e.v1 = vg.value;
    e.grad1 = vg.grad;
    e.v3 = kKappa3 * x[0] * x[1] * x[2];
    e.grad3 = {kKappa3 * x[1] * x[2], kKappa3 * x[0] * x[2], kKappa3 * x[0] * x[1]};
    return e;
}

struct CorrectResult {
    bool ok = false;
    Vec3 x{};
    CurveEval eval{};
};

// Planar Newton solve of (V1 - v1t, V3 - v3t) = 0 in the plane through y
// orthogonal to dir.
CorrectResult correct(Vec3 y, const Vec3& dir, double v1t, double v3t,
                      const QuadratureSpec& spec) {
    const Vec3 e = std::abs(dir[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    const Vec3 u1 = normalized(cross(dir, e));
    const Vec3 u2 = cross(dir, u1);

    CorrectResult out;
    for (int it = 0; it < 12; ++it) {
        if (!(y[0] > 0.0) || !(y[1] > 0.0) || !(y[2] > 0.0)) return out;
        const CurveEval ev = eval_curve_point(y, spec);
        const double f1 = ev.v1 - v1t;
        const double f2 = ev.v3 - v3t;
        if (std::abs(f1) <= kCorrectorTol * v1t && std::abs(f2) <= kCorrectorTol * v3t) {
            out.ok = true;
            out.x = y;
            out.eval = ev;
            return out;
        }
        const double m11 = dot(ev.grad1, u1), m12 = dot(ev.grad1, u2);
        const double m21 = dot(ev.grad3, u1), m22 = dot(ev.grad3, u2);
        const double det = m11 * m22 - m12 * m21;
        const double scale = std::max({std::abs(m11 * m22), std::abs(m12 * m21), 1e-300});
        if (!(std::abs(det) > 1e-13 * scale)) return out;
        const double d1 = (-f1 * m22 + f2 * m12) / det;
        const double d2 = (-f2 * m11 + f1 * m21) / det;
        y = add(y, add(scaled(u1, d1), scaled(u2, d2)));
        if (!std::isfinite(y[0]) || !std::isfinite(y[1]) || !std::isfinite(y[2])) return out;
    }
    return out;
}

double gap_of(const Vec3& x, CoordPair p) {
    switch (p) {
        case CoordPair::AB: return x[0] - x[1];
        case CoordPair::AC: return x[0] - x[2];
        case CoordPair::BC: return x[1] - x[2];
    }
    return 0.0;
}

struct Crossing {
    double where;  // fraction along the segment, for ordering
    Vec3 point;
    CoordPair pair;
};

// Bisection along the curve between two on-curve points with opposite gap
// signs; each midpoint is projected back onto the curve before the gap test.
Vec3 refine_crossing(Vec3 ya, Vec3 yb, CoordPair pair, double v1t, double v3t,
                     const QuadratureSpec& spec) {
    double ga = gap_of(ya, pair);
    Vec3 best = ya;
    for (int it = 0; it < 60; ++it) {
        const Vec3 chord = sub(yb, ya);
        const double len = norm(chord);
        if (len < 1e-14 * std::max(norm(ya), 1.0)) break;
        const CorrectResult cr = correct(add(ya, scaled(chord, 0.5)), normalized(chord), v1t,
                                         v3t, spec);
        if (!cr.ok) break;
        const double gm = gap_of(cr.x, pair);
        best = cr.x;
        if (gm == 0.0) break;
        if ((gm > 0.0) == (ga > 0.0)) {
            ya = cr.x;
            ga = gm;
        } else {
            yb = cr.x;
        }
    }
    return best;
}

}  // namespace

DetIdentityEval det_identity_eval(double s, double t, double a, double b, double c) {
    for (double x : {a, b, c}) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw std::invalid_argument("det_identity_eval: semiaxes must be positive");
        }
    }
    if (!std::isfinite(s) || !std::isfinite(t)) {
        throw std::invalid_argument("det_identity_eval: non-finite s or t");
    }

    // Extended precision keeps the cofactor cancellation below 1e-15 even
    // for the near-degenerate corners of the sampling box.
    const long double ls = s, lt = t, la = a, lb = b, lc = c;
    const long double a2 = la * la, b2 = lb * lb, c2 = lc * lc;
    const long double s2 = ls * ls, t2 = lt * lt;

    const long double r2a = 1.0L / (t2 + a2), r2b = 1.0L / (t2 + b2), r2c = 1.0L / (t2 + c2);
    const long double r3a = 1.0L / (s2 + 1.0L / a2), r3b = 1.0L / (s2 + 1.0L / b2),
                      r3c = 1.0L / (s2 + 1.0L / c2);

    const long double lhs =
        (r2b * r3c - r2c * r3b) - (r2a * r3c - r2c * r3a) + (r2a * r3b - r2b * r3a);

    const long double num =
        -(a2 - b2) * (a2 - c2) * (b2 - c2) * (s2 * t2 - 1.0L);
    const long double den = (la * lb * lc) * (la * lb * lc) * (t2 / a2 + 1.0L) *
                            (t2 / b2 + 1.0L) * (t2 / c2 + 1.0L) * (a2 * s2 + 1.0L) *
                            (b2 * s2 + 1.0L) * (c2 * s2 + 1.0L);
    const long double rhs = num / den;

    DetIdentityEval out{};
    out.lhs = static_cast<double>(lhs);
    out.rhs = static_cast<double>(rhs);
    out.residual = static_cast<double>(std::fabs(lhs - rhs) / std::max(1.0L, std::fabs(lhs)));
    return out;
}

double kernel_sign(double s, double t) {
    const double st = s * t;
    const double st2 = st * st;
    return (st2 - 1.0) * (1.0 - st2 * st2 * st);
}

Matrix10Eval eval_matrix10(const Semiaxes& s, const QuadratureSpec& spec) {
    const double a = s.a, b = s.b, c = s.c;
    const Vec3 r1{1.0, 1.0, 1.0};
    const Vec3 r2{g_value(1 / a, 1 / b, 1 / c, spec), g_value(1 / b, 1 / a, 1 / c, spec),
                  g_value(1 / c, 1 / a, 1 / b, spec)};
    const Vec3 r3{g_value(a, b, c, spec), g_value(b, a, c, spec), g_value(c, a, b, spec)};

    Matrix10Eval out{};
    out.det = r1[0] * (r2[1] * r3[2] - r2[2] * r3[1]) - r1[1] * (r2[0] * r3[2] - r2[2] * r3[0]) +
              r1[2] * (r2[0] * r3[1] - r2[1] * r3[0]);
    out.row_scale = norm(r1) * norm(r2) * norm(r3);
    return out;
}

Lemma2Report lemma2_scan(const GridSpec& grid, const QuadratureSpec& spec) {
    if (!(grid.lo > 0.0) || !(grid.hi > grid.lo) || grid.count < 1) {
        throw std::invalid_argument("lemma2_scan: invalid GridSpec");
    }

    std::mt19937_64 rng(grid.seed);
    std::uniform_real_distribution<double> u(std::log(grid.lo), std::log(grid.hi));

    Lemma2Report rep;
    rep.min_abs_det = std::numeric_limits<double>::infinity();
    int sign = 0;
    bool consistent = true;

    for (int i = 0; i < grid.count; ++i) {
        double x[3];
        do {
            for (double& v : x) v = std::exp(u(rng));
            std::sort(x, x + 3, std::greater<>());
        } while (x[0] - x[1] < 1e-9 * x[0] || x[1] - x[2] < 1e-9 * x[1]);

        const Matrix10Eval me = eval_matrix10(Semiaxes(x[0], x[1], x[2]), spec);
        ++rep.samples;
        rep.min_abs_det = std::min(rep.min_abs_det, std::abs(me.det));
        if (std::abs(me.det) <= 1e-12) {
            consistent = false;
            continue;
        }
        const int s = me.det > 0.0 ? 1 : -1;
        if (sign == 0) {
            sign = s;
        } else if (s != sign) {
            consistent = false;
        }
    }
    rep.sign = consistent ? sign : 0;
    return rep;
}

std::vector<double> lemma1_critical_points(double C, double t_lo, double t_hi, int n_samples,
                                           const QuadratureSpec& spec) {
    if (!(C > 0.0) || !std::isfinite(C)) {
        throw std::invalid_argument("lemma1_critical_points: C must be positive");
    }
    if (!(t_lo > 0.0) || !(t_hi > t_lo)) {
        throw std::invalid_argument("lemma1_critical_points: bad range");
    }
    if (n_samples < 100) {
        throw std::invalid_argument("lemma1_critical_points: need n_samples >= 100");
    }
    const double tc = std::cbrt(C);
    if (!(t_lo < tc) || !(tc < t_hi)) {
        throw std::invalid_argument(
            "lemma1_critical_points: C^(1/3) must lie strictly inside the range");
    }

    auto phi = [&](double t) { return v1(Semiaxes(t, t, C / (t * t)), spec); };

    const double llo = std::log(t_lo), lhi = std::log(t_hi);
    std::vector<double> ts(n_samples), vals(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        ts[i] = std::exp(llo + (lhi - llo) * i / double(n_samples - 1));
        vals[i] = phi(ts[i]);
    }

    // Symmetric log-step slope; its sign flips exactly at interior extrema.
    const double hrel = 1e-6;
    auto slope = [&](double t) { return phi(t * (1.0 + hrel)) - phi(t * (1.0 - hrel)); };

    std::vector<double> found;
    for (int i = 0; i + 2 < n_samples; ++i) {
        const double d0 = vals[i + 1] - vals[i];
        const double d1 = vals[i + 2] - vals[i + 1];
        if (!(d0 < 0.0 && d1 > 0.0) && !(d0 > 0.0 && d1 < 0.0)) continue;

        double lo = ts[i], hi = ts[i + 2];
        double slo = slope(lo);
        for (int it = 0; it < 100 && (hi - lo) > 1e-10 * hi; ++it) {
            const double mid = std::sqrt(lo * hi);
            const double sm = slope(mid);
            if (sm == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((sm > 0.0) == (slo > 0.0)) {
                lo = mid;
                slo = sm;
            } else {
                hi = mid;
            }
        }
        const double root = std::sqrt(lo * hi);
        if (found.empty() || std::abs(root / found.back() - 1.0) > 1e-8) found.push_back(root);
    }
    return found;
}

LevelCurve trace_intersection_curve(const Semiaxes& start, double step, int max_steps,
                                    const QuadratureSpec& spec) {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw std::invalid_argument("trace_intersection_curve: step must be positive");
    }
    if (max_steps < 1) throw std::invalid_argument("trace_intersection_curve: max_steps < 1");

    const Semiaxes s0 = start.canonical();
    if (s0.a / s0.c - 1.0 < 1e-9) {
        throw DegenerateStart("trace_intersection_curve: start is a ball, the curve collapses");
    }

    const double v1t = v1(s0, spec);
    const double v3t = v3(s0);
    const double prod = s0.a * s0.b * s0.c;

    // Entry point (u, u, w), u < w: the level value v1t is attained on both
    // sides of the minimum of V1 along (t, t, prod/t^2); take the left root.
    const double tcube = std::cbrt(prod);
    auto psi = [&](double t) { return v1(Semiaxes(t, t, prod / (t * t)), spec) - v1t; };
    double lo = tcube, hi = tcube;
    {
        double t = tcube;
        for (int i = 0; i < 200; ++i) {
            t *= 0.7;
            if (psi(t) > 0.0) {
                lo = t;
                break;
            }
            hi = t;
        }
        if (lo == tcube) {
            throw CorrectorFailure("trace_intersection_curve: failed to bracket the entry point");
        }
    }
    while (hi - lo > 1e-14 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (psi(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double u_axis = 0.5 * (lo + hi);
    const Vec3 x0{u_axis, u_axis, prod / (u_axis * u_axis)};
    const double scale0 = norm(x0);

    LevelCurve curve;
    curve.v1_target = v1t;
    curve.v3_target = v3t;
    curve.points.push_back(x0);
    curve.v2_profile.push_back(v2(Semiaxes(x0[0], x0[1], x0[2]), spec));
    curve.symmetric_points.push_back({0, CoordPair::AB});

    CurveEval ecur = eval_curve_point(x0, spec);
    Vec3 tdir = normalized(cross(ecur.grad1, ecur.grad3));
    if (tdir[0] - tdir[1] < 0.0) tdir = scaled(tdir, -1.0);  // enter the a > b side

    Vec3 x = x0;
    double h = step;
    bool left_start = false;
    bool want_close = false;

    for (int k = 0; k < max_steps && !want_close; ++k) {
        Vec3 t_new = normalized(cross(ecur.grad1, ecur.grad3));
        if (dot(t_new, tdir) < 0.0) t_new = scaled(t_new, -1.0);
        tdir = t_new;

        CorrectResult cr;
        int halvings = 0;
        for (;;) {
            cr = correct(add(x, scaled(tdir, h)), tdir, v1t, v3t, spec);
            if (cr.ok) break;
            if (++halvings > 10) {
                throw CorrectorFailure(
                    "trace_intersection_curve: corrector failed after 10 step halvings");
            }
            h *= 0.5;
        }

        // Wall crossings inside the accepted segment, ordered along it. Both
        // endpoint gaps must be nonzero: the start vertex sits exactly on a
        // wall and is already recorded.
        std::vector<Crossing> crossings;
        for (CoordPair p : {CoordPair::AB, CoordPair::AC, CoordPair::BC}) {
            const double ga = gap_of(x, p), gb = gap_of(cr.x, p);
            if (ga == 0.0 || gb == 0.0) continue;
            if ((ga > 0.0) == (gb > 0.0)) continue;
            const Vec3 xp = refine_crossing(x, cr.x, p, v1t, v3t, spec);
            // The loop re-enters the start vertex through its own wall; that
            // crossing is already vertex 0.
            if (p == CoordPair::AB && norm(sub(xp, x0)) < step) continue;
            const Vec3 seg = sub(cr.x, x);
            crossings.push_back({dot(sub(xp, x), seg) / dot(seg, seg), xp, p});
        }
        std::sort(crossings.begin(), crossings.end(),
                  [](const Crossing& l, const Crossing& r) { return l.where < r.where; });
        for (const Crossing& c : crossings) {
            curve.symmetric_points.push_back({curve.points.size(), c.pair});
            curve.points.push_back(c.point);
            curve.v2_profile.push_back(v2(Semiaxes(c.point[0], c.point[1], c.point[2]), spec));
        }

        curve.points.push_back(cr.x);
        curve.v2_profile.push_back(v2(Semiaxes(cr.x[0], cr.x[1], cr.x[2]), spec));
        x = cr.x;
        ecur = cr.eval;
        h = std::min(step, 2.0 * h);

        const double dist0 = norm(sub(x, x0));
        if (dist0 > step) left_start = true;
        if (left_start && dist0 < 0.5 * step) want_close = true;
    }

    if (want_close) {
        // Flow into the start vertex along the curve with shrinking tangent
        // steps; no crossings are recorded here, the start already is one.
        for (int i = 0; i < 40; ++i) {
            const double gap = norm(sub(x0, x));
            if (gap <= 1e-9 * scale0) break;
            Vec3 t_new = normalized(cross(ecur.grad1, ecur.grad3));
            if (dot(t_new, tdir) < 0.0) t_new = scaled(t_new, -1.0);
            tdir = t_new;
            const double along = dot(sub(x0, x), tdir);
            const CorrectResult cr = correct(add(x, scaled(tdir, along)), tdir, v1t, v3t, spec);
            if (!cr.ok) break;
            const double newgap = norm(sub(x0, cr.x));
            if (newgap >= gap) break;
            x = cr.x;
            ecur = cr.eval;
        }
        curve.closed = norm(sub(x0, x)) <= 1e-6 * scale0;
        curve.points.push_back(x);
        curve.v2_profile.push_back(v2(Semiaxes(x[0], x[1], x[2]), spec));
    }

    return curve;
}

std::vector<int> arc_indices(const LevelCurve& curve) {
    std::vector<int> out(curve.points.size(), 0);
    if (curve.symmetric_points.empty()) return out;
    int arc = -1;
    std::size_t next_sym = 0;
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        while (next_sym < curve.symmetric_points.size() &&
               curve.symmetric_points[next_sym].index == i) {
            ++arc;
            ++next_sym;
        }
        out[i] = std::max(arc, 0);
    }
    return out;
}

void write_curve_csv(const LevelCurve& curve, std::ostream& os) {
    const std::vector<int> arcs = arc_indices(curve);
    os << "a,b,c,v2,arc_index\n";
    char buf[160];
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%d\n", curve.points[i][0],
                      curve.points[i][1], curve.points[i][2], curve.v2_profile[i], arcs[i]);
        os << buf;
    }
}

}  // namespace ellipvol
