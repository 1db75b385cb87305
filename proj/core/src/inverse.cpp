#include "ellipvol/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ellipvol {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTrustStep = 0.5;     // max Newton step, log units
constexpr double kMinLineScale = 1e-4;

using Vec3 = std::array<double, 3>;

double ball_lower_bound_v1(double v3) { return std::cbrt(48.0 * v3 / kPi); }

// Log of the v1 excess over the ball with the same v3, for one-parameter
// spheroid families (e^d,1,1), (1,1,e^-d) and (e^{d/2},1,e^{-d/2}); sampled
// once from the forward map and frozen. Monotone in d, so invertible by
// piecewise-linear interpolation.
constexpr int kTableLen = 12;
constexpr double kTableD[kTableLen] = {0.0, 0.25, 0.5, 0.75, 1.0, 1.5,
                                       2.0, 2.5,  3.0, 4.0,  5.0, 6.0};
constexpr double kProlateU[kTableLen] = {0.0,      0.011496, 0.047020, 0.106856,
                                         0.189621, 0.412443, 0.688690, 0.994867,
                                         1.315975, 1.975093, 2.640445, 3.306894};
constexpr double kOblateU[kTableLen] = {0.0,      0.010625, 0.040282, 0.085332,
                                        0.142172, 0.279171, 0.433287, 0.594914,
                                        0.759624, 1.091934, 1.425125, 1.758439};
constexpr double kMidU[kTableLen] = {0.0,      0.008305, 0.032888, 0.072806,
                                     0.126658, 0.269398, 0.447620, 0.650016,
                                     0.868463, 1.333612, 1.818305, 2.311675};

double invert_family_table(const double* u_table, double u) {
    if (u <= 0.0) return 0.0;
    for (int i = 1; i < kTableLen; ++i) {
        if (u <= u_table[i]) {
            const double f = (u - u_table[i - 1]) / (u_table[i] - u_table[i - 1]);
            return kTableD[i - 1] + f * (kTableD[i] - kTableD[i - 1]);
        }
    }
    // Extrapolate with the last slope; cap the spread at aspect e^12.
    const double slope = (kTableD[kTableLen - 1] - kTableD[kTableLen - 2]) /
                         (u_table[kTableLen - 1] - u_table[kTableLen - 2]);
    return std::min(12.0, kTableD[kTableLen - 1] + slope * (u - u_table[kTableLen - 1]));
}

Vec3 sorted_desc(Vec3 v) {
    std::sort(v.begin(), v.end(), std::greater<>());
    return v;
}

// The Jacobian is singular whenever two semiaxes coincide, so starting
// points (and rescue points after a singular solve) are pushed strictly
// inside the chamber by a small log-space separation.
Vec3 separate(Vec3 l, double delta) {
    if (l[0] - l[1] < delta) {
        const double d = 0.5 * (delta - (l[0] - l[1]));
        l[0] += d;
        l[1] -= d;
    }
    if (l[1] - l[2] < delta) {
        const double d = 0.5 * (delta - (l[1] - l[2]));
        l[1] += d;
        l[2] -= d;
    }
    return sorted_desc(l);
}

// Gaussian elimination with partial pivoting; false on (near-)singularity.
bool solve3(std::array<Vec3, 3> m, Vec3 rhs, Vec3& out) {
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        }
        if (piv != col) {
            std::swap(m[piv], m[col]);
            std::swap(rhs[piv], rhs[col]);
        }
        double scale = 0.0;
        for (int c = 0; c < 3; ++c) scale = std::max(scale, std::abs(m[col][c]));
        if (!(std::abs(m[col][col]) > 1e-15 * scale)) return false;
        for (int r = col + 1; r < 3; ++r) {
            const double f = m[r][col] / m[col][col];
            for (int c = col; c < 3; ++c) m[r][c] -= f * m[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    for (int r = 2; r >= 0; --r) {
        double s = rhs[r];
        for (int c = r + 1; c < 3; ++c) s -= m[r][c] * out[c];
        out[r] = s / m[r][r];
        if (!std::isfinite(out[r])) return false;
    }
    return true;
}

struct Residual {
    Vec3 rel;    // V_i / target_i - 1
    Vec3 logres; // log1p of the above
    double norm; // Euclidean norm of logres
    double max_rel;
};

Residual make_residual(const IntrinsicVolumes& v, const Vec3& target) {
    Residual r{};
    const Vec3 vals{v.v1, v.v2, v.v3};
    for (int i = 0; i < 3; ++i) {
        r.rel[i] = vals[i] / target[i] - 1.0;
        r.logres[i] = std::log1p(r.rel[i]);
    }
    r.norm = std::sqrt(r.logres[0] * r.logres[0] + r.logres[1] * r.logres[1] +
                       r.logres[2] * r.logres[2]);
    r.max_rel = std::max({std::abs(r.rel[0]), std::abs(r.rel[1]), std::abs(r.rel[2])});
    return r;
}

struct NewtonOutcome {
    Vec3 log_axes;
    Residual res;
    int iterations = 0;
    bool converged = false;
};

NewtonOutcome run_newton(Vec3 l, const Vec3& target, const InversionSpec& spec,
                         InversionTrace* trace) {
    NewtonOutcome out{};
    l = sorted_desc(l);

    Semiaxes s(std::exp(l[0]), std::exp(l[1]), std::exp(l[2]));
    ForwardJacobian fj = forward_jacobian(s, spec.quadrature);
    Residual res = make_residual(fj.values, target);
    if (trace) {
        trace->residual_norms.push_back(res.norm);
        trace->iterates.push_back({s.a, s.b, s.c});
    }

    double wall_sep = 1e-6;
    auto wall_rescue = [&]() {
        l = separate(l, wall_sep);
        wall_sep = std::min(1e-2, wall_sep * 100.0);
        s = Semiaxes(std::exp(l[0]), std::exp(l[1]), std::exp(l[2]));
        fj = forward_jacobian(s, spec.quadrature);
        res = make_residual(fj.values, target);
        ++out.iterations;
    };

    Vec3 best_l = l;
    Residual best_res = res;

    // Residuals on the volumes amplify into axis error like tol / (chamber
    // wall gap) near two equal axes, so once the tolerance is met a few
    // polishing steps push the residual to the rounding floor.
    int polish_left = 3;
    for (int it = 0; it < spec.max_iterations; ++it) {
        if (res.max_rel < best_res.max_rel) {
            best_l = l;
            best_res = res;
        }
        if (res.max_rel <= spec.residual_tol) {
            out.converged = true;
            if (polish_left == 0) break;
            --polish_left;
        }

        // d(log V_i)/d(log x_j) = J[i][j] * x_j / V_i.
        const Vec3 vals{fj.values.v1, fj.values.v2, fj.values.v3};
        const Vec3 axes{s.a, s.b, s.c};
        std::array<Vec3, 3> jlog{};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) jlog[i][j] = fj.jac.m[i][j] * axes[j] / vals[i];
        }

        Vec3 step{};
        if (!solve3(jlog, {-res.logres[0], -res.logres[1], -res.logres[2]}, step)) {
            if (out.converged) break;
            // Singular solve: the iterate sits on a chamber wall. Step off it
            // and retry, widening the separation if it keeps happening.
            wall_rescue();
            continue;
        }

        const double maxstep = std::max({std::abs(step[0]), std::abs(step[1]), std::abs(step[2])});
        if (maxstep > kTrustStep) {
            const double f = kTrustStep / maxstep;
            for (double& x : step) x *= f;
        }

        // Backtracking on the merit norm; the sort is the chamber projection.
        bool accepted = false;
        for (double alpha = 1.0; alpha >= kMinLineScale; alpha *= 0.5) {
            const Vec3 lt = sorted_desc({l[0] + alpha * step[0], l[1] + alpha * step[1],
                                         l[2] + alpha * step[2]});
            Semiaxes st(std::exp(lt[0]), std::exp(lt[1]), std::exp(lt[2]));
            ForwardJacobian fjt = forward_jacobian(st, spec.quadrature);
            const Residual rt = make_residual(fjt.values, target);
            if (rt.norm < res.norm) {
                l = lt;
                s = st;
                fj = fjt;
                res = rt;
                accepted = true;
                break;
            }
        }
        ++out.iterations;
        if (!accepted) {
            if (out.converged) break;
            // Clamped steps degenerate next to a wall: nearly the whole
            // direction lies along the null space there. Separate and retry;
            // away from walls a failed search is genuine stagnation.
            const double gap = std::min(l[0] - l[1], l[1] - l[2]);
            if (gap < 1e-3 && it + 1 < spec.max_iterations) {
                wall_rescue();
                continue;
            }
            break;
        }
        if (trace) {
            trace->residual_norms.push_back(res.norm);
            trace->iterates.push_back({s.a, s.b, s.c});
        }
    }

    if (res.max_rel < best_res.max_rel) {
        best_l = l;
        best_res = res;
    }
    out.log_axes = best_l;
    out.res = best_res;
    return out;
}

// Least-squares best cell of a log-spaced aspect-ratio grid, scale pinned by
// the target v3; the restart point when the heuristic guess stalls.
Vec3 grid_search(const Vec3& target, const QuadratureSpec& quad) {
    constexpr int kGridN = 12;
    const double v3_t = target[2];
    double best_score = std::numeric_limits<double>::infinity();
    Vec3 best{0.0, 0.0, 0.0};
    for (int i = 0; i < kGridN; ++i) {
        const double ra = std::pow(100.0, i / double(kGridN - 1));  // a/c
        for (int j = 0; j < kGridN; ++j) {
            const double rb = std::pow(100.0, j / double(kGridN - 1));  // b/c
            if (rb > ra) continue;
            const double c = std::cbrt(v3_t / (kKappa3 * ra * rb));
            const Semiaxes s(ra * c, rb * c, c);
            const IntrinsicVolumes iv = forward(s, quad);
            const double e1 = std::log(iv.v1 / target[0]);
            const double e2 = std::log(iv.v2 / target[1]);
            const double score = e1 * e1 + e2 * e2;
            if (score < best_score) {
                best_score = score;
                best = {std::log(s.a), std::log(s.b), std::log(s.c)};
            }
        }
    }
    return separate(best, 1e-3);
}

}  // namespace

const char* to_string(InversionStatus s) {
    switch (s) {
        case InversionStatus::Converged: return "Converged";
        case InversionStatus::Infeasible: return "Infeasible";
        case InversionStatus::NoConvergence: return "NoConvergence";
    }
    return "?";
}

Feasibility feasible(const IntrinsicVolumes& iv) {
    Feasibility f;
    auto fail = [&f](const std::string& msg) {
        f.ok = false;
        f.violations.push_back(msg);
    };
    if (!std::isfinite(iv.v1) || !std::isfinite(iv.v2) || !std::isfinite(iv.v3)) {
        fail("volumes must be finite");
        return f;
    }
    if (!(iv.v1 > 0.0)) fail("v1 must be positive");
    if (!(iv.v2 > 0.0)) fail("v2 must be positive");
    if (!(iv.v3 > 0.0)) fail("v3 must be positive");
    if (f.ok && iv.v1 < ball_lower_bound_v1(iv.v3) * (1.0 - 1e-12)) {
        fail("v1 below the ball lower bound (48 v3 / pi)^(1/3)");
    }
    return f;
}

Semiaxes initial_guess(const IntrinsicVolumes& iv) {
    const Feasibility f = feasible(iv);
    if (!f.ok) throw std::invalid_argument("initial_guess: infeasible target: " + f.violations[0]);

    const double r = std::cbrt(iv.v3 / kKappa3);
    const double u1 = std::log(iv.v1 / ball_lower_bound_v1(iv.v3));
    if (u1 < 1e-10) return {r, r, r};

    // One candidate per family, all with the target v3; keep the candidate
    // whose forward values sit closest in log space.
    const QuadratureSpec coarse{1e-8, 1e-12, 2000};
    struct Candidate {
        Semiaxes s;
        double score;
    };
    std::vector<Candidate> cands;
    auto add = [&](double la, double lb, double lc) {
        const Semiaxes s(r * std::exp(la), r * std::exp(lb), r * std::exp(lc));
        const IntrinsicVolumes v = forward(s, coarse);
        const double e1 = std::log(v.v1 / iv.v1);
        const double e2 = std::log(v.v2 / iv.v2);
        cands.push_back({s, e1 * e1 + e2 * e2});
    };
    const double dp = invert_family_table(kProlateU, u1);
    add(2.0 * dp / 3.0, -dp / 3.0, -dp / 3.0);
    const double dob = invert_family_table(kOblateU, u1);
    add(dob / 3.0, dob / 3.0, -2.0 * dob / 3.0);
    const double dm = invert_family_table(kMidU, u1);
    add(dm / 2.0, 0.0, -dm / 2.0);

    const auto best = std::min_element(cands.begin(), cands.end(),
                                       [](const Candidate& x, const Candidate& y) {
                                           return x.score < y.score;
                                       });
    // Spheroid candidates sit on a chamber wall where the Jacobian is
    // singular; hand the solver a strictly interior point.
    const Semiaxes cs = best->s.canonical();
    const Vec3 l = separate({std::log(cs.a), std::log(cs.b), std::log(cs.c)}, 1e-3);
    return {std::exp(l[0]), std::exp(l[1]), std::exp(l[2])};
}

InversionReport invert(const IntrinsicVolumes& iv, const InversionSpec& spec,
                       InversionTrace* trace) {
    if (!(spec.residual_tol > 0.0) || spec.max_iterations < 1) {
        throw std::invalid_argument("invert: invalid InversionSpec");
    }

    // The strict gate would reject targets rounded onto the ball boundary at
    // the printed-digit level; anything within solver resolution of the bound
    // is handed to the iteration instead, which either meets residual_tol or
    // reports NoConvergence.
    Feasibility gate = feasible(iv);
    if (!gate.ok && std::isfinite(iv.v3) && iv.v3 > 0.0 && iv.v1 > 0.0 && iv.v2 > 0.0 &&
        iv.v1 >= ball_lower_bound_v1(iv.v3) * (1.0 - std::max(1e-12, 10.0 * spec.residual_tol))) {
        gate.ok = true;
    }
    if (!gate.ok) {
        return {Semiaxes(1.0, 1.0, 1.0), {std::numeric_limits<double>::quiet_NaN(),
                                          std::numeric_limits<double>::quiet_NaN(),
                                          std::numeric_limits<double>::quiet_NaN()},
                0, InversionStatus::Infeasible};
    }

    const Vec3 target{iv.v1, iv.v2, iv.v3};
    IntrinsicVolumes guess_iv = iv;
    if (guess_iv.v1 < ball_lower_bound_v1(guess_iv.v3)) {
        guess_iv.v1 = ball_lower_bound_v1(guess_iv.v3);  // clamp for the guess only
    }
    const Semiaxes g = spec.start ? *spec.start : initial_guess(guess_iv);
    NewtonOutcome run = run_newton({std::log(g.a), std::log(g.b), std::log(g.c)}, target, spec, trace);

    if (!run.converged) {
        // One coarse restart from the best grid cell, then give up honestly.
        const Vec3 l0 = grid_search(target, spec.quadrature);
        if (trace) trace->used_grid_restart = true;
        NewtonOutcome retry = run_newton(l0, target, spec, trace);
        retry.iterations += run.iterations;
        run = retry;
    }

    InversionReport rep{Semiaxes(std::exp(run.log_axes[0]), std::exp(run.log_axes[1]),
                                 std::exp(run.log_axes[2]))
                            .canonical(),
                        run.res.rel, run.iterations,
                        run.converged ? InversionStatus::Converged
                                      : InversionStatus::NoConvergence};
    return rep;
}

}  // namespace ellipvol
