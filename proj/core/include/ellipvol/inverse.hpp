#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ellipvol/quadrature.hpp"
#include "ellipvol/volumes.hpp"

namespace ellipvol {

struct InversionSpec {
    double residual_tol = 1e-10;  // max relative error over (v1, v2, v3)
    int max_iterations = 100;
    QuadratureSpec quadrature{};
    std::optional<Semiaxes> start;  // overrides the built-in initial guess
};

enum class InversionStatus { Converged, Infeasible, NoConvergence };

const char* to_string(InversionStatus s);

struct InversionReport {
    Semiaxes axes;                   // canonical (a >= b >= c) when Converged
    std::array<double, 3> residual;  // relative errors in (v1, v2, v3)
    int iterations = 0;
    InversionStatus status = InversionStatus::NoConvergence;
};

/// Necessary positivity and ball-bound checks on a target triple. Passing is
/// not sufficient: targets outside the image of the volume map surface as
/// NoConvergence, since no closed characterization of that image is known.
struct Feasibility {
    bool ok = true;
    std::vector<std::string> violations;
};
Feasibility feasible(const IntrinsicVolumes& iv);

/// Starting triple for the solver. The scale comes from v3; the shape comes
/// from matching the scale-free excesses of v1 and v2 against tabulated
/// one-parameter spheroid families, keeping the best-fitting candidate.
/// Requires feasible(iv).ok.
Semiaxes initial_guess(const IntrinsicVolumes& iv);

/// Optional diagnostics sink for invert().
struct InversionTrace {
    std::vector<double> residual_norms;             // accepted-step merit values
    std::vector<std::array<double, 3>> iterates;    // accepted semiaxes
    bool used_grid_restart = false;
};

/// Recovers the unique canonical semiaxes with the given intrinsic volumes.
/// Damped Newton on the log-volume residual in log-semiaxis coordinates with
/// the analytic Jacobian; iterates are re-sorted into a >= b >= c after every
/// step, which the permutation symmetry of the forward map makes harmless.
/// A coarse aspect-ratio grid restart runs once if the first Newton attempt
/// stalls.
InversionReport invert(const IntrinsicVolumes& iv, const InversionSpec& spec = {},
                       InversionTrace* trace = nullptr);

}  // namespace ellipvol
