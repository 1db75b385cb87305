#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ellipvol/quadrature.hpp"
#include "ellipvol/volumes.hpp"

namespace ellipvol {

/// Sampling policy. Estimates depend only on (samples, seed, streams), never
/// on thread count: each stream owns an independent generator and partial
/// results are merged in stream order.
struct McSpec {
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 0;
    unsigned streams = 1;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;  // sample standard deviation / sqrt(samples)
    std::uint64_t samples = 0;
};

/// Semiaxes of an ellipsoid in arbitrary dimension n >= 1.
struct SemiaxesN {
    std::vector<double> axes;

    explicit SemiaxesN(std::vector<double> a);
    std::size_t dim() const { return axes.size(); }
};

/// V_m estimate from random Gaussian parallelepipeds:
/// V_m = (2*pi)^{m/2} / m! * E[vol_m(xi_1, ..., xi_m)] with rows
/// xi_i ~ N(0, diag(axes^2)). The m-volume comes from an orthogonal
/// factorization of the edge matrix, never from the explicit Gram
/// determinant.
McEstimate mc_tsirelson(const SemiaxesN& s, int m, const McSpec& spec);

/// Projection-average estimate of V_k for k in {1, 2} in dimension 3:
/// the average projection length (k=1) or shadow area (k=2) over uniform
/// directions, scaled by C(n,k) * kappa_n / (kappa_k * kappa_{n-k}).
McEstimate kubota_estimate(const Semiaxes& s, int k, const McSpec& spec);

/// Euclidean distance from p to the solid ellipsoid (0 inside). The nearest
/// boundary point solves sum_i (axis_i p_i / (axis_i^2 + lambda))^2 = 1 for
/// the unique lambda > 0.
double dist_point_ellipsoid(const std::array<double, 3>& p, const Semiaxes& s);

/// Hit-or-miss volume of the t-neighborhood of the ellipsoid next to its
/// Steiner polynomial V3 + 2 V2 t + pi V1 t^2 + (4 pi/3) t^3.
struct SteinerCheck {
    McEstimate mc;
    double polynomial;
};
SteinerCheck steiner_volume_check(const Semiaxes& s, double t, const McSpec& spec,
                                  const QuadratureSpec& quad = {});

/// Volume of the unit ball in R^n.
double ball_volume(int n);

/// C(n,k) * kappa_n / (kappa_k * kappa_{n-k}), the projection-average
/// normalization; computed, not transcribed.
double kubota_constant(int n, int k);

}  // namespace ellipvol
