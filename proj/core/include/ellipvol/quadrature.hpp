#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace ellipvol {

/// Tolerance and budget policy for adaptive integration.
struct QuadratureSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    int max_subdivisions = 2000;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int subdivisions_used = 0;
};

/// Raised when adaptive refinement exhausts max_subdivisions without meeting
/// the requested tolerance. Carries the best estimate reached so far.
class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, const QuadratureResult& partial)
        : std::runtime_error(what), partial_(partial) {}
    const QuadratureResult& partial() const { return partial_; }

private:
    QuadratureResult partial_;
};

/// Integral of f over the whole real line.
///
/// f must be finite-valued with |f(s)| = O(|s|^-p), p > 1, so that the
/// substitution s = tan(theta) yields a bounded integrand on (-pi/2, pi/2).
/// The transformed integrand is refined by adaptive bisection with a
/// Gauss(7)/Kronrod(15) pair supplying the error estimate. Stops once the
/// accumulated error estimate drops below max(abs_tol, rel_tol*|value|).
///
/// Throws NonConvergence if the subdivision budget runs out, and
/// std::domain_error if f produces a non-finite sample away from the
/// endpoints of the transformed interval.
QuadratureResult integrate_line(const std::function<double(double)>& f,
                                const QuadratureSpec& spec = {});

}  // namespace ellipvol
