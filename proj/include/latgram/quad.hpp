#pragma once

#include <functional>

namespace latgram::quad {

struct Tolerances {
  double abs = 1e-12;
  double rel = 1e-10;
};

struct Result {
  double value = 0.0;
  double abs_error = 0.0;  // estimated
  int evaluations = 0;
  int intervals = 0;
};

using Integrand = std::function<double(double)>;

/// Adaptive 7/15-point Gauss-Kronrod integration of f over [a, b]. Bisects the
/// interval with the largest error estimate until the total estimate is at
/// most max(tol.abs, tol.rel * |value|).
///
/// Throws NumericalDomainError if f returns a non-finite value and
/// AccuracyNotAttained (carrying the best estimate) if subdivision is
/// exhausted first.
Result integrate(const Integrand& f, double a, double b, Tolerances tol = {});

/// Envelope |f(tau)| <= amplitude * exp(-decay_rate * tau) for tau >= 0.
struct TailBound {
  double amplitude = 1.0;
  double decay_rate = 0.0;
};

/// Integral of f over [0, inf). The upper limit starts at 1 and doubles until
/// the envelope's tail integral amplitude * exp(-rate T) / rate drops below
/// tol.abs; the panels [T/2, T] are integrated and accumulated as it grows.
/// Throws InvalidArgument when the envelope does not decay.
Result integrate_to_convergence(const Integrand& f, TailBound bound,
                                Tolerances tol = {});

}  // namespace latgram::quad
