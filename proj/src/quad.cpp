#include "latgram/quad.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <vector>

#include "latgram/error.hpp"

namespace latgram::quad {
namespace {

// Kronrod abscissae on [0, 1]; odd entries (1, 3, 5) are the Gauss nodes.
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};

constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};

constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

// Depth 50 bisections of the starting interval.
constexpr int kMaxDepth = 50;
constexpr int kMaxIntervals = 4000;

struct Panel {
  double a, b;
  double value, error;
  int depth;
  bool operator<(const Panel& o) const { return error < o.error; }
};

double checked(const Integrand& f, double x) {
  const double y = f(x);
  if (!std::isfinite(y))
    throw NumericalDomainError("integrand is not finite at x = " + std::to_string(x));
  return y;
}

Panel kronrod(const Integrand& f, double a, double b, int depth) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = checked(f, centre);
  double kronrod_sum = kKronrodWeights[7] * fc;
  double gauss_sum = kGaussWeights[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kNodes[static_cast<std::size_t>(j)];
    const double pair = checked(f, centre - dx) + checked(f, centre + dx);
    kronrod_sum += kKronrodWeights[static_cast<std::size_t>(j)] * pair;
    if (j % 2 == 1) gauss_sum += kGaussWeights[static_cast<std::size_t>(j / 2)] * pair;
  }
  const double value = kronrod_sum * half;
  return {a, b, value, std::abs(value - gauss_sum * half), depth};
}

}  // namespace

Result integrate(const Integrand& f, double a, double b, Tolerances tol) {
  if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b))
    throw InvalidArgument("integration bounds must be finite with a <= b");
  if (!(tol.abs > 0.0) || !(tol.rel > 0.0))
    throw InvalidArgument("integration tolerances must be positive");
  Result out;
  if (a == b) return out;

  std::priority_queue<Panel> panels;
  panels.push(kronrod(f, a, b, 0));
  out.evaluations = 15;
  double value = panels.top().value;
  double error = panels.top().error;

  auto converged = [&] { return error <= std::max(tol.abs, tol.rel * std::abs(value)); };

  while (!converged()) {
    Panel worst = panels.top();
    if (worst.depth >= kMaxDepth || static_cast<int>(panels.size()) >= kMaxIntervals) {
      throw AccuracyNotAttained(
          "adaptive quadrature did not converge on [" + std::to_string(a) + ", " +
              std::to_string(b) + "], error estimate " + std::to_string(error),
          value, error);
    }
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = kronrod(f, worst.a, mid, worst.depth + 1);
    Panel right = kronrod(f, mid, worst.b, worst.depth + 1);
    out.evaluations += 30;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }

  // Re-sum from the panels to shed drift from the running updates.
  out.intervals = static_cast<int>(panels.size());
  value = 0.0;
  error = 0.0;
  std::vector<Panel> all;
  all.reserve(panels.size());
  while (!panels.empty()) {
    all.push_back(panels.top());
    panels.pop();
  }
  std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  for (const auto& p : all) {
    value += p.value;
    error += p.error;
  }
  out.value = value;
  out.abs_error = error;
  return out;
}

Result integrate_to_convergence(const Integrand& f, TailBound bound, Tolerances tol) {
  if (!(bound.decay_rate > 0.0))
    throw InvalidArgument("integrand envelope does not decay (rate " +
                          std::to_string(bound.decay_rate) + "); no finite limit");
  if (!(bound.amplitude >= 0.0))
    throw InvalidArgument("tail envelope amplitude must be non-negative");

  auto tail = [&](double upper) {
    return bound.amplitude * std::exp(-bound.decay_rate * upper) / bound.decay_rate;
  };

  Result total = integrate(f, 0.0, 1.0, tol);
  double upper = 1.0;
  while (tail(upper) >= tol.abs) {
    const Result panel = integrate(f, upper, 2.0 * upper, tol);
    total.value += panel.value;
    total.abs_error += panel.abs_error;
    total.evaluations += panel.evaluations;
    total.intervals += panel.intervals;
    upper *= 2.0;
    if (upper > 1e12)
      throw AccuracyNotAttained("tail bound never fell below tolerance", total.value,
                                total.abs_error + tail(upper));
  }
  total.abs_error += tail(upper);
  return total;
}

}  // namespace latgram::quad
