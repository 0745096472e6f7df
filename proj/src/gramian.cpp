#include "latgram/gramian.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "latgram/bessel.hpp"
#include "latgram/error.hpp"
#include "latgram/parallel.hpp"

namespace latgram {
namespace {

void check_dims(const NodeIndex& i, const NodeIndex& j,
                std::span<const NodeIndex> drivers, const LatticeParams& params) {
  const auto d = static_cast<std::size_t>(params.d);
  if (i.dim() != d || j.dim() != d)
    throw InvalidArgument("entry indices " + i.to_string() + ", " + j.to_string() +
                          " do not have dimension " + std::to_string(d));
  for (const auto& a : drivers)
    if (a.dim() != d)
      throw InvalidArgument("driver " + a.to_string() + " does not have dimension " +
                            std::to_string(d));
}

int max_order(const NodeIndex& i, const NodeIndex& j, std::span<const NodeIndex> drivers) {
  int n = 0;
  for (const auto& a : drivers)
    for (std::size_t k = 0; k < a.dim(); ++k)
      n = std::max({n, std::abs(i[k] - a[k]), std::abs(j[k] - a[k])});
  return n;
}

// e^{(4ds-2p) tau} sum_a prod_k Î_{i_k-a_k} Î_{j_k-a_k} with no validation.
double scaled_integrand(const NodeIndex& i, const NodeIndex& j,
                        std::span<const NodeIndex> drivers, const LatticeParams& params,
                        int n_max, double tau) {
  thread_local std::vector<double> seq;
  seq.resize(static_cast<std::size_t>(n_max) + 1);
  bessel::i_scaled_sequence(2.0 * params.s * tau, seq);
  double sum = 0.0;
  for (const auto& a : drivers) {
    double prod = 1.0;
    for (std::size_t k = 0; k < a.dim(); ++k)
      prod *= seq[static_cast<std::size_t>(std::abs(i[k] - a[k]))] *
              seq[static_cast<std::size_t>(std::abs(j[k] - a[k]))];
    sum += prod;
  }
  if (sum == 0.0) return 0.0;
  return std::exp((4.0 * params.d * params.s - 2.0 * params.p) * tau) * sum;
}

void check_request(std::span<const NodeIndex> drivers, const LatticeParams& params) {
  params.validate();
  if (drivers.empty()) throw InvalidArgument("at least one driver node is required");
}

}  // namespace

double integrand(const NodeIndex& i, const NodeIndex& j,
                 std::span<const NodeIndex> drivers, const LatticeParams& params,
                 double tau) {
  params.validate();
  check_dims(i, j, drivers, params);
  if (!(tau >= 0.0)) throw InvalidArgument("tau must be non-negative");
  return scaled_integrand(i, j, drivers, params, max_order(i, j, drivers), tau);
}

double infinite_entry(const NodeIndex& i, const NodeIndex& j,
                      std::span<const NodeIndex> drivers, const LatticeParams& params,
                      double t, quad::Tolerances tol) {
  check_request(drivers, params);
  check_dims(i, j, drivers, params);
  if (!(t >= 0.0) || !std::isfinite(t))
    throw InvalidArgument("horizon must be finite and non-negative");
  if (t == 0.0) return 0.0;
  const int n_max = max_order(i, j, drivers);
  auto f = [&](double tau) { return scaled_integrand(i, j, drivers, params, n_max, tau); };
  return quad::integrate(f, 0.0, t, tol).value;
}

double infinite_entry_limit(const NodeIndex& i, const NodeIndex& j,
                            std::span<const NodeIndex> drivers,
                            const LatticeParams& params, quad::Tolerances tol) {
  check_request(drivers, params);
  check_dims(i, j, drivers, params);
  if (!params.is_hurwitz())
    throw InvalidArgument("infinite-horizon Gramian requires p > 2ds");
  const int n_max = max_order(i, j, drivers);
  auto f = [&](double tau) { return scaled_integrand(i, j, drivers, params, n_max, tau); };
  const quad::TailBound bound{static_cast<double>(drivers.size()),
                              2.0 * params.p - 4.0 * params.d * params.s};
  return quad::integrate_to_convergence(f, bound, tol).value;
}

std::vector<double> infinite_entries(std::span<const GramianEntryKey> keys,
                                     std::span<const NodeIndex> drivers,
                                     const LatticeParams& params, double t,
                                     quad::Tolerances tol, unsigned threads) {
  check_request(drivers, params);
  for (const auto& key : keys) check_dims(key.i, key.j, drivers, params);
  std::vector<double> out(keys.size());
  parallel_for(keys.size(), threads, [&](std::size_t k) {
    out[k] = infinite_entry(keys[k].i, keys[k].j, drivers, params, t, tol);
  });
  return out;
}

GramianTable::GramianTable(LatticeParams params, std::vector<NodeIndex> drivers,
                           double horizon, std::span<const GramianEntryKey> keys,
                           quad::Tolerances tol, unsigned threads)
    : params_(params), drivers_(std::move(drivers)), horizon_(horizon) {
  if (!(horizon_ > 0.0)) throw InvalidArgument("horizon must be positive");
  const auto values = infinite_entries(keys, drivers_, params_, horizon_, tol, threads);
  for (std::size_t k = 0; k < keys.size(); ++k) entries_.emplace(keys[k], values[k]);
}

double GramianTable::at(const NodeIndex& i, const NodeIndex& j) const {
  if (auto it = entries_.find({i, j}); it != entries_.end()) return it->second;
  if (auto it = entries_.find({j, i}); it != entries_.end()) return it->second;
  throw InvalidArgument("entry " + i.to_string() + "," + j.to_string() + " not in table");
}

OutputGramian output_gramian_infinite(std::span<const NodeIndex> targets,
                                      std::span<const NodeIndex> drivers,
                                      const LatticeParams& params, double t,
                                      quad::Tolerances tol, unsigned threads) {
  if (targets.empty()) throw InvalidArgument("at least one target node is required");
  const auto q = targets.size();
  std::vector<GramianEntryKey> keys;
  keys.reserve(q * (q + 1) / 2);
  for (std::size_t a = 0; a < q; ++a)
    for (std::size_t b = a; b < q; ++b) keys.push_back({targets[a], targets[b]});
  const auto values = infinite_entries(keys, drivers, params, t, tol, threads);

  OutputGramian out;
  out.matrix.resize(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q));
  std::size_t k = 0;
  for (std::size_t a = 0; a < q; ++a)
    for (std::size_t b = a; b < q; ++b, ++k) {
      const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
      out.matrix(ia, ib) = out.matrix(ib, ia) = values[k];
    }
  out.quadratures = keys.size();
  return out;
}

double log_single_target_gramian(const NodeIndex& i, const LatticeParams& params,
                                 double t, quad::Tolerances tol) {
  params.validate();
  if (i.dim() != static_cast<std::size_t>(params.d))
    throw InvalidArgument("target " + i.to_string() + " has wrong dimension");
  if (!(t > 0.0) || !std::isfinite(t))
    throw InvalidArgument("horizon must be finite and positive");

  const double rate = 4.0 * params.d * params.s - 2.0 * params.p;
  auto log_f = [&](double tau) {
    if (tau == 0.0)
      return i.manhattan_norm() == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    double v = rate * tau;
    for (std::size_t k = 0; k < i.dim(); ++k)
      v += 2.0 * bessel::log_i_scaled(i[k], 2.0 * params.s * tau);
    return v;
  };

  // Peak of the log-integrand on a grid; only used as a scale factor.
  constexpr int kGrid = 256;
  double peak = -std::numeric_limits<double>::infinity();
  for (int g = 0; g <= kGrid; ++g) peak = std::max(peak, log_f(t * g / kGrid));
  if (!std::isfinite(peak)) throw RangeError("single-target integrand vanishes");

  auto f = [&](double tau) { return std::exp(log_f(tau) - peak); };
  const double scaled = quad::integrate(f, 0.0, t, tol).value;
  if (!(scaled > 0.0)) throw RangeError("single-target Gramian integral vanished");
  return peak + std::log(scaled);
}

double single_target_energy(const NodeIndex& i, const LatticeParams& params, double t,
                            quad::Tolerances tol) {
  const double log_w = log_single_target_gramian(i, params, t, tol);
  const double energy = std::exp(-log_w);
  if (!std::isfinite(energy))
    throw RangeError("control energy for target " + i.to_string() +
                         " is not representable; see log_value()",
                     -log_w);
  return energy;
}

ComparisonReport compare_values(std::span<const GramianEntryKey> keys,
                                std::span<const double> finite,
                                std::span<const double> reference) {
  if (finite.size() != keys.size() || reference.size() != keys.size())
    throw InvalidArgument("comparison inputs differ in length");
  ComparisonReport report;
  report.entries.reserve(keys.size());
  for (std::size_t k = 0; k < keys.size(); ++k) {
    ComparisonEntry e{keys[k], finite[k], reference[k], 0.0, 0.0};
    e.abs_error = std::abs(finite[k] - reference[k]);
    if (finite[k] != 0.0)
      e.rel_error = e.abs_error / std::abs(finite[k]);
    else
      e.rel_error = e.abs_error == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    report.max_abs = std::max(report.max_abs, e.abs_error);
    report.max_rel = std::max(report.max_rel, e.rel_error);
    report.entries.push_back(std::move(e));
  }
  return report;
}

std::vector<double> finite_entries(const FiniteGramian& finite,
                                   const FiniteLatticeSpec& spec,
                                   std::span<const GramianEntryKey> pairs) {
  if (finite.matrix.rows() != static_cast<Eigen::Index>(spec.num_nodes()))
    throw InvalidArgument("finite Gramian does not match the lattice size");
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& key : pairs)
    out.push_back(finite.matrix(static_cast<Eigen::Index>(flat_index(key.i, spec)),
                                static_cast<Eigen::Index>(flat_index(key.j, spec))));
  return out;
}

ComparisonReport compare(const FiniteGramian& finite, const FiniteLatticeSpec& spec,
                         std::span<const GramianEntryKey> pairs, quad::Tolerances tol,
                         unsigned threads) {
  const auto fin = finite_entries(finite, spec, pairs);
  const auto ref = infinite_entries(pairs, spec.drivers(), spec.params(), finite.horizon,
                                    tol, threads);
  return compare_values(pairs, fin, ref);
}

}  // namespace latgram
