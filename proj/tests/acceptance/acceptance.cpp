// Acceptance checks. `acceptance` runs every criterion, `acceptance N` runs
// criterion N only. Each criterion prints one PASS/FAIL line; the exit code is
// non-zero if any selected criterion failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "latgram/bessel.hpp"
#include "latgram/control.hpp"
#include "latgram/gramian.hpp"
#include "latgram/parallel.hpp"
#include "oracles.hpp"

using namespace latgram;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

const LatticeParams kInstance{2, 5.0, 1.0};
const std::vector<NodeIndex> kOrigin{{0, 0}};
const std::vector<NodeIndex> kTargets{{0, 0}, {1, 0}, {1, 1}};
constexpr quad::Tolerances kTight{1e-300, 1e-12};

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// 1. Bessel kernel against the series oracle, plus symmetry and monotonicity.
Outcome bessel_kernel() {
  double worst = 0;
  for (int n = 0; n <= 50; ++n)
    for (double z : {0.1, 1.0, 5.0, 10.0, 50.0, 100.0}) {
      const long double ref = oracle::bessel_i_scaled_series(n, z);
      const double got = bessel::i_scaled(n, z);
      worst = std::max(worst, static_cast<double>(std::fabs((got - ref) / ref)));
    }

  int violations = 0;
  std::size_t points = 0;
  for (int n = 0; n < 10; ++n) {
    double prev = -1;
    for (int k = 0; k < 100; ++k, ++points) {
      const double z = 0.1 + k * 0.5;
      const double v = bessel::i(n, z);
      if (bessel::i(-n, z) != v) ++violations;
      if (!(bessel::i(n + 1, z) < v)) ++violations;
      if (!(v > prev)) ++violations;
      prev = v;
    }
  }
  return {worst < 1e-12 && violations == 0,
          format("worst relative error %.2e over n<=50; %zu grid points, %d property violations",
                 worst, points, violations)};
}

// 2. Closed form against ODE integration.
Outcome cross_method() {
  double worst = 0;
  for (int extent : {3, 5, 9})
    for (double p : {4.1, 5.0, 8.0})
      for (double t : {1.0, 5.0}) {
        const auto sys =
            build_system(FiniteLatticeSpec({2, p, 1.0}, {extent, extent}, kOrigin, {}));
        const auto a = finite_gramian_closed(sys.A, sys.B, t).matrix;
        const auto b = finite_gramian_ode(sys.A, sys.B, t).matrix;
        worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
      }
  return {worst < 1e-8, format("max |closed - ode| = %.2e (limit 1e-8)", worst)};
}

// 3. Finite 21x21 against the infinite lattice, all pairs (i, origin).
Outcome truncation_profile() {
  const FiniteLatticeSpec spec(kInstance, {21, 21}, kOrigin, {});
  const auto sys = build_system(spec);
  const auto fin = finite_gramian_closed(sys.A, sys.B, 5.0);
  std::vector<GramianEntryKey> pairs;
  for (const auto& node : spec.nodes()) pairs.push_back({node, {0, 0}});
  const auto rep = compare(fin, spec, pairs, kTight, threads());

  std::size_t center = 0, arg_abs = 0;
  double edge_min_rel = INFINITY;
  for (std::size_t k = 0; k < rep.entries.size(); ++k) {
    const auto& e = rep.entries[k];
    if (e.key.i == NodeIndex{0, 0}) center = k;
    if (e.abs_error > rep.entries[arg_abs].abs_error) arg_abs = k;
    if (std::abs(e.key.i[0]) == 10 || std::abs(e.key.i[1]) == 10)
      edge_min_rel = std::min(edge_min_rel, e.rel_error);
  }
  const auto& c = rep.entries[center];
  const bool a = arg_abs == center;
  const bool b = c.rel_error < edge_min_rel;
  return {a && b,
          format("(a) %s: max abs error %.2e at %s, center abs error %.2e; "
                 "(b) %s: center rel error %.2e < min edge rel error %.2e",
                 a ? "ok" : "FAILED", rep.entries[arg_abs].abs_error,
                 rep.entries[arg_abs].key.i.to_string().c_str(), c.abs_error,
                 b ? "ok" : "FAILED", c.rel_error, edge_min_rel)};
}

double mu_min(const Eigen::MatrixXd& W) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(W, Eigen::EigenvaluesOnly)
      .eigenvalues()(0);
}

// 4. mu_min of the output Gramian, finite against infinite, over a 10x10 grid.
Outcome eigen_sweep() {
  std::vector<double> ts(10), ps(10);
  for (int k = 0; k < 10; ++k) {
    ts[k] = 0.5 * std::pow(20.0, k / 9.0);
    ps[k] = 4.1 + (10.0 - 4.1) * k / 9.0;
  }
  ts.back() = 10.0;
  ps.back() = 10.0;
  std::vector<double> ratio(100);
  parallel_for(100, threads(), [&](std::size_t k) {
    const double t = ts[k / 10];
    const LatticeParams params{2, ps[k % 10], 1.0};
    const FiniteLatticeSpec spec(params, {21, 21}, kOrigin, kTargets);
    const double mf = mu_min(finite_output_gramian(spec, t));
    const double mi = mu_min(output_gramian_infinite(kTargets, kOrigin, params, t).matrix);
    ratio[k] = std::abs(mf - mi) / mf;
  });
  const auto worst = std::max_element(ratio.begin(), ratio.end()) - ratio.begin();
  return {ratio[worst] <= 1e-2,
          format("worst |mu_f - mu_i| / mu_f = %.2e at t=%.3g, p=%.3g (limit 1e-2)",
                 ratio[worst], ts[worst / 10], ps[worst % 10])};
}

// 5. Work counters of the two paths.
Outcome bookkeeping() {
  const auto out = output_gramian_infinite(kTargets, kOrigin, kInstance, 5.0);
  const auto sys = build_system(FiniteLatticeSpec(kInstance, {21, 21}, kOrigin, kTargets));
  const auto ode = finite_gramian_ode(sys.A, sys.B, 5.0);
  return {out.quadratures == 6 && ode.unique_entries == 97461,
          format("output-Gramian quadratures %zu (expect 6), finite unique entries %zu "
                 "(expect 97461), %zu RHS evaluations",
                 out.quadratures, ode.unique_entries, ode.rhs_evaluations)};
}

// 6. Synthesized control on the three-target instance.
Outcome end_to_end() {
  const FiniteLatticeSpec spec(kInstance, {21, 21}, kOrigin, kTargets);
  const auto sys = build_system(spec);
  ControlProblem prob{sys.A, sys.B, sys.C, Eigen::VectorXd::Zero(sys.A.rows()),
                      Eigen::VectorXd::Ones(3), 5.0};
  struct Run {
    double attain, gap;
  };
  auto run = [&](const Eigen::MatrixXd& W) {
    MinimumEnergyController ctrl(prob, W);
    const auto sim = simulate(prob, [&](double t) { return ctrl(t); }, 4000, false);
    const double e = min_energy(ctrl.control_action(), W);
    return Run{(sim.y_final - prob.y_f).cwiseAbs().maxCoeff(),
               std::abs(sim.realized_energy - e) / e};
  };
  const Run f = run(finite_output_gramian(spec, 5.0));
  const Run i = run(output_gramian_infinite(kTargets, kOrigin, kInstance, 5.0).matrix);
  const bool ok = f.attain < 1e-6 && f.gap < 1e-6 && i.attain < 1e-2 && i.gap < 1e-2;
  return {ok, format("finite W: |y-y_f| %.2e, energy gap %.2e (limit 1e-6); infinite W: "
                     "|y-y_f| %.2e, energy gap %.2e (limit 1e-2)",
                     f.attain, f.gap, i.attain, i.gap)};
}

// 7. Single-target energy grows with distance from the driver.
Outcome energy_distance() {
  const std::vector<NodeIndex> path{{0, 0}, {1, 0}, {1, 1}, {2, 0}, {2, 1}, {2, 2}};
  std::vector<double> e;
  for (const auto& i : path) e.push_back(single_target_energy(i, kInstance, 5.0));
  bool ok = true;
  for (std::size_t k = 1; k < e.size(); ++k) ok = ok && e[k] > e[k - 1];
  return {ok, format("energies %.4g %.4g %.4g %.4g %.4g %.4g", e[0], e[1], e[2], e[3], e[4],
                     e[5])};
}

// 8. Randomized invariants of infinite-lattice entries.
Outcome property_suite() {
  std::mt19937_64 rng(20261016);
  std::uniform_int_distribution<int> coord(-3, 3), dim(1, 3), ndrivers(1, 3);
  std::uniform_real_distribution<double> pdist(0.5, 8.0), sdist(0.5, 1.5), tdist(0.2, 4.0);
  auto random_node = [&](int d) {
    std::vector<int> c(d);
    for (int& x : c) x = coord(rng);
    return NodeIndex(c);
  };
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::abs(a); };

  const int cases = 200;
  int failures = 0;
  std::string first;
  auto fail = [&](int c, const char* what) {
    if (!failures++) first = format("case %d: %s", c, what);
  };
  for (int c = 0; c < cases; ++c) {
    const int d = dim(rng);
    const LatticeParams params{d, pdist(rng), sdist(rng)};
    const double t = tdist(rng);
    const NodeIndex i = random_node(d), j = random_node(d);
    std::vector<NodeIndex> drivers;
    for (int k = ndrivers(rng); k > 0; --k) {
      auto a = random_node(d);
      if (std::find(drivers.begin(), drivers.end(), a) == drivers.end()) drivers.push_back(a);
    }
    auto W = [&](const NodeIndex& a, const NodeIndex& b, const std::vector<NodeIndex>& D,
                 double tt = -1) { return infinite_entry(a, b, D, params, tt < 0 ? t : tt, kTight); };
    const double base = W(i, j, drivers);

    if (!close(base, W(j, i, drivers))) fail(c, "swap");

    auto map_all = [&](auto fn) {
      std::vector<NodeIndex> D;
      for (const auto& a : drivers) D.push_back(fn(a));
      return W(fn(i), fn(j), D);
    };
    auto negate = [](const NodeIndex& a) {
      auto b = a;
      for (std::size_t k = 0; k < b.dim(); ++k) b[k] = -b[k];
      return b;
    };
    if (!close(base, map_all(negate))) fail(c, "global sign flip");

    const std::size_t axis = static_cast<std::size_t>(c) % static_cast<std::size_t>(d);
    if (!close(base, map_all([&](const NodeIndex& a) {
          auto b = a;
          b[axis] = -b[axis];
          return b;
        })))
      fail(c, "per-axis sign flip");

    std::vector<std::size_t> perm(static_cast<std::size_t>(d));
    for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = k;
    std::shuffle(perm.begin(), perm.end(), rng);
    if (!close(base, map_all([&](const NodeIndex& a) {
          std::vector<int> b(a.dim());
          for (std::size_t k = 0; k < b.size(); ++k) b[k] = a[perm[k]];
          return NodeIndex(b);
        })))
      fail(c, "axis permutation");

    const NodeIndex shift = random_node(d);
    if (!close(base, map_all([&](const NodeIndex& a) {
          auto b = a;
          for (std::size_t k = 0; k < b.dim(); ++k) b[k] += shift[k];
          return b;
        })))
      fail(c, "translation");

    double sum = 0;
    for (const auto& a : drivers) sum += W(i, j, {a});
    if (!close(base, sum)) fail(c, "driver additivity");

    if (!(W(i, i, drivers, 0.5 * t) < W(i, i, drivers))) fail(c, "monotonicity in t");

    std::vector<NodeIndex> targets{i};
    if (j != i) targets.push_back(j);
    targets.push_back(random_node(d));
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    const auto out = output_gramian_infinite(targets, drivers, params, t, kTight);
    if (mu_min(out.matrix) < -1e-10) fail(c, "PSD");
  }
  return {failures == 0, format("%d randomized cases (d in 1..3), %d failures%s%s", cases,
                                failures, failures ? "; first: " : "", first.c_str())};
}

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"Bessel kernel", 1, bessel_kernel},
      {"cross-method Gramian", 30, cross_method},
      {"21x21 truncation error profile", 120, truncation_profile},
      {"mu_min finite vs infinite sweep", 300, eigen_sweep},
      {"quadrature and ODE bookkeeping", 60, bookkeeping},
      {"end-to-end control", 60, end_to_end},
      {"energy grows with distance", 10, energy_distance},
      {"randomized Gramian invariants", 120, property_suite},
  };
  std::vector<int> selected;
  for (int k = 1; k < argc; ++k) selected.push_back(std::atoi(argv[k]));
  if (selected.empty())
    for (int k = 1; k <= static_cast<int>(all.size()); ++k) selected.push_back(k);

  int failed = 0;
  for (int k : selected) {
    if (k < 1 || k > static_cast<int>(all.size())) {
      std::fprintf(stderr, "no criterion %d\n", k);
      return 2;
    }
    const auto& c = all[k - 1];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    std::printf("[%s] %d %s: %s; %.2f s (budget %.0f s%s)\n", pass ? "PASS" : "FAIL", k, c.name,
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
    failed += !pass;
  }
  return failed ? 1 : 0;
}
