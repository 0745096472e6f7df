// latgram command-line front end. Talks to the library through the C API only.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <iostream>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "config.hpp"
#include "latgram/latgram.h"
#include "output.hpp"

namespace cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int exit_code(lg_status st) {
  switch (st) {
    case LG_ERR_RANGE: return kBadIndex;
    case LG_ERR_SINGULAR_GRAMIAN: return kSingular;
    case LG_ERR_ACCURACY:
    case LG_ERR_NUMERICAL_DOMAIN:
    case LG_ERR_STIFFNESS: return kQuadrature;
    default: return kUsage;
  }
}

void check(lg_status st) {
  if (st != LG_OK) throw Failure(exit_code(st), lg_last_error());
}

unsigned worker_count(unsigned requested) {
  if (requested) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(k) for k in [0, count) on a small pool. Results are written by
// index, so output order never depends on scheduling. The first failure is
// rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn fn) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(worker_count(threads), count));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex m;
  auto work = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= count || failed) return;
      try {
        fn(k);
      } catch (...) {
        std::lock_guard lock(m);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (error) std::rethrow_exception(error);
}

std::vector<int> flatten(const std::vector<Node>& nodes) {
  std::vector<int> flat;
  for (const auto& n : nodes) flat.insert(flat.end(), n.begin(), n.end());
  return flat;
}

std::vector<std::string> node_columns(const std::string& prefix, int d) {
  std::vector<std::string> cols;
  for (int k = 1; k <= d; ++k) cols.push_back(prefix + std::to_string(k));
  return cols;
}

void append_node(std::vector<std::string>& row, const Node& n) {
  for (int c : n) row.push_back(std::to_string(c));
}

std::string key_name(const Node& n) {
  std::string s = "key";
  for (int c : n) s += "_" + std::to_string(c);
  return s;
}

json node_json(const Node& n) { return json(n); }

struct Lattice {
  lg_lattice* h = nullptr;
  Lattice(const RunConfig& c, const lg_params& params, bool with_targets = true) {
    const auto drivers = flatten(c.drivers);
    const auto targets = flatten(c.targets);
    check(lg_lattice_create(&params, c.extents.data(), drivers.data(), c.drivers.size(),
                            targets.data(), with_targets ? c.targets.size() : 0, &h));
  }
  ~Lattice() { lg_lattice_destroy(h); }
  Lattice(const Lattice&) = delete;
  Lattice& operator=(const Lattice&) = delete;
};

struct Gramian {
  lg_finite_gramian* h = nullptr;
  ~Gramian() { lg_finite_gramian_destroy(h); }
};

std::vector<Pair> target_pairs(const std::vector<Node>& targets) {
  std::vector<Pair> pairs;
  for (std::size_t a = 0; a < targets.size(); ++a)
    for (std::size_t b = a; b < targets.size(); ++b) pairs.emplace_back(targets[a], targets[b]);
  return pairs;
}

// Every node of the lattice in row-major order (first axis slowest).
std::vector<Node> lattice_nodes(const std::vector<int>& extents) {
  std::vector<Node> nodes;
  Node cur;
  for (int e : extents) cur.push_back(-(e / 2));
  for (;;) {
    nodes.push_back(cur);
    std::size_t k = cur.size();
    while (k > 0) {
      --k;
      if (cur[k] < extents[k] / 2) {
        ++cur[k];
        break;
      }
      cur[k] = -(extents[k] / 2);
      if (k == 0) return nodes;
    }
  }
}

// ---------------------------------------------------------------------------

void cmd_gramian(RunConfig c) {
  if (c.pairs.empty()) c.pairs = target_pairs(c.targets);
  const json config = c.to_json();
  const int d = c.params.d;
  std::vector<int> pi, pj;
  for (const auto& [a, b] : c.pairs) {
    pi.insert(pi.end(), a.begin(), a.end());
    pj.insert(pj.end(), b.begin(), b.end());
  }
  const auto drivers = flatten(c.drivers);
  std::vector<double> values(c.pairs.size());
  check(lg_infinite_entries(&c.params, pi.data(), pj.data(), c.pairs.size(), drivers.data(),
                            c.drivers.size(), c.t, &c.tol, worker_count(c.threads),
                            values.data()));

  auto cols = node_columns("i", d);
  const auto jc = node_columns("j", d);
  cols.insert(cols.end(), jc.begin(), jc.end());
  cols.push_back("value");
  CsvWriter csv(c.out, config, cols);
  for (std::size_t k = 0; k < c.pairs.size(); ++k) {
    std::vector<std::string> row;
    append_node(row, c.pairs[k].first);
    append_node(row, c.pairs[k].second);
    row.push_back(fmt(values[k]));
    csv.row(row);
  }
  csv.close();
}

void cmd_gramian_finite(RunConfig c) {
  const json config = c.to_json();
  const int d = c.params.d;
  Lattice lat(c, c.params);
  Gramian g;
  check(lg_finite_gramian_compute(lat.h, c.t,
                                  c.method == "ode" ? LG_GRAMIAN_ODE : LG_GRAMIAN_SPECTRAL, 0,
                                  &g.h));
  const auto pairs = c.pairs.empty() ? target_pairs(c.targets) : c.pairs;

  auto cols = node_columns("i", d);
  const auto jc = node_columns("j", d);
  cols.insert(cols.end(), jc.begin(), jc.end());
  cols.push_back("value");
  CsvWriter csv(c.out, config, cols);
  csv.comment("stats: " + json{{"nodes", lg_finite_gramian_size(g.h)},
                               {"unique_entries", lg_finite_gramian_unique_entries(g.h)},
                               {"rhs_evaluations", lg_finite_gramian_rhs_evaluations(g.h)}}
                              .dump());
  for (const auto& [a, b] : pairs) {
    double v = 0;
    check(lg_finite_gramian_entry(g.h, a.data(), b.data(), &v));
    std::vector<std::string> row;
    append_node(row, a);
    append_node(row, b);
    row.push_back(fmt(v));
    csv.row(row);
  }
  csv.close();
}

void cmd_compare(RunConfig c) {
  const json config = c.to_json();
  const int d = c.params.d;
  Lattice lat(c, c.params, false);
  if (c.pairs.empty()) {
    const Node origin(static_cast<std::size_t>(d), 0);
    for (auto& n : lattice_nodes(c.extents)) c.pairs.emplace_back(std::move(n), origin);
  }
  Gramian g;
  check(lg_finite_gramian_compute(lat.h, c.t, LG_GRAMIAN_SPECTRAL, 0, &g.h));

  const std::size_t n = c.pairs.size();
  std::vector<int> pi, pj;
  for (const auto& [a, b] : c.pairs) {
    pi.insert(pi.end(), a.begin(), a.end());
    pj.insert(pj.end(), b.begin(), b.end());
  }
  std::vector<double> fin(n), ref(n), abs_err(n), rel_err(n);
  double max_abs = 0, max_rel = 0;
  check(lg_compare(g.h, c.self_compare ? g.h : nullptr, pi.data(), pj.data(), n, &c.tol,
                   worker_count(c.threads), fin.data(), ref.data(), abs_err.data(),
                   rel_err.data(), &max_abs, &max_rel));

  auto cols = node_columns("i", d);
  const auto jc = node_columns("j", d);
  cols.insert(cols.end(), jc.begin(), jc.end());
  for (const char* name : {"finite", "reference", "abs_error", "rel_error", "log10_abs_error",
                           "log10_rel_error"})
    cols.push_back(name);
  CsvWriter csv(c.out, config, cols);
  std::size_t arg_abs = 0, arg_rel = 0, arg_min_rel = 0;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::string> row;
    append_node(row, c.pairs[k].first);
    append_node(row, c.pairs[k].second);
    for (double v : {fin[k], ref[k], abs_err[k], rel_err[k], std::log10(abs_err[k]),
                     std::log10(rel_err[k])})
      row.push_back(fmt(v));
    csv.row(row);
    if (abs_err[k] > abs_err[arg_abs]) arg_abs = k;
    if (rel_err[k] > rel_err[arg_rel]) arg_rel = k;
    if (rel_err[k] < rel_err[arg_min_rel]) arg_min_rel = k;
  }
  csv.close();

  auto pair_json = [&](std::size_t k) {
    return json{node_json(c.pairs[k].first), node_json(c.pairs[k].second)};
  };
  json summary{{"config", config},
               {"pairs", n},
               {"reference", c.self_compare ? "finite" : "infinite"}};
  if (n) {
    summary["max_abs_error"] = max_abs;
    summary["max_abs_pair"] = pair_json(arg_abs);
    summary["max_rel_error"] = max_rel;
    summary["max_rel_pair"] = pair_json(arg_rel);
    summary["min_rel_error"] = rel_err[arg_min_rel];
    summary["min_rel_pair"] = pair_json(arg_min_rel);
  }
  write_json(sibling(c.out, ".summary.json"), summary);
}

void cmd_energy_sweep(RunConfig c) {
  const json config = c.to_json();
  const auto ts = c.t_sweep.values();
  const auto ps = c.p_sweep.values();
  const std::size_t q = c.targets.size();
  if (c.y_f.size() != q) throw Failure(kUsage, "y_f needs one entry per target");
  const auto targets = flatten(c.targets);
  const auto drivers = flatten(c.drivers);

  // Output controllability depends on p only through A; test it per p.
  std::vector<int> controllable(ps.size());
  parallel_for(ps.size(), c.threads, [&](std::size_t k) {
    lg_params params = c.params;
    params.p = ps[k];
    Lattice lat(c, params);
    check(lg_lattice_output_controllable(lat.h, &controllable[k]));
  });

  struct Row {
    double mu_fin = kNaN, mu_inf = kNaN, e_fin = kNaN, e_inf = kNaN;
    std::string flag = "ok";
  };
  std::vector<Row> rows(ts.size() * ps.size());
  parallel_for(rows.size(), c.threads, [&](std::size_t k) {
    const double t = ts[k / ps.size()];
    const std::size_t pk = k % ps.size();
    Row& r = rows[k];
    if (!controllable[pk]) {
      r.flag = "uncontrollable";
      return;
    }
    lg_params params = c.params;
    params.p = ps[pk];
    Lattice lat(c, params);
    std::vector<double> wf(q * q), wi(q * q), mu(q);
    check(lg_finite_output_gramian(lat.h, t, wf.data()));
    check(lg_output_gramian_infinite(&params, targets.data(), q, drivers.data(),
                                     c.drivers.size(), t, &c.tol, 1, wi.data(), nullptr));
    check(lg_symmetric_eigenvalues(wf.data(), q, mu.data()));
    r.mu_fin = mu[0];
    check(lg_symmetric_eigenvalues(wi.data(), q, mu.data()));
    r.mu_inf = mu[0];
    for (auto [w, e] : {std::pair{&wf, &r.e_fin}, std::pair{&wi, &r.e_inf}}) {
      const lg_status st = lg_min_energy(c.y_f.data(), w->data(), q, e);
      if (st == LG_ERR_SINGULAR_GRAMIAN) {
        *e = kNaN;
        r.flag = "singular";
      } else {
        check(st);
      }
    }
  });

  CsvWriter csv(c.out, config,
                {"t", "p", "mu_min_finite", "mu_min_infinite", "abs_error", "rel_error",
                 "energy_finite", "energy_infinite", "flag"});
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Row& r = rows[k];
    const double err = std::abs(r.mu_fin - r.mu_inf);
    csv.row({fmt(ts[k / ps.size()]), fmt(ps[k % ps.size()]), fmt(r.mu_fin), fmt(r.mu_inf),
             fmt(err), fmt(err / std::abs(r.mu_fin)), fmt(r.e_fin), fmt(r.e_inf), r.flag});
  }
  csv.close();
}

void cmd_synthesize(RunConfig c) {
  const json config = c.to_json();
  Lattice lat(c, c.params);
  const std::size_t n = lg_lattice_num_nodes(lat.h);
  const std::size_t m = c.drivers.size();
  const std::size_t q = c.targets.size();
  if (c.y_f.size() != q) throw Failure(kUsage, "y_f needs one entry per target");
  if (!c.x0.empty() && c.x0.size() != n)
    throw Failure(kUsage, "x0 needs one entry per lattice node (" + std::to_string(n) + ")");
  if (!(c.t > 0)) throw Failure(kUsage, "synthesis needs t > 0");

  std::vector<double> W(q * q);
  if (c.gramian_source == "finite") {
    check(lg_finite_output_gramian(lat.h, c.t, W.data()));
  } else {
    const auto targets = flatten(c.targets);
    const auto drivers = flatten(c.drivers);
    check(lg_output_gramian_infinite(&c.params, targets.data(), q, drivers.data(), m, c.t,
                                     &c.tol, worker_count(c.threads), W.data(), nullptr));
  }

  lg_controller* raw = nullptr;
  check(lg_controller_create(lat.h, c.x0.empty() ? nullptr : c.x0.data(), c.y_f.data(), c.t,
                             W.data(), &raw));
  std::unique_ptr<lg_controller, void (*)(lg_controller*)> ctrl(raw, lg_controller_destroy);

  std::vector<double> states((c.steps + 1) * n), inputs((c.steps + 1) * m), y_final(q), b(q);
  double realized = 0, predicted = 0;
  check(lg_controller_simulate(ctrl.get(), c.steps, states.data(), inputs.data(), &realized,
                               y_final.data()));
  check(lg_controller_predicted_energy(ctrl.get(), &predicted));
  check(lg_controller_control_action(ctrl.get(), b.data()));

  std::vector<std::size_t> target_index(q);
  for (std::size_t k = 0; k < q; ++k)
    check(lg_lattice_flat_index(lat.h, c.targets[k].data(), &target_index[k]));

  std::vector<std::string> cols{"t"};
  for (std::size_t k = 1; k <= m; ++k) cols.push_back("u" + std::to_string(k));
  for (std::size_t k = 1; k <= n; ++k) cols.push_back("x" + std::to_string(k));
  for (std::size_t k = 1; k <= q; ++k) cols.push_back("y" + std::to_string(k));
  CsvWriter csv(c.out, config, cols);
  for (std::size_t step = 0; step <= c.steps; ++step) {
    if (step % c.stride != 0 && step != c.steps) continue;
    const double t = step == c.steps ? c.t : c.t * static_cast<double>(step) / c.steps;
    std::vector<std::string> row{fmt(t)};
    for (std::size_t k = 0; k < m; ++k) row.push_back(fmt(inputs[step * m + k]));
    for (std::size_t k = 0; k < n; ++k) row.push_back(fmt(states[step * n + k]));
    for (std::size_t k = 0; k < q; ++k) row.push_back(fmt(states[step * n + target_index[k]]));
    csv.row(row);
  }
  csv.close();

  double attainment = 0;
  for (std::size_t k = 0; k < q; ++k)
    attainment = std::max(attainment, std::abs(y_final[k] - c.y_f[k]));
  const double gap = predicted > 0 ? std::abs(realized - predicted) / predicted
                                   : std::abs(realized - predicted);
  write_json(sibling(c.out, ".report.json"),
             {{"config", config},
              {"energy_predicted", predicted},
              {"energy_realized", realized},
              {"energy_gap", gap},
              {"control_action", b},
              {"y_final", y_final},
              {"attainment_error", attainment}});
}

void cmd_trace_integrand(RunConfig c) {
  const json config = c.to_json();
  const std::size_t K = c.targets.size();
  const auto count = static_cast<std::size_t>(c.tau_count);
  const auto drivers = flatten(c.drivers);
  std::vector<double> taus(count);
  for (std::size_t k = 0; k < count; ++k)
    taus[k] = c.tau_max * static_cast<double>(k) / static_cast<double>(count - 1);
  taus.back() = c.tau_max;

  std::vector<double> f(count * K), cum(count * K);
  parallel_for(count, c.threads, [&](std::size_t k) {
    for (std::size_t key = 0; key < K; ++key) {
      const int* i = c.targets[key].data();
      check(lg_integrand(&c.params, i, i, drivers.data(), c.drivers.size(), taus[k],
                         &f[k * K + key]));
      check(lg_infinite_entry(&c.params, i, i, drivers.data(), c.drivers.size(), taus[k],
                              &c.tol, &cum[k * K + key]));
    }
  });

  std::vector<std::string> cols{"tau"};
  for (const auto& n : c.targets) cols.push_back(key_name(n));
  for (auto [path, data] : {std::pair{fs::path(c.out), &f},
                            std::pair{sibling(c.out, ".cumulative.csv"), &cum}}) {
    CsvWriter csv(path, config, cols);
    for (std::size_t k = 0; k < count; ++k) {
      std::vector<std::string> row{fmt(taus[k])};
      for (std::size_t key = 0; key < K; ++key) row.push_back(fmt((*data)[k * K + key]));
      csv.row(row);
    }
    csv.close();
  }
}

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_path, "JSON config file; flags override its fields");
  sub->add_option("--out", o.out, "output file");
  sub->add_option("--d", o.d, "lattice dimension");
  sub->add_option("--p", o.p, "self-loop magnitude");
  sub->add_option("--s", o.s, "edge weight");
  sub->add_option("--t", o.t, "time horizon");
  sub->add_option("--drivers", o.drivers, "driver nodes, e.g. \"0,0;1,0\"");
  sub->add_option("--targets", o.targets, "target nodes, same format as --drivers");
  sub->add_option("--extents", o.extents, "finite lattice size, e.g. 21x21");
  sub->add_option("--tol-abs", o.tol_abs, "quadrature absolute tolerance");
  sub->add_option("--tol-rel", o.tol_rel, "quadrature relative tolerance");
  sub->add_option("--threads", o.threads,
                  "worker threads (default: $LATTICE_GRAMIAN_THREADS, then all cores)");
}

}  // namespace
}  // namespace cli

int main(int argc, char** argv) {
  using namespace cli;
  CLI::App app{"Controllability Gramians and minimum-energy control on lattice networks"};
  app.require_subcommand(1);
  Overrides o;

  struct Command {
    const char* name;
    const char* help;
    void (*run)(RunConfig);
  };
  const Command commands[] = {
      {"gramian", "infinite-lattice Gramian entries", cmd_gramian},
      {"gramian-finite", "finite-lattice Gramian entries", cmd_gramian_finite},
      {"compare", "finite against infinite Gramian entries", cmd_compare},
      {"energy-sweep", "smallest output-Gramian eigenvalue over a (t, p) grid", cmd_energy_sweep},
      {"synthesize", "minimum-energy control, simulated", cmd_synthesize},
      {"trace-integrand", "integrand and its running integral", cmd_trace_integrand},
  };
  std::vector<CLI::App*> subs;
  for (const auto& cmd : commands) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    add_common(sub, o);
    subs.push_back(sub);
  }
  subs[0]->add_option("--pairs", o.pairs, "pairs \"i1,i2:j1,j2;...\" (default: all target pairs)");
  subs[1]->add_option("--pairs", o.pairs, "pairs (default: all target pairs)");
  subs[1]->add_option("--method", o.method, "spectral or ode");
  subs[2]->add_option("--pairs", o.pairs, "pairs (default: every node against the origin)");
  subs[2]->add_flag("--self", o.self_compare, "compare the finite Gramian with itself");
  subs[3]->add_option("--t-sweep", o.t_sweep, "min:max:count[:linear|log]");
  subs[3]->add_option("--p-sweep", o.p_sweep, "min:max:count[:linear|log]");
  subs[3]->add_option("--y-f", o.y_f, "control action used for the energies, comma separated");
  subs[4]->add_option("--y-f", o.y_f, "desired outputs, comma separated (default: ones)");
  subs[4]->add_option("--steps", o.steps, "RK4 steps");
  subs[4]->add_option("--stride", o.stride, "write every stride-th step");
  subs[4]->add_option("--gramian", o.gramian_source, "finite or infinite");
  subs[5]->add_option("--tau-max", o.tau_max, "end of the tau grid");
  subs[5]->add_option("--tau-count", o.tau_count, "number of tau grid points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  for (std::size_t k = 0; k < subs.size(); ++k) {
    if (!subs[k]->parsed()) continue;
    try {
      RunConfig cfg = resolve(commands[k].name, o);
      if (cfg.out.empty()) throw Failure(kUsage, "--out is required");
      commands[k].run(std::move(cfg));
      return kOk;
    } catch (const Failure& f) {
      std::cerr << "latgram: " << f.what() << '\n';
      return f.code;
    } catch (const std::exception& e) {
      std::cerr << "latgram: " << e.what() << '\n';
      return kUsage;
    }
  }
  return kUsage;
}
