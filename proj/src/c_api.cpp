#include "latgram/latgram.h"

#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "latgram/bessel.hpp"
#include "latgram/control.hpp"
#include "latgram/error.hpp"
#include "latgram/gramian.hpp"
#include "latgram/lattice.hpp"

struct lg_lattice {
  latgram::FiniteLatticeSpec spec;
};

struct lg_finite_gramian {
  latgram::FiniteLatticeSpec spec;
  latgram::FiniteGramian gramian;
};

struct lg_controller {
  latgram::MinimumEnergyController controller;
};

namespace {

using latgram::NodeIndex;

thread_local std::string g_last_error;
thread_local std::optional<double> g_last_value;

lg_status status_for(latgram::ErrorCode code) {
  switch (code) {
    case latgram::ErrorCode::InvalidArgument: return LG_ERR_INVALID_ARGUMENT;
    case latgram::ErrorCode::Range: return LG_ERR_RANGE;
    case latgram::ErrorCode::NumericalDomain: return LG_ERR_NUMERICAL_DOMAIN;
    case latgram::ErrorCode::AccuracyNotAttained: return LG_ERR_ACCURACY;
    case latgram::ErrorCode::Stiffness: return LG_ERR_STIFFNESS;
    case latgram::ErrorCode::SingularGramian: return LG_ERR_SINGULAR_GRAMIAN;
  }
  return LG_ERR_INTERNAL;
}

// Runs body, translating exceptions into status codes.
template <class Body>
lg_status guarded(Body&& body) noexcept {
  g_last_value.reset();
  try {
    body();
    g_last_error.clear();
    return LG_OK;
  } catch (const latgram::RangeError& e) {
    g_last_error = e.what();
    g_last_value = e.log_value();
    return LG_ERR_RANGE;
  } catch (const latgram::AccuracyNotAttained& e) {
    g_last_error = e.what();
    g_last_value = e.best_value();
    return LG_ERR_ACCURACY;
  } catch (const latgram::Error& e) {
    g_last_error = e.what();
    return status_for(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return LG_ERR_NO_MEMORY;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return LG_ERR_INTERNAL;
  }
}

template <class T>
void require(const T* ptr, const char* name) {
  if (!ptr) throw latgram::InvalidArgument(std::string(name) + " must not be NULL");
}

latgram::LatticeParams to_params(const lg_params* p) {
  require(p, "params");
  latgram::LatticeParams out{p->d, p->p, p->s};
  out.validate();
  return out;
}

latgram::quad::Tolerances to_tol(const lg_tolerances* tol) {
  if (!tol) return {};
  return {tol->abs_tol, tol->rel_tol};
}

NodeIndex node(const int* coords, int d) {
  return NodeIndex(std::span<const int>(coords, static_cast<std::size_t>(d)));
}

std::vector<NodeIndex> nodes(const int* coords, std::size_t count, int d, const char* name) {
  if (count) require(coords, name);
  std::vector<NodeIndex> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(node(coords + k * d, d));
  return out;
}

std::vector<latgram::GramianEntryKey> keys(const int* pairs_i, const int* pairs_j,
                                           std::size_t count, int d) {
  const auto is = nodes(pairs_i, count, d, "pairs_i");
  const auto js = nodes(pairs_j, count, d, "pairs_j");
  std::vector<latgram::GramianEntryKey> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back({is[k], js[k]});
  return out;
}

void write_row_major(const Eigen::MatrixXd& M, double* out) {
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c) *out++ = M(r, c);
}

Eigen::MatrixXd read_row_major(const double* in, std::size_t rows, std::size_t cols) {
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c) M(r, c) = *in++;
  return M;
}

void write_vector(const Eigen::VectorXd& v, double* out) {
  if (out) std::memcpy(out, v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
}

}  // namespace

extern "C" {

const char* lg_version(void) { return "0.1.0"; }

const char* lg_status_string(lg_status status) {
  switch (status) {
    case LG_OK: return "ok";
    case LG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LG_ERR_RANGE: return "range error";
    case LG_ERR_NUMERICAL_DOMAIN: return "numerical domain error";
    case LG_ERR_ACCURACY: return "accuracy not attained";
    case LG_ERR_STIFFNESS: return "stiffness error";
    case LG_ERR_SINGULAR_GRAMIAN: return "singular output Gramian";
    case LG_ERR_NO_MEMORY: return "out of memory";
    case LG_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* lg_last_error(void) { return g_last_error.c_str(); }

int lg_last_error_value(double* out) {
  if (!g_last_value || !out) return 0;
  *out = *g_last_value;
  return 1;
}

lg_status lg_bessel_i(int n, double z, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = latgram::bessel::i(n, z);
  });
}

lg_status lg_bessel_i_scaled(int n, double z, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = latgram::bessel::i_scaled(n, z);
  });
}

lg_status lg_bessel_i_scaled_sequence(int n_max, double z, double* out) {
  return guarded([&] {
    require(out, "out");
    if (n_max < 0) throw latgram::InvalidArgument("n_max must be non-negative");
    latgram::bessel::i_scaled_sequence(
        z, std::span<double>(out, static_cast<std::size_t>(n_max) + 1));
  });
}

lg_status lg_integrand(const lg_params* params, const int* i, const int* j,
                       const int* drivers, size_t num_drivers, double tau, double* out) {
  return guarded([&] {
    const auto prm = to_params(params);
    require(i, "i");
    require(j, "j");
    require(out, "out");
    const auto ds = nodes(drivers, num_drivers, prm.d, "drivers");
    *out = latgram::integrand(node(i, prm.d), node(j, prm.d), ds, prm, tau);
  });
}

lg_status lg_infinite_entry(const lg_params* params, const int* i, const int* j,
                            const int* drivers, size_t num_drivers, double t,
                            const lg_tolerances* tol, double* out) {
  return guarded([&] {
    const auto prm = to_params(params);
    require(i, "i");
    require(j, "j");
    require(out, "out");
    const auto ds = nodes(drivers, num_drivers, prm.d, "drivers");
    *out = latgram::infinite_entry(node(i, prm.d), node(j, prm.d), ds, prm, t, to_tol(tol));
  });
}

lg_status lg_infinite_entry_limit(const lg_params* params, const int* i, const int* j,
                                  const int* drivers, size_t num_drivers,
                                  const lg_tolerances* tol, double* out) {
  return guarded([&] {
    const auto prm = to_params(params);
    require(i, "i");
    require(j, "j");
    require(out, "out");
    const auto ds = nodes(drivers, num_drivers, prm.d, "drivers");
    *out = latgram::infinite_entry_limit(node(i, prm.d), node(j, prm.d), ds, prm,
                                         to_tol(tol));
  });
}

lg_status lg_infinite_entries(const lg_params* params, const int* pairs_i,
                              const int* pairs_j, size_t num_pairs, const int* drivers,
                              size_t num_drivers, double t, const lg_tolerances* tol,
                              unsigned threads, double* out) {
  return guarded([&] {
    const auto prm = to_params(params);
    if (num_pairs) require(out, "out");
    const auto ks = keys(pairs_i, pairs_j, num_pairs, prm.d);
    const auto ds = nodes(drivers, num_drivers, prm.d, "drivers");
    const auto values = latgram::infinite_entries(ks, ds, prm, t, to_tol(tol), threads);
    std::copy(values.begin(), values.end(), out);
  });
}

lg_status lg_output_gramian_infinite(const lg_params* params, const int* targets,
                                     size_t num_targets, const int* drivers,
                                     size_t num_drivers, double t, const lg_tolerances* tol,
                                     unsigned threads, double* out, size_t* quadratures) {
  return guarded([&] {
    const auto prm = to_params(params);
    require(out, "out");
    const auto ts = nodes(targets, num_targets, prm.d, "targets");
    const auto ds = nodes(drivers, num_drivers, prm.d, "drivers");
    const auto g = latgram::output_gramian_infinite(ts, ds, prm, t, to_tol(tol), threads);
    write_row_major(g.matrix, out);
    if (quadratures) *quadratures = g.quadratures;
  });
}

lg_status lg_single_target_energy(const lg_params* params, const int* i, double t,
                                  const lg_tolerances* tol, double* energy) {
  return guarded([&] {
    const auto prm = to_params(params);
    require(i, "i");
    require(energy, "energy");
    *energy = latgram::single_target_energy(node(i, prm.d), prm, t, to_tol(tol));
  });
}

lg_status lg_lattice_create(const lg_params* params, const int* extents,
                            const int* drivers, size_t num_drivers, const int* targets,
                            size_t num_targets, lg_lattice** out) {
  return guarded([&] {
    const auto prm = to_params(params);
    require(extents, "extents");
    require(out, "out");
    *out = nullptr;
    std::vector<int> ext(extents, extents + prm.d);
    *out = new lg_lattice{latgram::FiniteLatticeSpec(
        prm, std::move(ext), nodes(drivers, num_drivers, prm.d, "drivers"),
        nodes(targets, num_targets, prm.d, "targets"))};
  });
}

void lg_lattice_destroy(lg_lattice* lattice) { delete lattice; }

int lg_lattice_dim(const lg_lattice* lattice) {
  return lattice ? lattice->spec.params().d : 0;
}

size_t lg_lattice_num_nodes(const lg_lattice* lattice) {
  return lattice ? lattice->spec.num_nodes() : 0;
}

size_t lg_lattice_num_drivers(const lg_lattice* lattice) {
  return lattice ? lattice->spec.drivers().size() : 0;
}

size_t lg_lattice_num_targets(const lg_lattice* lattice) {
  return lattice ? lattice->spec.targets().size() : 0;
}

lg_status lg_lattice_params(const lg_lattice* lattice, lg_params* out) {
  return guarded([&] {
    require(lattice, "lattice");
    require(out, "out");
    const auto& p = lattice->spec.params();
    *out = lg_params{p.d, p.p, p.s};
  });
}

lg_status lg_lattice_flat_index(const lg_lattice* lattice, const int* i, size_t* out) {
  return guarded([&] {
    require(lattice, "lattice");
    require(i, "i");
    require(out, "out");
    *out = latgram::flat_index(node(i, lattice->spec.params().d), lattice->spec);
  });
}

lg_status lg_lattice_output_controllable(const lg_lattice* lattice, int* out) {
  return guarded([&] {
    require(lattice, "lattice");
    require(out, "out");
    if (lattice->spec.drivers().empty()) {
      *out = lattice->spec.targets().empty() ? 1 : 0;
      return;
    }
    const auto sys = latgram::build_system(lattice->spec);
    *out = latgram::is_output_controllable(sys.A, sys.B, sys.C) ? 1 : 0;
  });
}

lg_status lg_lattice_system_matrix(const lg_lattice* lattice, double* out) {
  return guarded([&] {
    require(lattice, "lattice");
    require(out, "out");
    write_row_major(latgram::build_system(lattice->spec).A, out);
  });
}

lg_status lg_finite_gramian_compute(const lg_lattice* lattice, double t,
                                    lg_gramian_method method, double ode_tol,
                                    lg_finite_gramian** out) {
  return guarded([&] {
    require(lattice, "lattice");
    require(out, "out");
    *out = nullptr;
    const auto sys = latgram::build_system(lattice->spec);
    latgram::FiniteGramian g;
    switch (method) {
      case LG_GRAMIAN_SPECTRAL:
        g = latgram::finite_gramian_closed(sys.A, sys.B, t);
        break;
      case LG_GRAMIAN_ODE:
        g = latgram::finite_gramian_ode(sys.A, sys.B, t, ode_tol > 0.0 ? ode_tol : 1e-11);
        break;
      default:
        throw latgram::InvalidArgument("unknown Gramian method");
    }
    *out = new lg_finite_gramian{lattice->spec, std::move(g)};
  });
}

void lg_finite_gramian_destroy(lg_finite_gramian* gramian) { delete gramian; }

size_t lg_finite_gramian_size(const lg_finite_gramian* gramian) {
  return gramian ? static_cast<size_t>(gramian->gramian.matrix.rows()) : 0;
}

double lg_finite_gramian_horizon(const lg_finite_gramian* gramian) {
  return gramian ? gramian->gramian.horizon : 0.0;
}

size_t lg_finite_gramian_unique_entries(const lg_finite_gramian* gramian) {
  return gramian ? gramian->gramian.unique_entries : 0;
}

size_t lg_finite_gramian_rhs_evaluations(const lg_finite_gramian* gramian) {
  return gramian ? gramian->gramian.rhs_evaluations : 0;
}

lg_status lg_finite_gramian_entry(const lg_finite_gramian* gramian, const int* i,
                                  const int* j, double* out) {
  return guarded([&] {
    require(gramian, "gramian");
    require(i, "i");
    require(j, "j");
    require(out, "out");
    const int d = gramian->spec.params().d;
    const latgram::GramianEntryKey key{node(i, d), node(j, d)};
    *out = latgram::finite_entries(gramian->gramian, gramian->spec, {&key, 1}).front();
  });
}

lg_status lg_finite_gramian_output(const lg_finite_gramian* gramian, double* out) {
  return guarded([&] {
    require(gramian, "gramian");
    require(out, "out");
    const auto& ts = gramian->spec.targets();
    for (const auto& a : ts)
      for (const auto& b : ts) {
        const latgram::GramianEntryKey key{a, b};
        *out++ = latgram::finite_entries(gramian->gramian, gramian->spec, {&key, 1}).front();
      }
  });
}

lg_status lg_finite_gramian_matrix(const lg_finite_gramian* gramian, double* out) {
  return guarded([&] {
    require(gramian, "gramian");
    require(out, "out");
    write_row_major(gramian->gramian.matrix, out);
  });
}

lg_status lg_finite_output_gramian(const lg_lattice* lattice, double t, double* out) {
  return guarded([&] {
    require(lattice, "lattice");
    require(out, "out");
    write_row_major(latgram::finite_output_gramian(lattice->spec, t), out);
  });
}

lg_status lg_compare(const lg_finite_gramian* gramian, const lg_finite_gramian* reference,
                     const int* pairs_i, const int* pairs_j, size_t num_pairs,
                     const lg_tolerances* tol, unsigned threads, double* finite_values,
                     double* reference_values, double* abs_error, double* rel_error,
                     double* max_abs, double* max_rel) {
  return guarded([&] {
    require(gramian, "gramian");
    const auto ks = keys(pairs_i, pairs_j, num_pairs, gramian->spec.params().d);
    latgram::ComparisonReport report;
    if (reference) {
      if (reference->spec.num_nodes() != gramian->spec.num_nodes() ||
          reference->spec.extents() != gramian->spec.extents())
        throw latgram::InvalidArgument("reference Gramian belongs to a different lattice");
      report = latgram::compare_values(
          ks, latgram::finite_entries(gramian->gramian, gramian->spec, ks),
          latgram::finite_entries(reference->gramian, reference->spec, ks));
    } else {
      report = latgram::compare(gramian->gramian, gramian->spec, ks, to_tol(tol), threads);
    }
    for (std::size_t k = 0; k < report.entries.size(); ++k) {
      const auto& e = report.entries[k];
      if (finite_values) finite_values[k] = e.finite;
      if (reference_values) reference_values[k] = e.reference;
      if (abs_error) abs_error[k] = e.abs_error;
      if (rel_error) rel_error[k] = e.rel_error;
    }
    if (max_abs) *max_abs = report.max_abs;
    if (max_rel) *max_rel = report.max_rel;
  });
}

lg_status lg_min_energy(const double* b, const double* output_gramian, size_t q,
                        double* out) {
  return guarded([&] {
    require(out, "out");
    if (q) {
      require(b, "b");
      require(output_gramian, "output_gramian");
    }
    const Eigen::VectorXd bv = Eigen::Map<const Eigen::VectorXd>(b, static_cast<Eigen::Index>(q));
    *out = latgram::min_energy(bv, read_row_major(output_gramian, q, q));
  });
}

lg_status lg_energy_report(const double* b, const double* output_gramian, size_t q,
                           double* energy, double* eigenvalues, double* contributions) {
  return guarded([&] {
    if (q) {
      require(b, "b");
      require(output_gramian, "output_gramian");
    }
    const Eigen::VectorXd bv = Eigen::Map<const Eigen::VectorXd>(b, static_cast<Eigen::Index>(q));
    const auto report = latgram::energy_report(bv, read_row_major(output_gramian, q, q));
    if (energy) *energy = report.energy;
    write_vector(report.eigenvalues, eigenvalues);
    write_vector(report.mode_contributions, contributions);
  });
}

lg_status lg_symmetric_eigenvalues(const double* matrix, size_t q, double* out) {
  return guarded([&] {
    if (!q) return;
    require(matrix, "matrix");
    require(out, "out");
    const Eigen::MatrixXd M = read_row_major(matrix, q, q);
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * M.cwiseAbs().maxCoeff())
      throw latgram::InvalidArgument("matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
      throw latgram::NumericalDomainError("symmetric eigendecomposition failed");
    write_vector(eig.eigenvalues(), out);
  });
}

lg_status lg_controller_create(const lg_lattice* lattice, const double* x0,
                               const double* y_f, double t_f, const double* output_gramian,
                               lg_controller** out) {
  return guarded([&] {
    require(lattice, "lattice");
    require(out, "out");
    *out = nullptr;
    const auto& spec = lattice->spec;
    const auto n = static_cast<Eigen::Index>(spec.num_nodes());
    const auto q = spec.targets().size();
    if (q) {
      require(y_f, "y_f");
      require(output_gramian, "output_gramian");
    }
    auto sys = latgram::build_system(spec);
    latgram::ControlProblem prob{std::move(sys.A), std::move(sys.B), std::move(sys.C),
                                 x0 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(x0, n))
                                    : Eigen::VectorXd::Zero(n),
                                 Eigen::Map<const Eigen::VectorXd>(y_f, static_cast<Eigen::Index>(q)),
                                 t_f};
    *out = new lg_controller{latgram::MinimumEnergyController(
        std::move(prob), read_row_major(output_gramian, q, q))};
  });
}

void lg_controller_destroy(lg_controller* controller) { delete controller; }

lg_status lg_controller_control_action(const lg_controller* controller, double* out) {
  return guarded([&] {
    require(controller, "controller");
    require(out, "out");
    write_vector(controller->controller.control_action(), out);
  });
}

lg_status lg_controller_predicted_energy(const lg_controller* controller, double* out) {
  return guarded([&] {
    require(controller, "controller");
    require(out, "out");
    *out = controller->controller.predicted_energy();
  });
}

lg_status lg_controller_eval(const lg_controller* controller, double t, double* out) {
  return guarded([&] {
    require(controller, "controller");
    require(out, "out");
    write_vector(controller->controller(t), out);
  });
}

lg_status lg_controller_simulate(const lg_controller* controller, size_t steps,
                                 double* states, double* inputs, double* realized_energy,
                                 double* y_final) {
  return guarded([&] {
    require(controller, "controller");
    const auto& ctl = controller->controller;
    const auto result = latgram::simulate(
        ctl.problem(), [&](double t) { return ctl(t); }, steps, states || inputs);
    const auto n = static_cast<std::size_t>(ctl.problem().A.rows());
    const auto m = static_cast<std::size_t>(ctl.problem().B.cols());
    for (std::size_t k = 0; k < result.times.size(); ++k) {
      if (states) write_vector(result.trajectory[k], states + k * n);
      if (inputs) write_vector(ctl(result.times[k]), inputs + k * m);
    }
    if (realized_energy) *realized_energy = result.realized_energy;
    write_vector(result.y_final, y_final);
  });
}

}  // extern "C"
