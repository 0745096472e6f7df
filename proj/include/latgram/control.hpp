#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace latgram {

/// Cached eigendecomposition of a symmetric matrix for evaluating e^{At} v.
class SymmetricExpm {
 public:
  explicit SymmetricExpm(const Eigen::MatrixXd& A);

  /// e^{A t} v = V diag(e^{lambda t}) V^T v.
  Eigen::VectorXd apply(double t, const Eigen::VectorXd& v) const;

  const Eigen::VectorXd& eigenvalues() const noexcept { return lambda_; }
  const Eigen::MatrixXd& eigenvectors() const noexcept { return V_; }

 private:
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd V_;
};

/// One-shot e^{A t} v for symmetric A.
Eigen::VectorXd expm_action(const Eigen::MatrixXd& A, double t, const Eigen::VectorXd& v);

/// Drive the outputs y = C x of dx/dt = A x + B u from x(0) = x0 to y_f at t_f.
struct ControlProblem {
  Eigen::MatrixXd A;  // n x n, symmetric
  Eigen::MatrixXd B;  // n x m
  Eigen::MatrixXd C;  // q x n
  Eigen::VectorXd x0;
  Eigen::VectorXd y_f;
  double t_f = 1.0;

  /// Throws InvalidArgument on inconsistent shapes, asymmetric A or t_f <= 0.
  void validate() const;
};

/// b = y_f - C e^{A t_f} x0: what the input has to accomplish beyond free
/// evolution.
Eigen::VectorXd control_action(const ControlProblem& prob);

/// b^T W^{-1} b by Cholesky. Throws SingularGramian when W is not positive
/// definite or its condition number exceeds 1e14.
double min_energy(const Eigen::VectorXd& b, const Eigen::MatrixXd& output_gramian);

struct EnergyReport {
  double energy = 0.0;
  Eigen::VectorXd control_action;
  Eigen::VectorXd eigenvalues;         // ascending
  Eigen::MatrixXd eigenvectors;        // columns z_i
  Eigen::VectorXd mode_contributions;  // (b^T z_i)^2 / mu_i

  double mu_min() const { return eigenvalues.size() ? eigenvalues(0) : 0.0; }
};

/// Energy through the eigendecomposition of the output Gramian,
/// E = sum_i (b^T z_i)^2 / mu_i.
EnergyReport energy_report(const Eigen::VectorXd& b, const Eigen::MatrixXd& output_gramian);

/// The minimum-energy input
///   u(t) = B^T e^{A^T (t_f - t)} C^T (C W(t_f) C^T)^{-1} b.
/// The constant C^T (C W C^T)^{-1} b is projected onto A's eigenbasis once,
/// so each evaluation costs O(n m).
///
/// The energy is reported as E = int u^T u dt, i.e. twice the objective
/// J = 1/2 int u^T u dt.
class MinimumEnergyController {
 public:
  MinimumEnergyController(ControlProblem prob, const Eigen::MatrixXd& output_gramian);

  Eigen::VectorXd operator()(double t) const;

  const ControlProblem& problem() const noexcept { return prob_; }
  const Eigen::VectorXd& control_action() const noexcept { return b_; }
  double predicted_energy() const noexcept { return energy_; }
  const SymmetricExpm& expm() const noexcept { return expm_; }

 private:
  ControlProblem prob_;
  SymmetricExpm expm_;
  Eigen::VectorXd b_;
  double energy_ = 0.0;
  Eigen::MatrixXd BtV_;     // m x n
  Eigen::VectorXd modal_;  // V^T C^T (C W C^T)^{-1} b
};

struct SimulationResult {
  std::vector<double> times;               // steps + 1 grid points
  std::vector<Eigen::VectorXd> trajectory;  // x at each grid point
  double realized_energy = 0.0;             // int u^T u dt
  Eigen::VectorXd y_final;                  // C x(t_f)
};

using ControlSignal = std::function<Eigen::VectorXd(double)>;

/// Fixed-step RK4 integration of dx/dt = A x + B u(t) over [0, t_f]. The
/// energy is accumulated by Simpson's rule on each step using the same
/// node and midpoint evaluations of u as the integrator.
SimulationResult simulate(const ControlProblem& prob, const ControlSignal& u,
                          std::size_t steps, bool keep_trajectory = true);

}  // namespace latgram
