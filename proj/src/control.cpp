#include "latgram/control.hpp"

#include <cmath>
#include <string>

#include <Eigen/Sparse>

#include "latgram/error.hpp"

namespace latgram {
namespace {

constexpr double kMaxCondition = 1e14;

void check_symmetric(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw InvalidArgument("A must be square");
  if (A.size() == 0) return;
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InvalidArgument("A must be symmetric");
}

void check_gramian(const Eigen::VectorXd& b, const Eigen::MatrixXd& W) {
  if (W.rows() != W.cols() || W.rows() != b.size())
    throw InvalidArgument("output Gramian must be q x q with q = size of b");
  if (W.size() && (W - W.transpose()).cwiseAbs().maxCoeff() >
                      1e-10 * std::max(1e-300, W.cwiseAbs().maxCoeff()))
    throw InvalidArgument("output Gramian must be symmetric");
}

void check_conditioning(const Eigen::VectorXd& mu) {
  if (mu.size() == 0) return;
  const double lo = mu(0), hi = mu(mu.size() - 1);
  if (!(lo > 0.0) || hi > kMaxCondition * lo)
    throw SingularGramian("output Gramian is numerically singular (eigenvalues " +
                          std::to_string(lo) + " .. " + std::to_string(hi) +
                          "); targets are not output controllable");
}

}  // namespace

SymmetricExpm::SymmetricExpm(const Eigen::MatrixXd& A) {
  check_symmetric(A);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
  if (eig.info() != Eigen::Success)
    throw NumericalDomainError("symmetric eigendecomposition failed");
  lambda_ = eig.eigenvalues();
  V_ = eig.eigenvectors();
}

Eigen::VectorXd SymmetricExpm::apply(double t, const Eigen::VectorXd& v) const {
  if (v.size() != V_.rows()) throw InvalidArgument("vector length does not match A");
  if (t == 0.0) return v;
  const Eigen::VectorXd modal = V_.transpose() * v;
  return V_ * (lambda_.array() * t).exp().matrix().cwiseProduct(modal);
}

Eigen::VectorXd expm_action(const Eigen::MatrixXd& A, double t, const Eigen::VectorXd& v) {
  if (t == 0.0) {
    check_symmetric(A);
    if (v.size() != A.rows()) throw InvalidArgument("vector length does not match A");
    return v;
  }
  return SymmetricExpm(A).apply(t, v);
}

void ControlProblem::validate() const {
  check_symmetric(A);
  const Eigen::Index n = A.rows();
  if (B.rows() != n) throw InvalidArgument("B must have n rows");
  if (C.cols() != n) throw InvalidArgument("C must have n columns");
  if (x0.size() != n) throw InvalidArgument("x0 must have length n");
  if (y_f.size() != C.rows()) throw InvalidArgument("y_f must have one entry per target");
  if (!(t_f > 0.0) || !std::isfinite(t_f))
    throw InvalidArgument("final time must be positive and finite");
}

Eigen::VectorXd control_action(const ControlProblem& prob) {
  prob.validate();
  return prob.y_f - prob.C * expm_action(prob.A, prob.t_f, prob.x0);
}

double min_energy(const Eigen::VectorXd& b, const Eigen::MatrixXd& output_gramian) {
  check_gramian(b, output_gramian);
  if (b.size() == 0) return 0.0;
  check_conditioning(
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(output_gramian, Eigen::EigenvaluesOnly)
          .eigenvalues());
  Eigen::LLT<Eigen::MatrixXd> llt(output_gramian);
  if (llt.info() != Eigen::Success)
    throw SingularGramian("output Gramian is not positive definite");
  return b.dot(llt.solve(b));
}

EnergyReport energy_report(const Eigen::VectorXd& b, const Eigen::MatrixXd& output_gramian) {
  check_gramian(b, output_gramian);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(output_gramian);
  if (eig.info() != Eigen::Success)
    throw NumericalDomainError("symmetric eigendecomposition failed");
  check_conditioning(eig.eigenvalues());

  EnergyReport report;
  report.control_action = b;
  report.eigenvalues = eig.eigenvalues();
  report.eigenvectors = eig.eigenvectors();
  const Eigen::VectorXd proj = report.eigenvectors.transpose() * b;
  report.mode_contributions = proj.array().square() / report.eigenvalues.array();
  report.energy = report.mode_contributions.sum();
  return report;
}

MinimumEnergyController::MinimumEnergyController(ControlProblem prob,
                                                 const Eigen::MatrixXd& output_gramian)
    : prob_(std::move(prob)), expm_((prob_.validate(), prob_.A)) {
  b_ = prob_.y_f - prob_.C * expm_.apply(prob_.t_f, prob_.x0);
  check_gramian(b_, output_gramian);
  BtV_ = prob_.B.transpose() * expm_.eigenvectors();
  if (b_.size() == 0 || b_.isZero(0.0)) {
    modal_ = Eigen::VectorXd::Zero(expm_.eigenvalues().size());
    energy_ = 0.0;
    return;
  }
  energy_ = min_energy(b_, output_gramian);
  const Eigen::VectorXd coeffs = Eigen::LLT<Eigen::MatrixXd>(output_gramian).solve(b_);
  modal_ = expm_.eigenvectors().transpose() * (prob_.C.transpose() * coeffs);
}

Eigen::VectorXd MinimumEnergyController::operator()(double t) const {
  if (!(t >= 0.0 && t <= prob_.t_f))
    throw InvalidArgument("control evaluated outside [0, t_f]");
  const Eigen::VectorXd decay = (expm_.eigenvalues().array() * (prob_.t_f - t)).exp();
  return BtV_ * decay.cwiseProduct(modal_);
}

SimulationResult simulate(const ControlProblem& prob, const ControlSignal& u,
                          std::size_t steps, bool keep_trajectory) {
  prob.validate();
  if (steps == 0) throw InvalidArgument("simulation needs at least one step");
  const Eigen::SparseMatrix<double> A = prob.A.sparseView();
  const Eigen::SparseMatrix<double> B = prob.B.sparseView();
  const double h = prob.t_f / static_cast<double>(steps);
  const Eigen::Index m = prob.B.cols();

  auto input = [&](double t) {
    Eigen::VectorXd v = u(t);
    if (v.size() != m) throw InvalidArgument("control signal has wrong length");
    return v;
  };

  SimulationResult out;
  Eigen::VectorXd x = prob.x0;
  if (keep_trajectory) {
    out.times.reserve(steps + 1);
    out.trajectory.reserve(steps + 1);
    out.times.push_back(0.0);
    out.trajectory.push_back(x);
  }

  Eigen::VectorXd u0 = input(0.0);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = h * static_cast<double>(k);
    const double t_next = k + 1 == steps ? prob.t_f : h * static_cast<double>(k + 1);
    const Eigen::VectorXd u_mid = input(t + 0.5 * h);
    const Eigen::VectorXd u1 = input(t_next);

    const Eigen::VectorXd k1 = A * x + B * u0;
    const Eigen::VectorXd k2 = A * (x + 0.5 * h * k1) + B * u_mid;
    const Eigen::VectorXd k3 = A * (x + 0.5 * h * k2) + B * u_mid;
    const Eigen::VectorXd k4 = A * (x + h * k3) + B * u1;
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    out.realized_energy +=
        h / 6.0 * (u0.squaredNorm() + 4.0 * u_mid.squaredNorm() + u1.squaredNorm());
    u0 = u1;
    if (keep_trajectory) {
      out.times.push_back(t_next);
      out.trajectory.push_back(x);
    }
  }
  out.y_final = prob.C * x;
  return out;
}

}  // namespace latgram
