#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Sparse>

#include "latgram/error.hpp"
#include "latgram/gramian.hpp"

namespace latgram {
namespace {

void check_system(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double t) {
  if (A.rows() != A.cols()) throw InvalidArgument("A must be square");
  if (B.rows() != A.rows()) throw InvalidArgument("B must have as many rows as A");
  if (!(t >= 0.0) || !std::isfinite(t))
    throw InvalidArgument("horizon must be finite and non-negative");
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if (A.size() > 0 && (A - A.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InvalidArgument("A must be symmetric");
}

// (e^{L t} - 1) / L with its removable singularity at L = 0.
double lyapunov_weight(double L, double t) {
  if (std::abs(L) < 1e-12) return t;
  return std::expm1(L * t) / L;
}

Eigen::MatrixXd spectral_weights(const Eigen::VectorXd& lambda,
                                 const Eigen::MatrixXd& VtB, double t) {
  const Eigen::Index n = lambda.size();
  Eigen::MatrixXd M = VtB * VtB.transpose();
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index a = 0; a < n; ++a)
      M(a, b) *= lyapunov_weight(lambda(a) + lambda(b), t);
  return M;
}

// Packed upper-triangle layout, column by column: (i, j) with i <= j lives at
// j (j + 1) / 2 + i.
std::size_t packed_size(Eigen::Index n) {
  return static_cast<std::size_t>(n) * static_cast<std::size_t>(n + 1) / 2;
}

void unpack(const Eigen::VectorXd& y, Eigen::MatrixXd& W) {
  const Eigen::Index n = W.rows();
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i <= j; ++i, ++k) W(i, j) = W(j, i) = y(k);
}

// Lyapunov right-hand side A W + W A^T + B B^T on packed storage.
class LyapunovRhs {
 public:
  LyapunovRhs(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B)
      : A_(A.sparseView()), Q_(B * B.transpose()), W_(A.rows(), A.rows()),
        F_(A.rows(), A.rows()) {}

  void operator()(const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    ++evaluations;
    unpack(y, W_);
    F_.noalias() = A_ * W_;
    const Eigen::Index n = W_.rows();
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i <= j; ++i, ++k) dy(k) = F_(i, j) + F_(j, i) + Q_(i, j);
  }

  std::size_t evaluations = 0;

 private:
  Eigen::SparseMatrix<double> A_;
  Eigen::MatrixXd Q_;
  Eigen::MatrixXd W_;
  Eigen::MatrixXd F_;
};

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - b_hat, the embedded error weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

FiniteGramian finite_gramian_closed(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                    double t) {
  check_system(A, B, t);
  const Eigen::Index n = A.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
  if (eig.info() != Eigen::Success)
    throw NumericalDomainError("symmetric eigendecomposition failed");
  const Eigen::MatrixXd& V = eig.eigenvectors();
  const Eigen::MatrixXd M = spectral_weights(eig.eigenvalues(), V.transpose() * B, t);

  FiniteGramian out;
  out.horizon = t;
  out.matrix.noalias() = V * M * V.transpose();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < j; ++i) {
      const double avg = 0.5 * (out.matrix(i, j) + out.matrix(j, i));
      out.matrix(i, j) = out.matrix(j, i) = avg;
    }
  out.unique_entries = packed_size(n);
  return out;
}

FiniteGramian finite_gramian_ode(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                 double t, double tol) {
  check_system(A, B, t);
  if (!(tol > 0.0)) throw InvalidArgument("ODE tolerance must be positive");
  const Eigen::Index n = A.rows();
  const auto dim = static_cast<Eigen::Index>(packed_size(n));

  FiniteGramian out;
  out.horizon = t;
  out.unique_entries = static_cast<std::size_t>(dim);
  out.matrix = Eigen::MatrixXd::Zero(n, n);
  if (t == 0.0 || n == 0) return out;

  LyapunovRhs rhs(A, B);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(dim);
  std::array<Eigen::VectorXd, 7> k;
  for (auto& v : k) v.resize(dim);
  Eigen::VectorXd stage(dim), y_new(dim), err(dim);

  // The Lyapunov operator's spectrum lies within twice A's Gershgorin radius.
  const double stiffness = 2.0 * A.cwiseAbs().rowwise().sum().maxCoeff();
  double h = std::min(t, 0.01 / std::max(stiffness, 1e-300));
  const double h_min = 1e-14 * t;
  double time = 0.0;

  rhs(y, k[0]);
  for (std::size_t steps = 0;; ++steps) {
    if (steps > 10'000'000) throw StiffnessError("step budget exhausted");
    const bool last = time + h >= t;
    if (last) h = t - time;

    stage = y + h * a21 * k[0];
    rhs(stage, k[1]);
    stage = y + h * (a31 * k[0] + a32 * k[1]);
    rhs(stage, k[2]);
    stage = y + h * (a41 * k[0] + a42 * k[1] + a43 * k[2]);
    rhs(stage, k[3]);
    stage = y + h * (a51 * k[0] + a52 * k[1] + a53 * k[2] + a54 * k[3]);
    rhs(stage, k[4]);
    stage = y + h * (a61 * k[0] + a62 * k[1] + a63 * k[2] + a64 * k[3] + a65 * k[4]);
    rhs(stage, k[5]);
    y_new = y + h * (b1 * k[0] + b3 * k[2] + b4 * k[3] + b5 * k[4] + b6 * k[5]);
    rhs(y_new, k[6]);
    err = h * (e1 * k[0] + e3 * k[2] + e4 * k[3] + e5 * k[4] + e6 * k[5] + e7 * k[6]);

    double norm = 0.0;
    for (Eigen::Index m = 0; m < dim; ++m)
      norm = std::max(norm, std::abs(err(m)) /
                                (tol + tol * std::max(std::abs(y(m)), std::abs(y_new(m)))));

    if (norm <= 1.0) {
      time = last ? t : time + h;
      y.swap(y_new);
      k[0].swap(k[6]);
      if (last) break;
    }
    const double factor =
        norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
    h *= norm <= 1.0 ? factor : std::min(factor, 1.0);
    if (h < h_min) throw StiffnessError("step size underflow in Lyapunov integration");
  }

  unpack(y, out.matrix);
  out.rhs_evaluations = rhs.evaluations;
  return out;
}

Eigen::MatrixXd finite_output_gramian(const FiniteLatticeSpec& spec, double t) {
  const SystemMatrices sys = build_system(spec);
  check_system(sys.A, sys.B, t);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sys.A);
  if (eig.info() != Eigen::Success)
    throw NumericalDomainError("symmetric eigendecomposition failed");
  const Eigen::MatrixXd& V = eig.eigenvectors();
  const Eigen::MatrixXd M = spectral_weights(eig.eigenvalues(), V.transpose() * sys.B, t);
  const Eigen::MatrixXd CV = sys.C * V;
  Eigen::MatrixXd out = CV * M * CV.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace latgram
