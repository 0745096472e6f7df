#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "latgram/lattice.hpp"
#include "latgram/quad.hpp"

namespace latgram {

/// Tetradic key (i, j) of a Gramian entry.
struct GramianEntryKey {
  NodeIndex i;
  NodeIndex j;

  friend auto operator<=>(const GramianEntryKey&, const GramianEntryKey&) = default;
  friend bool operator==(const GramianEntryKey&, const GramianEntryKey&) = default;
};

// ---------------------------------------------------------------------------
// Infinite lattice
//
// With W(0) = 0 the Gramian entry of the infinite d-dimensional lattice is
//
//   W_ij(t) = int_0^t e^{-2p tau} sum_{a in D} prod_k I_{i_k-a_k}(2s tau)
//                                                   I_{j_k-a_k}(2s tau) dtau.
//
// Everything is evaluated with scaled Bessel functions, i.e. as
// e^{(4ds-2p) tau} sum_a prod_k Î(.) Î(.), so large tau never overflows.
// ---------------------------------------------------------------------------

/// The integrand above at a single tau >= 0.
double integrand(const NodeIndex& i, const NodeIndex& j,
                 std::span<const NodeIndex> drivers, const LatticeParams& params,
                 double tau);

/// W_ij(t) for t >= 0 (zero at t = 0).
double infinite_entry(const NodeIndex& i, const NodeIndex& j,
                      std::span<const NodeIndex> drivers,
                      const LatticeParams& params, double t,
                      quad::Tolerances tol = {});

/// lim_{t -> inf} W_ij(t). Requires p > 2ds.
double infinite_entry_limit(const NodeIndex& i, const NodeIndex& j,
                            std::span<const NodeIndex> drivers,
                            const LatticeParams& params, quad::Tolerances tol = {});

/// Entries for a batch of keys, in key order, computed on a worker pool.
std::vector<double> infinite_entries(std::span<const GramianEntryKey> keys,
                                     std::span<const NodeIndex> drivers,
                                     const LatticeParams& params, double t,
                                     quad::Tolerances tol = {}, unsigned threads = 1);

/// Immutable set of infinite-lattice entries at one horizon.
class GramianTable {
 public:
  GramianTable(LatticeParams params, std::vector<NodeIndex> drivers, double horizon,
               std::span<const GramianEntryKey> keys, quad::Tolerances tol = {},
               unsigned threads = 1);

  const LatticeParams& params() const noexcept { return params_; }
  const std::vector<NodeIndex>& drivers() const noexcept { return drivers_; }
  double horizon() const noexcept { return horizon_; }
  const std::map<GramianEntryKey, double>& entries() const noexcept { return entries_; }

  /// Stored value for (i, j) or (j, i); throws InvalidArgument if absent.
  double at(const NodeIndex& i, const NodeIndex& j) const;

 private:
  LatticeParams params_;
  std::vector<NodeIndex> drivers_;
  double horizon_;
  std::map<GramianEntryKey, double> entries_;
};

/// C W(t) C^T of the infinite lattice for the given targets.
struct OutputGramian {
  Eigen::MatrixXd matrix;
  std::size_t quadratures = 0;  // unique entries integrated
};

/// Only the upper triangle (q(q+1)/2 quadratures) is integrated and mirrored.
OutputGramian output_gramian_infinite(std::span<const NodeIndex> targets,
                                      std::span<const NodeIndex> drivers,
                                      const LatticeParams& params, double t,
                                      quad::Tolerances tol = {}, unsigned threads = 1);

/// Minimum energy to move a single target i by one unit with one driver at
/// the origin: 1 / W_ii(t). If W_ii underflows, throws RangeError whose
/// log_value() is the log of the energy.
double single_target_energy(const NodeIndex& i, const LatticeParams& params, double t,
                            quad::Tolerances tol = {});

/// log W_ii(t) for a single driver at the origin, evaluated entirely in the
/// log domain so it stays finite for arbitrarily distant targets.
double log_single_target_gramian(const NodeIndex& i, const LatticeParams& params,
                                 double t, quad::Tolerances tol = {});

// ---------------------------------------------------------------------------
// Finite lattice
// ---------------------------------------------------------------------------

struct FiniteGramian {
  Eigen::MatrixXd matrix;
  double horizon = 0.0;
  std::size_t unique_entries = 0;   // distinct entries produced (upper triangle)
  std::size_t rhs_evaluations = 0;  // ODE path only
};

/// W(t) = V M V^T with A = V diag(lambda) V^T, G = V^T B B^T V and
/// M_ab = G_ab (e^{(lambda_a + lambda_b) t} - 1) / (lambda_a + lambda_b).
FiniteGramian finite_gramian_closed(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                    double t);

/// Integrates dW/dt = A W + W A^T + B B^T from W(0) = 0 with Dormand-Prince
/// 5(4) on the packed upper triangle.
FiniteGramian finite_gramian_ode(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                 double t, double tol = 1e-11);

/// Output Gramian C W C^T from the spectral form, without assembling W.
Eigen::MatrixXd finite_output_gramian(const FiniteLatticeSpec& spec, double t);

struct ComparisonEntry {
  GramianEntryKey key;
  double finite = 0.0;
  double reference = 0.0;
  double abs_error = 0.0;
  double rel_error = 0.0;  // abs_error / |finite|
};

struct ComparisonReport {
  std::vector<ComparisonEntry> entries;  // in request order
  double max_abs = 0.0;
  double max_rel = 0.0;
};

/// Builds a report from finite values and reference values of equal length.
ComparisonReport compare_values(std::span<const GramianEntryKey> keys,
                                std::span<const double> finite,
                                std::span<const double> reference);

/// Finite-lattice entries against the infinite-lattice entries with the
/// lattice's drivers and parameters.
ComparisonReport compare(const FiniteGramian& finite, const FiniteLatticeSpec& spec,
                         std::span<const GramianEntryKey> pairs,
                         quad::Tolerances tol = {}, unsigned threads = 1);

/// Finite-lattice entries for the given pairs.
std::vector<double> finite_entries(const FiniteGramian& finite,
                                   const FiniteLatticeSpec& spec,
                                   std::span<const GramianEntryKey> pairs);

}  // namespace latgram
