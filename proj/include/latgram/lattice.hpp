#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace latgram {

/// Integer coordinates of a lattice node relative to the reference node at
/// the origin.
class NodeIndex {
 public:
  NodeIndex() = default;
  NodeIndex(std::initializer_list<int> coords) : coords_(coords) {}
  explicit NodeIndex(std::vector<int> coords) : coords_(std::move(coords)) {}
  explicit NodeIndex(std::span<const int> coords)
      : coords_(coords.begin(), coords.end()) {}

  std::size_t dim() const noexcept { return coords_.size(); }
  int operator[](std::size_t k) const { return coords_[k]; }
  int& operator[](std::size_t k) { return coords_[k]; }
  std::span<const int> coords() const noexcept { return coords_; }

  /// Sum of absolute coordinates (lattice hop distance to the origin).
  int manhattan_norm() const noexcept;

  std::string to_string() const;

  friend auto operator<=>(const NodeIndex&, const NodeIndex&) = default;
  friend bool operator==(const NodeIndex&, const NodeIndex&) = default;

 private:
  std::vector<int> coords_;
};

/// Dimension d, self-loop magnitude p and edge weight s of a lattice.
struct LatticeParams {
  int d = 2;
  double p = 5.0;
  double s = 1.0;

  /// Throws InvalidArgument unless d >= 1, p > 0 and s > 0.
  void validate() const;

  /// p > 2ds: every eigenvalue of the dynamics matrix is negative.
  bool is_hurwitz() const noexcept { return p > 2.0 * d * s; }
};

/// A finite lattice with odd per-axis extents centred on the reference node,
/// truncated at its boundary, plus its driver and target node sets.
class FiniteLatticeSpec {
 public:
  FiniteLatticeSpec(LatticeParams params, std::vector<int> extents,
                    std::vector<NodeIndex> drivers,
                    std::vector<NodeIndex> targets);

  const LatticeParams& params() const noexcept { return params_; }
  const std::vector<int>& extents() const noexcept { return extents_; }
  const std::vector<NodeIndex>& drivers() const noexcept { return drivers_; }
  const std::vector<NodeIndex>& targets() const noexcept { return targets_; }
  std::size_t num_nodes() const noexcept { return num_nodes_; }

  bool contains(const NodeIndex& i) const noexcept;

  /// Every node of the lattice in flat-index order.
  std::vector<NodeIndex> nodes() const;

 private:
  LatticeParams params_;
  std::vector<int> extents_;
  std::vector<NodeIndex> drivers_;
  std::vector<NodeIndex> targets_;
  std::size_t num_nodes_ = 0;
};

/// The 2d nearest neighbours of i on the infinite lattice, ordered
/// +e_1, -e_1, +e_2, -e_2, ...
std::vector<NodeIndex> neighbors(const NodeIndex& i, const LatticeParams& params);

/// Row-major position of i in the finite lattice. Throws RangeError when i is
/// out of bounds.
std::size_t flat_index(const NodeIndex& i, const FiniteLatticeSpec& spec);

/// Inverse of flat_index.
NodeIndex node_at(std::size_t flat, const FiniteLatticeSpec& spec);

struct SystemMatrices {
  Eigen::MatrixXd A;  // n x n, symmetric
  Eigen::MatrixXd B;  // n x m, one unit column per driver
  Eigen::MatrixXd C;  // q x n, one unit row per target
};

SystemMatrices build_system(const FiniteLatticeSpec& spec);

/// True iff rank [CB | CAB | ... | CA^{n-1}B] equals the number of rows of C.
/// The reachable subspace is built as an orthonormal block-Krylov basis so the
/// test never forms large matrix powers.
bool is_output_controllable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            const Eigen::MatrixXd& C, double rank_tol = 1e-10);

}  // namespace latgram
