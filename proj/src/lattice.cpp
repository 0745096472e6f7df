#include "latgram/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "latgram/error.hpp"

namespace latgram {

int NodeIndex::manhattan_norm() const noexcept {
  int total = 0;
  for (int c : coords_) total += std::abs(c);
  return total;
}

std::string NodeIndex::to_string() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < coords_.size(); ++k) {
    if (k) os << ',';
    os << coords_[k];
  }
  os << ')';
  return os.str();
}

void LatticeParams::validate() const {
  if (d < 1) throw InvalidArgument("lattice dimension must be >= 1");
  if (!(p > 0.0) || !std::isfinite(p))
    throw InvalidArgument("self-loop magnitude p must be positive and finite");
  if (!(s > 0.0) || !std::isfinite(s))
    throw InvalidArgument("edge weight s must be positive and finite");
}

FiniteLatticeSpec::FiniteLatticeSpec(LatticeParams params,
                                     std::vector<int> extents,
                                     std::vector<NodeIndex> drivers,
                                     std::vector<NodeIndex> targets)
    : params_(params),
      extents_(std::move(extents)),
      drivers_(std::move(drivers)),
      targets_(std::move(targets)) {
  params_.validate();
  if (extents_.size() != static_cast<std::size_t>(params_.d))
    throw InvalidArgument("expected " + std::to_string(params_.d) +
                          " extents, got " + std::to_string(extents_.size()));
  num_nodes_ = 1;
  for (int e : extents_) {
    if (e < 1 || e % 2 == 0)
      throw InvalidArgument("extents must be positive odd integers");
    num_nodes_ *= static_cast<std::size_t>(e);
  }
  std::set<NodeIndex> seen;
  for (const auto& a : drivers_) {
    if (a.dim() != extents_.size())
      throw InvalidArgument("driver " + a.to_string() + " has wrong dimension");
    if (!contains(a))
      throw RangeError("driver " + a.to_string() + " lies outside the lattice");
    if (!seen.insert(a).second)
      throw InvalidArgument("duplicate driver " + a.to_string());
  }
  for (const auto& r : targets_) {
    if (r.dim() != extents_.size())
      throw InvalidArgument("target " + r.to_string() + " has wrong dimension");
    if (!contains(r))
      throw RangeError("target " + r.to_string() + " lies outside the lattice");
  }
}

bool FiniteLatticeSpec::contains(const NodeIndex& i) const noexcept {
  if (i.dim() != extents_.size()) return false;
  for (std::size_t k = 0; k < extents_.size(); ++k) {
    const int half = extents_[k] / 2;
    if (i[k] < -half || i[k] > half) return false;
  }
  return true;
}

std::vector<NodeIndex> FiniteLatticeSpec::nodes() const {
  std::vector<NodeIndex> out;
  out.reserve(num_nodes_);
  for (std::size_t f = 0; f < num_nodes_; ++f) out.push_back(node_at(f, *this));
  return out;
}

std::vector<NodeIndex> neighbors(const NodeIndex& i, const LatticeParams& params) {
  if (i.dim() != static_cast<std::size_t>(params.d))
    throw InvalidArgument("node " + i.to_string() + " does not have dimension " +
                          std::to_string(params.d));
  std::vector<NodeIndex> out;
  out.reserve(2 * i.dim());
  for (std::size_t k = 0; k < i.dim(); ++k) {
    NodeIndex up = i, down = i;
    up[k] += 1;
    down[k] -= 1;
    out.push_back(std::move(up));
    out.push_back(std::move(down));
  }
  return out;
}

std::size_t flat_index(const NodeIndex& i, const FiniteLatticeSpec& spec) {
  const auto& ext = spec.extents();
  if (i.dim() != ext.size())
    throw InvalidArgument("node " + i.to_string() + " has wrong dimension");
  if (!spec.contains(i))
    throw RangeError("node " + i.to_string() + " lies outside the lattice");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < ext.size(); ++k)
    flat = flat * static_cast<std::size_t>(ext[k]) +
           static_cast<std::size_t>(i[k] + ext[k] / 2);
  return flat;
}

NodeIndex node_at(std::size_t flat, const FiniteLatticeSpec& spec) {
  if (flat >= spec.num_nodes())
    throw RangeError("flat index " + std::to_string(flat) + " out of range");
  const auto& ext = spec.extents();
  std::vector<int> coords(ext.size());
  for (std::size_t k = ext.size(); k-- > 0;) {
    const auto e = static_cast<std::size_t>(ext[k]);
    coords[k] = static_cast<int>(flat % e) - ext[k] / 2;
    flat /= e;
  }
  return NodeIndex(std::move(coords));
}

SystemMatrices build_system(const FiniteLatticeSpec& spec) {
  if (spec.drivers().empty())
    throw InvalidArgument("at least one driver node is required");
  const auto& prm = spec.params();
  const auto n = static_cast<Eigen::Index>(spec.num_nodes());

  SystemMatrices sys;
  sys.A = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index f = 0; f < n; ++f) {
    sys.A(f, f) = -prm.p;
    for (const auto& nb : neighbors(node_at(static_cast<std::size_t>(f), spec), prm)) {
      if (spec.contains(nb))
        sys.A(f, static_cast<Eigen::Index>(flat_index(nb, spec))) = prm.s;
    }
  }

  const auto m = static_cast<Eigen::Index>(spec.drivers().size());
  sys.B = Eigen::MatrixXd::Zero(n, m);
  for (Eigen::Index c = 0; c < m; ++c)
    sys.B(static_cast<Eigen::Index>(flat_index(spec.drivers()[c], spec)), c) = 1.0;

  const auto q = static_cast<Eigen::Index>(spec.targets().size());
  sys.C = Eigen::MatrixXd::Zero(q, n);
  for (Eigen::Index r = 0; r < q; ++r)
    sys.C(r, static_cast<Eigen::Index>(flat_index(spec.targets()[r], spec))) = 1.0;
  return sys;
}

bool is_output_controllable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            const Eigen::MatrixXd& C, double rank_tol) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || C.cols() != n)
    throw InvalidArgument("inconsistent dimensions in controllability test");
  const Eigen::Index q = C.rows();
  if (q == 0) return true;
  if (B.cols() == 0 || n == 0) return false;

  // Orthonormal basis of span{B, AB, A^2 B, ...} by block Gram-Schmidt.
  // Candidates whose residual falls below drop_tol relative to their original
  // norm are treated as already spanned.
  const double drop_tol = 1e-12;
  std::vector<Eigen::VectorXd> basis;
  std::vector<Eigen::VectorXd> block;
  for (Eigen::Index c = 0; c < B.cols(); ++c) block.emplace_back(B.col(c));

  auto orthonormalize = [&](Eigen::VectorXd v) -> bool {
    const double norm0 = v.norm();
    if (norm0 == 0.0) return false;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : basis) v -= u.dot(v) * u;
    const double norm = v.norm();
    if (norm <= drop_tol * norm0) return false;
    basis.push_back(v / norm);
    return true;
  };

  for (Eigen::Index step = 0; step < n && !block.empty(); ++step) {
    std::vector<Eigen::VectorXd> added;
    for (auto& v : block)
      if (orthonormalize(std::move(v))) added.push_back(basis.back());
    block.clear();
    for (const auto& u : added) block.emplace_back(A * u);
    if (static_cast<Eigen::Index>(basis.size()) == n) break;
  }
  if (basis.empty()) return false;

  Eigen::MatrixXd Q(n, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k)
    Q.col(static_cast<Eigen::Index>(k)) = basis[k];
  const Eigen::MatrixXd CQ = C * Q;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(CQ);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return false;
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > rank_tol * sv(0)) ++rank;
  return rank == q;
}

}  // namespace latgram
