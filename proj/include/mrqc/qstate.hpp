#pragma once
// Dense complex linear algebra for small composite Hilbert spaces.
//
// Conventions used everywhere in the library:
//   * subsystem 0 of a layout is the transmon, the remaining factors are
//     phonon modes (or logical qubits in tomography);
//   * Kronecker order puts factor 0 in the most significant position;
//   * vectorization is column stacking, rho(i, j) == vec[d * j + i], so
//     vec(A X B) == (B^T kron A) vec(X).

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mrqc/errors.hpp"

namespace mrqc {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr cplx kI{0.0, 1.0};

class SpaceLayout {
 public:
  SpaceLayout() = default;
  explicit SpaceLayout(std::vector<int> factors) : factors_(std::move(factors)) {
    for (int f : factors_) {
      if (f < 1) throw DimensionError("SpaceLayout: factor dimension must be >= 1");
    }
    total_ = std::accumulate(factors_.begin(), factors_.end(), 1,
                             [](int a, int b) { return a * b; });
  }

  const std::vector<int>& factors() const { return factors_; }
  int factor(int i) const { return factors_.at(static_cast<size_t>(i)); }
  int num_factors() const { return static_cast<int>(factors_.size()); }
  int total_dim() const { return total_; }

  SpaceLayout concat(const SpaceLayout& other) const {
    std::vector<int> f = factors_;
    f.insert(f.end(), other.factors_.begin(), other.factors_.end());
    return SpaceLayout(std::move(f));
  }

  SpaceLayout subset(std::span<const int> keep) const {
    std::vector<int> f;
    for (int k : keep) f.push_back(factor(k));
    return SpaceLayout(std::move(f));
  }

  /// Stride of factor i in a flat index (factor 0 most significant).
  int stride(int i) const {
    int s = 1;
    for (int k = num_factors() - 1; k > i; --k) s *= factors_[static_cast<size_t>(k)];
    return s;
  }

  bool operator==(const SpaceLayout&) const = default;

 private:
  std::vector<int> factors_;
  int total_ = 1;
};

struct OperatorMatrix {
  SpaceLayout layout;
  CMatrix entries;

  OperatorMatrix() = default;
  OperatorMatrix(SpaceLayout l, CMatrix m) : layout(std::move(l)), entries(std::move(m)) {
    if (entries.rows() != layout.total_dim() || entries.cols() != layout.total_dim())
      throw DimensionError("OperatorMatrix: entries do not match layout dimension");
  }
  int dim() const { return layout.total_dim(); }
};

inline double hermiticity_error(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

struct DensityMatrix {
  SpaceLayout layout;
  CMatrix entries;

  DensityMatrix() = default;
  DensityMatrix(SpaceLayout l, CMatrix m) : layout(std::move(l)), entries(std::move(m)) {
    if (entries.rows() != layout.total_dim() || entries.cols() != layout.total_dim())
      throw DimensionError("DensityMatrix: entries do not match layout dimension");
  }

  static DensityMatrix from_pure(const SpaceLayout& l, const CVector& psi) {
    if (psi.size() != l.total_dim()) throw DimensionError("from_pure: state length mismatch");
    return DensityMatrix(l, psi * psi.adjoint());
  }
  static DensityMatrix basis(const SpaceLayout& l, int index) {
    CVector psi = CVector::Zero(l.total_dim());
    psi(index) = 1.0;
    return from_pure(l, psi);
  }

  int dim() const { return layout.total_dim(); }
  cplx trace() const { return entries.trace(); }
  double population(int index) const { return entries(index, index).real(); }

  /// Checks Hermiticity (1e-10), unit trace (1e-10) and eigenvalues >= -1e-9.
  bool is_physical(double herm_tol = 1e-10, double trace_tol = 1e-10, double eig_tol = 1e-9) const {
    if (hermiticity_error(entries) > herm_tol) return false;
    if (std::abs(entries.trace() - cplx(1.0)) > trace_tol) return false;
    CMatrix h = 0.5 * (entries + entries.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -eig_tol;
  }
};

struct SuperOperator {
  int dim = 0;  // underlying Hilbert-space dimension d
  CMatrix entries;  // d^2 x d^2, acts on column-stacked density matrices

  SuperOperator() = default;
  SuperOperator(int d, CMatrix m) : dim(d), entries(std::move(m)) {
    if (entries.rows() != d * d || entries.cols() != d * d)
      throw DimensionError("SuperOperator: entries must be d^2 x d^2");
  }
  static SuperOperator identity(int d) { return SuperOperator(d, CMatrix::Identity(d * d, d * d)); }
};

// ---------------------------------------------------------------------------
// Elementary matrices

namespace ops {

inline CMatrix identity(int d) { return CMatrix::Identity(d, d); }

inline CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline CMatrix pauli_y() {
  CMatrix m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}
inline CMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
/// Pauli operator by index: 0 = I, 1 = X, 2 = Y, 3 = Z.
inline CMatrix pauli(int k) {
  switch (k) {
    case 0: return identity(2);
    case 1: return pauli_x();
    case 2: return pauli_y();
    case 3: return pauli_z();
    default: throw DomainError("pauli: index must be 0..3");
  }
}

/// Truncated annihilation operator on levels 0..d-1. For d = 2 this is the
/// qubit lowering operator |g><e| with |g> = index 0.
inline CMatrix annihilation(int d) {
  CMatrix a = CMatrix::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}
inline CMatrix number(int d) {
  CMatrix n = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

/// exp(-i angle/2 n.sigma) for a unit axis n.
inline CMatrix rotation(const std::array<double, 3>& axis, double angle) {
  const double norm = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  if (norm == 0.0) throw DomainError("rotation: zero axis");
  const double nx = axis[0] / norm, ny = axis[1] / norm, nz = axis[2] / norm;
  const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
  CMatrix u(2, 2);
  u << cplx(c, -s * nz), cplx(-s * ny, -s * nx), cplx(s * ny, -s * nx), cplx(c, s * nz);
  return u;
}

}  // namespace ops

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

inline CMatrix kron_all(const std::vector<CMatrix>& ms) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (const auto& m : ms) out = kron(out, m);
  return out;
}

/// Operator acting as `op` on factor `index` of `layout`, identity elsewhere.
inline CMatrix embed(const SpaceLayout& layout, int index, const CMatrix& op) {
  if (index < 0 || index >= layout.num_factors()) throw DimensionError("embed: factor index out of range");
  if (op.rows() != layout.factor(index)) throw DimensionError("embed: operator does not match factor");
  const int left = layout.total_dim() / (layout.factor(index) * layout.stride(index));
  const int right = layout.stride(index);
  return kron(kron(ops::identity(left), op), ops::identity(right));
}

inline OperatorMatrix tensor_product(const OperatorMatrix& a, const OperatorMatrix& b) {
  return OperatorMatrix(a.layout.concat(b.layout), kron(a.entries, b.entries));
}

// ---------------------------------------------------------------------------
// Index bookkeeping

namespace detail {

/// Flat indices of a full layout, split into a (kept) part and a rest part:
/// result[a * rest_dim + r] is the full index for kept multi-index a and
/// rest multi-index r. Both sub-indices use the ascending factor order.
inline std::vector<int> split_index_map(const SpaceLayout& layout, const std::vector<int>& kept) {
  std::vector<int> rest;
  for (int i = 0; i < layout.num_factors(); ++i) {
    if (std::find(kept.begin(), kept.end(), i) == kept.end()) rest.push_back(i);
  }
  auto sub_dim = [&](const std::vector<int>& idx) {
    int d = 1;
    for (int i : idx) d *= layout.factor(i);
    return d;
  };
  const int dk = sub_dim(kept), dr = sub_dim(rest);
  std::vector<int> map(static_cast<size_t>(dk * dr));
  for (int a = 0; a < dk; ++a) {
    for (int r = 0; r < dr; ++r) {
      int full = 0, rem = a;
      for (int k = static_cast<int>(kept.size()) - 1; k >= 0; --k) {
        const int f = kept[static_cast<size_t>(k)];
        full += (rem % layout.factor(f)) * layout.stride(f);
        rem /= layout.factor(f);
      }
      rem = r;
      for (int k = static_cast<int>(rest.size()) - 1; k >= 0; --k) {
        const int f = rest[static_cast<size_t>(k)];
        full += (rem % layout.factor(f)) * layout.stride(f);
        rem /= layout.factor(f);
      }
      map[static_cast<size_t>(a * dr + r)] = full;
    }
  }
  return map;
}

inline void check_subset(const SpaceLayout& layout, const std::vector<int>& keep) {
  if (keep.empty()) throw DimensionError("subsystem set must be nonempty");
  for (size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] < 0 || keep[i] >= layout.num_factors())
      throw DimensionError("subsystem index out of range");
    for (size_t j = 0; j < i; ++j)
      if (keep[i] == keep[j]) throw DimensionError("duplicate subsystem index");
  }
}

}  // namespace detail

/// Reduced operator over `keep` (kept factors appear in the order given).
inline CMatrix partial_trace(const CMatrix& m, const SpaceLayout& layout, std::vector<int> keep) {
  detail::check_subset(layout, keep);
  const auto map = detail::split_index_map(layout, keep);
  int dk = 1;
  for (int k : keep) dk *= layout.factor(k);
  const int dr = layout.total_dim() / dk;
  CMatrix out = CMatrix::Zero(dk, dk);
  for (int a = 0; a < dk; ++a)
    for (int b = 0; b < dk; ++b) {
      cplx acc = 0.0;
      for (int r = 0; r < dr; ++r) acc += m(map[a * dr + r], map[b * dr + r]);
      out(a, b) = acc;
    }
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  return DensityMatrix(rho.layout.subset(keep), partial_trace(rho.entries, rho.layout, keep));
}

/// Reorders factors: factor i of the result is factor perm[i] of the input.
inline CMatrix permute_subsystems(const CMatrix& m, const SpaceLayout& layout, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != layout.num_factors()) throw DimensionError("permute: bad permutation");
  detail::check_subset(layout, perm);
  const auto map = detail::split_index_map(layout, perm);  // rest is empty
  const int d = layout.total_dim();
  CMatrix out(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) out(a, b) = m(map[a], map[b]);
  return out;
}

// ---------------------------------------------------------------------------
// Vectorization and superoperators

inline CVector vectorize(const CMatrix& m) {
  return Eigen::Map<const CVector>(m.data(), m.size());  // Eigen storage is column-major
}
inline CVector vectorize(const DensityMatrix& rho) { return vectorize(rho.entries); }

inline CMatrix devectorize(const CVector& v) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  if (d * d != v.size()) throw DimensionError("devectorize: length is not a perfect square");
  return Eigen::Map<const CMatrix>(v.data(), d, d);
}

/// Superoperator of rho -> U rho U^dagger under column stacking (U* kron U).
inline SuperOperator superop_from_unitary(const CMatrix& u) {
  return SuperOperator(static_cast<int>(u.rows()), kron(u.conjugate(), u));
}

/// Superoperator of rho -> sum_k K rho K^dagger.
inline SuperOperator superop_from_kraus(const std::vector<CMatrix>& kraus) {
  if (kraus.empty()) throw DimensionError("superop_from_kraus: empty Kraus set");
  const auto d = static_cast<int>(kraus.front().rows());
  CMatrix s = CMatrix::Zero(d * d, d * d);
  for (const auto& k : kraus) s += kron(k.conjugate(), k);
  return SuperOperator(d, std::move(s));
}

inline CMatrix apply_superop(const SuperOperator& e, const CMatrix& rho) {
  if (rho.rows() != e.dim || rho.cols() != e.dim) throw DimensionError("apply_superop: dimension mismatch");
  return devectorize(e.entries * vectorize(rho));
}

inline DensityMatrix apply_superop(const SuperOperator& e, const DensityMatrix& rho) {
  return DensityMatrix(rho.layout, apply_superop(e, rho.entries));
}

/// Checks that Hermitian probes map to Hermitian outputs (1e-8).
inline bool preserves_hermiticity(const SuperOperator& e, double tol = 1e-8) {
  const int d = e.dim;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      CMatrix re = CMatrix::Zero(d, d), im = CMatrix::Zero(d, d);
      re(i, j) = re(j, i) = 1.0;
      im(i, j) = -kI;
      im(j, i) = kI;
      if (i == j) im.setZero();
      if (hermiticity_error(apply_superop(e, re)) > tol) return false;
      if (hermiticity_error(apply_superop(e, im)) > tol) return false;
    }
  return true;
}

/// Applies a superoperator acting on the listed factors (column-stacked over
/// their reduced space, factors in the listed order) to a full matrix.
class LocalSuperopApplier {
 public:
  LocalSuperopApplier(const SpaceLayout& layout, std::vector<int> factors)
      : factors_(std::move(factors)) {
    detail::check_subset(layout, factors_);
    map_ = detail::split_index_map(layout, factors_);
    da_ = 1;
    for (int f : factors_) da_ *= layout.factor(f);
    db_ = layout.total_dim() / da_;
  }

  int local_dim() const { return da_; }

  void apply(const CMatrix& superop, CMatrix& rho) const {
    const int da2 = da_ * da_, db2 = db_ * db_;
    if (superop.rows() != da2 || superop.cols() != da2) throw DimensionError("local superop: dimension mismatch");
    CMatrix x(da2, db2);
    for (int cb = 0; cb < db_; ++cb)
      for (int rb = 0; rb < db_; ++rb)
        for (int ca = 0; ca < da_; ++ca)
          for (int ra = 0; ra < da_; ++ra)
            x(da_ * ca + ra, db_ * cb + rb) = rho(map_[ra * db_ + rb], map_[ca * db_ + cb]);
    const CMatrix y = superop * x;
    for (int cb = 0; cb < db_; ++cb)
      for (int rb = 0; rb < db_; ++rb)
        for (int ca = 0; ca < da_; ++ca)
          for (int ra = 0; ra < da_; ++ra)
            rho(map_[ra * db_ + rb], map_[ca * db_ + cb]) = y(da_ * ca + ra, db_ * cb + rb);
  }

  /// U rho U^dagger with U acting on the listed factors.
  void apply_unitary(const CMatrix& u, CMatrix& rho) const {
    if (u.rows() != da_) throw DimensionError("local unitary: dimension mismatch");
    const int d = da_ * db_;
    CMatrix full = CMatrix::Zero(d, d);
    for (int a = 0; a < da_; ++a)
      for (int b = 0; b < da_; ++b) {
        if (u(a, b) == cplx(0.0)) continue;
        for (int r = 0; r < db_; ++r) full(map_[a * db_ + r], map_[b * db_ + r]) = u(a, b);
      }
    rho = full * rho * full.adjoint();
  }

 private:
  std::vector<int> factors_;
  std::vector<int> map_;
  int da_ = 1, db_ = 1;
};

/// exp(-i H t) for Hermitian H via eigendecomposition.
inline CMatrix unitary_propagator(const CMatrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()));
  const Eigen::VectorXd& ev = es.eigenvalues();
  CVector phases(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) phases(i) = std::exp(-kI * ev(i) * t);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace mrqc
