#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "qmem/error.hpp"

namespace qmem {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Eigenvalues down to -kPsdTolerance are treated as rounding noise and
// clamped; anything more negative is reported as a non-positive input.
inline constexpr double kPsdTolerance = 1e-8;
inline constexpr double kHermitianTolerance = 1e-10;
inline constexpr double kNormTolerance = 1e-12;

/// Pure qudit state. For d = 3 the basis order is (|L>, |G>, |R>), i.e.
/// orbital angular momentum +1, 0, -1.
class StateVector {
 public:
  /// Throws NotNormalized unless the Euclidean norm is 1 within 1e-12.
  explicit StateVector(CVector amplitudes);

  /// Rescales `raw` to unit norm; throws on the zero vector.
  static StateVector normalized(CVector raw);

  int dimension() const noexcept { return static_cast<int>(amps_.size()); }
  const CVector& amplitudes() const noexcept { return amps_; }
  Complex operator[](int k) const { return amps_(k); }

 private:
  CVector amps_;
};

/// Hermitian d x d operator. Trace is not forced to one: channel outputs of
/// lossy maps are legitimately sub-normalized.
class DensityMatrix {
 public:
  explicit DensityMatrix(CMatrix entries);

  int dimension() const noexcept { return static_cast<int>(rho_.rows()); }
  const CMatrix& matrix() const noexcept { return rho_; }
  Complex operator()(int r, int c) const { return rho_(r, c); }
  double trace() const { return rho_.trace().real(); }

 private:
  CMatrix rho_;
};

/// Ordered operator set lambda_1 ... lambda_{d^2} with lambda_1 = identity.
class OperatorBasis {
 public:
  /// Validates the identity-first layout, hermiticity and the
  /// trace-orthogonality table.
  OperatorBasis(int dimension, std::vector<CMatrix> operators);

  int dimension() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ops_.size(); }
  const CMatrix& operator[](std::size_t a) const { return ops_[a]; }
  const std::vector<CMatrix>& operators() const noexcept { return ops_; }

  /// Tr(lambda_a^2): d for the identity, 2 for the others.
  double norm_squared(std::size_t a) const;

 private:
  int dim_;
  std::vector<CMatrix> ops_;
};

/// Hermitian d^2 x d^2 process matrix, indexed by operator-basis indices.
/// Convention: eps(rho) = sum_{m,n} chi(m,n) lambda_m rho lambda_n^dagger.
class ProcessMatrix {
 public:
  explicit ProcessMatrix(CMatrix chi);

  int size() const noexcept { return static_cast<int>(chi_.rows()); }
  const CMatrix& matrix() const noexcept { return chi_; }
  Complex operator()(int m, int n) const { return chi_(m, n); }
  double trace() const { return chi_.trace().real(); }

 private:
  CMatrix chi_;
};

/// Channel in operator-sum form. sum_k K_k^dagger K_k <= I is enforced;
/// strict trace preservation is not (storage is lossy).
class KrausChannel {
 public:
  KrausChannel(int dimension, std::vector<CMatrix> operators);

  int dimension() const noexcept { return dim_; }
  const std::vector<CMatrix>& operators() const noexcept { return ops_; }
  bool is_trace_preserving(double tol = 1e-10) const;

 private:
  int dim_;
  std::vector<CMatrix> ops_;
};

/// Identity followed by the generalized Gell-Mann matrices. Within each
/// column k = 1..d-1 the order is: symmetric and antisymmetric pairs (j,k)
/// for j < k, then the k-th diagonal generator. For d = 3 this reproduces
/// the familiar lambda_1 ... lambda_8 order shifted by one.
OperatorBasis gell_mann_basis(int d);

/// The nine tomography input states for a qutrit, as column vectors.
std::vector<StateVector> canonical_input_states(int d = 3);

enum class Oam { L, G, R };

/// |L>, |G> or |R> as a qutrit basis vector.
StateVector oam_state(Oam label);

/// (|L> + |G> + |R>)/sqrt(3)
StateVector qutrit_psi1();
/// (|L> - |G> + |R>)/sqrt(3)
StateVector qutrit_psi2();

/// Orbital angular momentum carried by basis index k of a d-level OAM qudit
/// (d = 3: +1, 0, -1).
int oam_charge(int d, int k);

DensityMatrix projector_of(const StateVector& psi);

DensityMatrix apply_channel_kraus(const KrausChannel& ch, const DensityMatrix& rho);

ProcessMatrix chi_from_kraus(const KrausChannel& ch, const OperatorBasis& basis);

DensityMatrix apply_channel_chi(const ProcessMatrix& chi, const OperatorBasis& basis,
                                const DensityMatrix& rho);

/// Principal square root of a Hermitian positive semidefinite matrix.
CMatrix matrix_sqrt_psd(const CMatrix& h);

/// Uhlmann fidelity [Tr sqrt(sqrt(a) b sqrt(a))]^2. Inputs are renormalized
/// to unit trace when within 10% of one; otherwise NotNormalized.
double state_fidelity(const DensityMatrix& a, const DensityMatrix& b);

/// Uhlmann fidelity between the trace-normalized process matrices.
double process_fidelity(const ProcessMatrix& chi, const ProcessMatrix& chi_ideal);

// Small helpers shared by the other modules.
CMatrix hermitian_part(const CMatrix& m);
double max_antihermitian(const CMatrix& m);
double min_eigenvalue(const CMatrix& hermitian);

}  // namespace qmem
