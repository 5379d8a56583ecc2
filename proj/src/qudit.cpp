#include "qmem/qudit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qmem {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidDimension: return "invalid dimension";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::NotNormalized: return "not normalized";
    case ErrorCode::NotHermitian: return "not Hermitian";
    case ErrorCode::NotPositive: return "not positive semidefinite";
    case ErrorCode::ZeroTrace: return "zero trace";
    case ErrorCode::Singular: return "singular system";
    case ErrorCode::DegenerateData: return "degenerate data";
    case ErrorCode::IncompleteData: return "incomplete data";
    case ErrorCode::InvalidConfig: return "invalid configuration";
  }
  return "unknown";
}

namespace {

void require_square(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorCode::DimensionMismatch, os.str());
  }
}

Eigen::SelfAdjointEigenSolver<CMatrix> eigen_of(const CMatrix& m) {
  return Eigen::SelfAdjointEigenSolver<CMatrix>(hermitian_part(m));
}

// Eigenvalues below this fraction of the largest are round-off. Keeping them
// would add sqrt(1e-17) ~ 3e-9 per null direction to the root trace.
constexpr double kRankCut = 1e-13;

// Uhlmann fidelity of two unit-trace PSD matrices, with sqrt(a) restricted
// to the numerical support of a.
double uhlmann(const CMatrix& a, const CMatrix& b) {
  const auto ea = eigen_of(a);
  Eigen::VectorXd ra = ea.eigenvalues();
  const double amax = std::max(ra.maxCoeff(), 0.0);
  for (auto& e : ra) e = e > kRankCut * amax ? std::sqrt(e) : 0.0;
  const CMatrix& v = ea.eigenvectors();
  const CMatrix sa = v * ra.cast<Complex>().asDiagonal() * v.adjoint();
  const Eigen::VectorXd ev = eigen_of(sa * b * sa).eigenvalues();
  const double emax = std::max(ev.maxCoeff(), 0.0);
  double root_trace = 0.0;
  for (double e : ev) {
    if (e > kRankCut * emax) root_trace += std::sqrt(e);
  }
  return std::clamp(root_trace * root_trace, 0.0, 1.0);
}

}  // namespace

CMatrix hermitian_part(const CMatrix& m) { return (m + m.adjoint()) * 0.5; }

double max_antihermitian(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() * 0.5;
}

double min_eigenvalue(const CMatrix& hermitian) {
  return eigen_of(hermitian).eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// value types

StateVector::StateVector(CVector amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.size() < 2) {
    throw Error(ErrorCode::InvalidDimension, "state vector needs dimension >= 2");
  }
  const double n = amps_.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kNormTolerance) {
    std::ostringstream os;
    os << "state vector norm is " << n << ", expected 1";
    throw Error(ErrorCode::NotNormalized, os.str());
  }
}

StateVector StateVector::normalized(CVector raw) {
  const double n = raw.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::NotNormalized, "cannot normalize a zero or non-finite vector");
  }
  raw /= n;
  return StateVector(std::move(raw));
}

DensityMatrix::DensityMatrix(CMatrix entries) : rho_(std::move(entries)) {
  require_square(rho_, "density matrix");
  if (max_antihermitian(rho_) > kHermitianTolerance) {
    throw Error(ErrorCode::NotHermitian, "density matrix is not Hermitian");
  }
}

OperatorBasis::OperatorBasis(int dimension, std::vector<CMatrix> operators)
    : dim_(dimension), ops_(std::move(operators)) {
  if (dim_ < 2) throw Error(ErrorCode::InvalidDimension, "operator basis needs d >= 2");
  const auto n = static_cast<std::size_t>(dim_) * static_cast<std::size_t>(dim_);
  if (ops_.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "operator basis must hold d^2 operators");
  }
  for (const auto& op : ops_) {
    if (op.rows() != dim_ || op.cols() != dim_) {
      throw Error(ErrorCode::DimensionMismatch, "basis operator has the wrong shape");
    }
    if (max_antihermitian(op) > kNormTolerance) {
      throw Error(ErrorCode::NotHermitian, "basis operator is not Hermitian");
    }
  }
  if ((ops_[0] - CMatrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff() > kNormTolerance) {
    throw Error(ErrorCode::InvalidConfig, "first basis operator must be the identity");
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      const Complex t = (ops_[a] * ops_[b]).trace();
      const double want = a != b ? 0.0 : (a == 0 ? dim_ : 2.0);
      if (std::abs(t - want) > 1e-10) {
        throw Error(ErrorCode::InvalidConfig, "basis operators violate trace orthogonality");
      }
    }
  }
}

double OperatorBasis::norm_squared(std::size_t a) const {
  return a == 0 ? static_cast<double>(dim_) : 2.0;
}

ProcessMatrix::ProcessMatrix(CMatrix chi) : chi_(std::move(chi)) {
  require_square(chi_, "process matrix");
  if (max_antihermitian(chi_) > kHermitianTolerance) {
    throw Error(ErrorCode::NotHermitian, "process matrix is not Hermitian");
  }
}

KrausChannel::KrausChannel(int dimension, std::vector<CMatrix> operators)
    : dim_(dimension), ops_(std::move(operators)) {
  if (dim_ < 2) throw Error(ErrorCode::InvalidDimension, "channel needs d >= 2");
  CMatrix sum = CMatrix::Zero(dim_, dim_);
  for (const auto& k : ops_) {
    if (k.rows() != dim_ || k.cols() != dim_) {
      throw Error(ErrorCode::DimensionMismatch, "Kraus operator has the wrong shape");
    }
    sum += k.adjoint() * k;
  }
  if (!ops_.empty() && eigen_of(sum).eigenvalues().maxCoeff() > 1.0 + 1e-10) {
    throw Error(ErrorCode::NotPositive, "Kraus set is trace-increasing");
  }
}

bool KrausChannel::is_trace_preserving(double tol) const {
  CMatrix sum = CMatrix::Zero(dim_, dim_);
  for (const auto& k : ops_) sum += k.adjoint() * k;
  return (sum - CMatrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------
// bases and named states

OperatorBasis gell_mann_basis(int d) {
  if (d < 2) throw Error(ErrorCode::InvalidDimension, "gell_mann_basis: d must be >= 2");
  const Complex i{0.0, 1.0};
  std::vector<CMatrix> ops;
  ops.reserve(static_cast<std::size_t>(d * d));
  ops.push_back(CMatrix::Identity(d, d));
  for (int k = 1; k < d; ++k) {
    for (int j = 0; j < k; ++j) {
      CMatrix sym = CMatrix::Zero(d, d);
      sym(j, k) = 1.0;
      sym(k, j) = 1.0;
      ops.push_back(std::move(sym));

      CMatrix anti = CMatrix::Zero(d, d);
      anti(j, k) = -i;
      anti(k, j) = i;
      ops.push_back(std::move(anti));
    }
    CMatrix diag = CMatrix::Zero(d, d);
    const double scale = std::sqrt(2.0 / (k * (k + 1.0)));
    for (int j = 0; j < k; ++j) diag(j, j) = scale;
    diag(k, k) = -k * scale;
    ops.push_back(std::move(diag));
  }
  return OperatorBasis(d, std::move(ops));
}

std::vector<StateVector> canonical_input_states(int d) {
  if (d != 3) {
    throw Error(ErrorCode::InvalidDimension, "canonical input states are defined for d = 3 only");
  }
  const Complex i{0.0, 1.0};
  const double h = 1.0 / std::sqrt(2.0);
  auto vec = [](Complex a, Complex b, Complex c) {
    CVector v(3);
    v << a, b, c;
    return v;
  };
  std::vector<StateVector> states;
  states.reserve(9);
  states.emplace_back(vec(1, 0, 0));
  states.emplace_back(vec(0, 1, 0));
  states.emplace_back(vec(0, 0, 1));
  states.emplace_back(vec(h, h, 0));
  states.emplace_back(vec(0, h, h));
  states.emplace_back(vec(i * h, h, 0));
  states.emplace_back(vec(0, h, i * h));
  states.emplace_back(vec(h, 0, h));
  states.emplace_back(vec(h, 0, i * h));
  return states;
}

StateVector oam_state(Oam label) {
  CVector v = CVector::Zero(3);
  v(static_cast<int>(label)) = 1.0;
  return StateVector(std::move(v));
}

StateVector qutrit_psi1() {
  CVector v(3);
  v << 1.0, 1.0, 1.0;
  return StateVector::normalized(std::move(v));
}

StateVector qutrit_psi2() {
  CVector v(3);
  v << 1.0, -1.0, 1.0;
  return StateVector::normalized(std::move(v));
}

int oam_charge(int d, int k) {
  if (d != 3 || k < 0 || k >= d) {
    throw Error(ErrorCode::InvalidDimension, "OAM labels are defined for qutrits only");
  }
  return 1 - k;
}

// ---------------------------------------------------------------------------
// channels

DensityMatrix projector_of(const StateVector& psi) {
  const CVector& v = psi.amplitudes();
  return DensityMatrix(v * v.adjoint());
}

DensityMatrix apply_channel_kraus(const KrausChannel& ch, const DensityMatrix& rho) {
  if (ch.dimension() != rho.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "channel and state dimensions differ");
  }
  CMatrix out = CMatrix::Zero(rho.dimension(), rho.dimension());
  for (const auto& k : ch.operators()) out += k * rho.matrix() * k.adjoint();
  return DensityMatrix(hermitian_part(out));
}

ProcessMatrix chi_from_kraus(const KrausChannel& ch, const OperatorBasis& basis) {
  if (ch.dimension() != basis.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "channel and basis dimensions differ");
  }
  const auto nb = static_cast<int>(basis.size());
  const auto nk = static_cast<int>(ch.operators().size());
  // a(k, m) = Tr(lambda_m K_k) / Tr(lambda_m^2)
  CMatrix a = CMatrix::Zero(nk, nb);
  for (int k = 0; k < nk; ++k) {
    for (int m = 0; m < nb; ++m) {
      a(k, m) = (basis[m] * ch.operators()[k]).trace() / basis.norm_squared(m);
    }
  }
  // chi(m, n) = sum_k a(k, m) conj(a(k, n))
  CMatrix chi = a.transpose() * a.conjugate();
  return ProcessMatrix(hermitian_part(chi));
}

DensityMatrix apply_channel_chi(const ProcessMatrix& chi, const OperatorBasis& basis,
                                const DensityMatrix& rho) {
  const auto nb = static_cast<int>(basis.size());
  if (chi.size() != nb || rho.dimension() != basis.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "process matrix, basis and state disagree");
  }
  const int d = basis.dimension();
  std::vector<CMatrix> left(nb);
  for (int m = 0; m < nb; ++m) left[m] = basis[m] * rho.matrix();
  CMatrix out = CMatrix::Zero(d, d);
  for (int m = 0; m < nb; ++m) {
    for (int n = 0; n < nb; ++n) {
      const Complex c = chi(m, n);
      if (c == Complex{}) continue;
      out += c * left[m] * basis[n].adjoint();
    }
  }
  return DensityMatrix(hermitian_part(out));
}

// ---------------------------------------------------------------------------
// square root and fidelities

CMatrix matrix_sqrt_psd(const CMatrix& h) {
  require_square(h, "matrix_sqrt_psd");
  if (max_antihermitian(h) > kPsdTolerance) {
    throw Error(ErrorCode::NotHermitian, "matrix_sqrt_psd: input is not Hermitian");
  }
  const auto es = eigen_of(h);
  Eigen::VectorXd ev = es.eigenvalues();
  if (ev.minCoeff() < -kPsdTolerance) {
    std::ostringstream os;
    os << "matrix_sqrt_psd: eigenvalue " << ev.minCoeff() << " below tolerance";
    throw Error(ErrorCode::NotPositive, os.str());
  }
  for (auto& e : ev) e = std::sqrt(std::max(e, 0.0));
  const CMatrix& v = es.eigenvectors();
  return v * ev.cast<Complex>().asDiagonal() * v.adjoint();
}

double state_fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dimension() != b.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "state_fidelity: dimensions differ");
  }
  auto unit = [](const DensityMatrix& r) {
    const double t = r.trace();
    if (std::abs(t - 1.0) > 0.1) {
      std::ostringstream os;
      os << "state_fidelity: trace " << t << " is too far from 1 to renormalize";
      throw Error(ErrorCode::NotNormalized, os.str());
    }
    return CMatrix(r.matrix() / t);
  };
  const CMatrix ua = unit(a);
  const CMatrix ub = unit(b);
  if (min_eigenvalue(ub) < -kPsdTolerance) {
    throw Error(ErrorCode::NotPositive, "state_fidelity: second argument is not PSD");
  }
  return uhlmann(ua, ub);
}

double process_fidelity(const ProcessMatrix& chi, const ProcessMatrix& chi_ideal) {
  if (chi.size() != chi_ideal.size()) {
    throw Error(ErrorCode::DimensionMismatch, "process_fidelity: sizes differ");
  }
  auto unit = [](const ProcessMatrix& p) {
    const double t = p.trace();
    if (!(std::abs(t) > 1e-14)) {
      throw Error(ErrorCode::ZeroTrace, "process_fidelity: process matrix has zero trace");
    }
    return CMatrix(p.matrix() / t);
  };
  const CMatrix a = unit(chi);
  const CMatrix b = unit(chi_ideal);
  if (min_eigenvalue(b) < -kPsdTolerance) {
    throw Error(ErrorCode::NotPositive, "process_fidelity: reference is not PSD");
  }
  return uhlmann(a, b);
}

}  // namespace qmem
