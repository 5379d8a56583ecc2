#include "qmem/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <utility>

#include "qmem/photon_stats.hpp"

namespace qmem {

namespace {

constexpr double kRankTolerance = 1e-10;

std::vector<DensityMatrix> projectors_of(const std::vector<StateVector>& states) {
  std::vector<DensityMatrix> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(projector_of(s));
  return out;
}

double expectation(const StateVector& psi, const CMatrix& m) {
  const CVector& v = psi.amplitudes();
  return (v.adjoint() * m * v)(0, 0).real();
}

// Per-input normalization by the counts of the first d (orthonormal-basis)
// projectors.
Eigen::VectorXd normalize_row(const Eigen::VectorXd& corrected, int d, int input) {
  const double norm = corrected.head(d).sum();
  if (!(norm > 0.0)) {
    std::ostringstream os;
    os << "input " << input << ": basis-projector counts sum to zero after background subtraction";
    throw Error(ErrorCode::DegenerateData, os.str());
  }
  return corrected / norm;
}

// Counts keyed by (input, meas), 1-based; rejects duplicates and
// out-of-range indices.
std::map<std::pair<int, int>, double> corrected_by_setting(std::span<const CountRecord> records,
                                                           int n_settings) {
  std::map<std::pair<int, int>, double> by;
  for (const auto& c : stats::subtract_background(records)) {
    if (c.input_index < 1 || c.input_index > n_settings || c.meas_index < 1 ||
        c.meas_index > n_settings) {
      std::ostringstream os;
      os << "count record (" << c.input_index << ", " << c.meas_index << ") out of range";
      throw Error(ErrorCode::IncompleteData, os.str());
    }
    if (!by.emplace(std::pair{c.input_index, c.meas_index}, c.counts).second) {
      std::ostringstream os;
      os << "duplicate count record (" << c.input_index << ", " << c.meas_index << ")";
      throw Error(ErrorCode::IncompleteData, os.str());
    }
  }
  return by;
}

Eigen::JacobiSVD<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& a, double& condition,
                                            const char* who) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double smax = s.maxCoeff();
  const double smin = s.minCoeff();
  if (!(smax > 0.0) || smin / smax < kRankTolerance || a.rows() < a.cols()) {
    throw Error(ErrorCode::Singular, std::string(who) + ": design matrix is rank deficient");
  }
  condition = smax / smin;
  return svd;
}

CMatrix clamp_spectrum(const CMatrix& m, double& clamped_trace) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m));
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  clamped_trace = ev.sum();
  const CMatrix& v = es.eigenvectors();
  return hermitian_part(v * ev.cast<Complex>().asDiagonal() * v.adjoint());
}

BootstrapSummary summarize(const std::vector<double>& values) {
  if (values.empty()) {
    throw Error(ErrorCode::DegenerateData, "bootstrap: every resample was degenerate");
  }
  BootstrapSummary s;
  s.samples = static_cast<int>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / values.size();
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.stddev = values.size() > 1 ? std::sqrt(var / (values.size() - 1)) : 0.0;
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

MeasurementSettings::MeasurementSettings(std::vector<StateVector> inputs,
                                         std::vector<StateVector> measurements,
                                         OperatorBasis basis)
    : inputs_(std::move(inputs)),
      meas_(std::move(measurements)),
      projectors_(projectors_of(meas_)),
      basis_(std::move(basis)) {
  const int d = basis_.dimension();
  const auto n = static_cast<std::size_t>(d * d);
  if (inputs_.size() != n || meas_.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "settings need d^2 inputs and d^2 measurements");
  }
  for (const auto& s : inputs_) {
    if (s.dimension() != d) throw Error(ErrorCode::DimensionMismatch, "input state dimension");
  }
  for (const auto& s : meas_) {
    if (s.dimension() != d) throw Error(ErrorCode::DimensionMismatch, "measurement dimension");
  }
  CMatrix sum = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) sum += projectors_[k].matrix();
  if ((sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > kNormTolerance) {
    throw Error(ErrorCode::InvalidConfig,
                "the first d measurement projectors must resolve the identity");
  }
  // Informational completeness: vectorized projectors must span d^2 real
  // dimensions.
  Eigen::MatrixXd vec(2 * d * d, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const CMatrix& p = projectors_[i].matrix();
    for (int k = 0; k < d * d; ++k) {
      vec(k, static_cast<Eigen::Index>(i)) = p(k / d, k % d).real();
      vec(d * d + k, static_cast<Eigen::Index>(i)) = p(k / d, k % d).imag();
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(vec);
  lu.setThreshold(1e-10);
  if (lu.rank() != static_cast<Eigen::Index>(n)) {
    throw Error(ErrorCode::Singular, "measurement projectors are not informationally complete");
  }
}

MeasurementSettings MeasurementSettings::canonical() {
  auto states = canonical_input_states(3);
  auto meas = states;
  return MeasurementSettings(std::move(states), std::move(meas), gell_mann_basis(3));
}

// ---------------------------------------------------------------------------
// forward model

Eigen::VectorXd predict_state_probabilities(const DensityMatrix& rho,
                                            const MeasurementSettings& settings) {
  if (rho.dimension() != settings.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "state and settings dimensions differ");
  }
  const auto& meas = settings.measurement_states();
  Eigen::VectorXd p(static_cast<Eigen::Index>(meas.size()));
  for (std::size_t i = 0; i < meas.size(); ++i) {
    p(static_cast<Eigen::Index>(i)) = expectation(meas[i], rho.matrix());
  }
  return p;
}

namespace {

template <class ApplyFn>
ProbabilityTable predict_with(const MeasurementSettings& settings, ApplyFn&& apply) {
  const auto& inputs = settings.inputs();
  const auto n_in = static_cast<Eigen::Index>(inputs.size());
  const auto n_meas = static_cast<Eigen::Index>(settings.measurement_states().size());
  Eigen::MatrixXd p(n_in, n_meas);
  for (Eigen::Index j = 0; j < n_in; ++j) {
    const DensityMatrix out = apply(projector_of(inputs[j]));
    p.row(j) = predict_state_probabilities(out, settings).transpose();
  }
  return ProbabilityTable(std::move(p));
}

}  // namespace

ProbabilityTable predict_probabilities(const KrausChannel& channel,
                                       const MeasurementSettings& settings) {
  if (channel.dimension() != settings.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "channel and settings dimensions differ");
  }
  return predict_with(settings,
                      [&](const DensityMatrix& rho) { return apply_channel_kraus(channel, rho); });
}

ProbabilityTable predict_probabilities(const ProcessMatrix& chi,
                                       const MeasurementSettings& settings) {
  return predict_with(settings, [&](const DensityMatrix& rho) {
    return apply_channel_chi(chi, settings.basis(), rho);
  });
}

// ---------------------------------------------------------------------------
// counts -> probabilities

ProbabilityTable probabilities_from_counts(std::span<const CountRecord> records, int d) {
  if (d < 2) throw Error(ErrorCode::InvalidDimension, "probabilities_from_counts: d < 2");
  const int n = d * d;
  const auto by = corrected_by_setting(records, n);
  if (static_cast<int>(by.size()) != n * n) {
    std::ostringstream os;
    os << "process counts need " << n * n << " settings, got " << by.size();
    throw Error(ErrorCode::IncompleteData, os.str());
  }
  Eigen::MatrixXd p(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd row(n);
    for (int i = 0; i < n; ++i) row(i) = by.at({j + 1, i + 1});
    p.row(j) = normalize_row(row, d, j + 1).transpose();
  }
  return ProbabilityTable(std::move(p));
}

Eigen::VectorXd state_probabilities_from_counts(std::span<const CountRecord> records, int d) {
  if (d < 2) throw Error(ErrorCode::InvalidDimension, "state_probabilities_from_counts: d < 2");
  const int n = d * d;
  const auto by = corrected_by_setting(records, n);
  if (static_cast<int>(by.size()) != n) {
    std::ostringstream os;
    os << "state counts need " << n << " settings, got " << by.size();
    throw Error(ErrorCode::IncompleteData, os.str());
  }
  const int input = by.begin()->first.first;
  Eigen::VectorXd row(n);
  for (int i = 0; i < n; ++i) {
    auto it = by.find({input, i + 1});
    if (it == by.end()) {
      throw Error(ErrorCode::IncompleteData, "state counts must share one input index");
    }
    row(i) = it->second;
  }
  return normalize_row(row, d, input);
}

// ---------------------------------------------------------------------------
// state tomography

DensityMatrix qst_linear_inversion(const Eigen::VectorXd& p, const MeasurementSettings& settings) {
  const auto& basis = settings.basis();
  const auto& meas = settings.measurement_states();
  const auto n = static_cast<Eigen::Index>(basis.size());
  if (p.size() != static_cast<Eigen::Index>(meas.size())) {
    throw Error(ErrorCode::DimensionMismatch, "qst_linear_inversion: wrong number of probabilities");
  }
  // rho = sum_a x_a lambda_a; Tr(mu_i lambda_a) is real for Hermitian pairs.
  Eigen::MatrixXd a(p.size(), n);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      a(i, k) = expectation(meas[static_cast<std::size_t>(i)], basis[static_cast<std::size_t>(k)]);
    }
  }
  double condition = 0.0;
  const auto svd = factorize(a, condition, "qst_linear_inversion");
  const Eigen::VectorXd x = svd.solve(p);
  const int d = basis.dimension();
  CMatrix rho = CMatrix::Zero(d, d);
  for (Eigen::Index k = 0; k < n; ++k) rho += x(k) * basis[static_cast<std::size_t>(k)];
  return DensityMatrix(hermitian_part(rho));
}

DensityMatrix project_to_physical_state(const CMatrix& rho) {
  double tr = 0.0;
  const CMatrix clamped = clamp_spectrum(rho, tr);
  if (!(tr > 0.0)) {
    throw Error(ErrorCode::NotPositive, "project_to_physical_state: no positive eigenvalue");
  }
  return DensityMatrix(clamped / tr);
}

// ---------------------------------------------------------------------------
// process tomography

ProcessTomography::ProcessTomography(MeasurementSettings settings)
    : settings_(std::move(settings)) {
  const auto& basis = settings_.basis();
  const auto& inputs = settings_.inputs();
  const auto& meas = settings_.measurement_states();
  const int nb = static_cast<int>(basis.size());
  const int n_in = static_cast<int>(inputs.size());
  const int n_meas = static_cast<int>(meas.size());

  // Real parameters of a Hermitian chi: the nb diagonal entries, then
  // (Re, Im) of every upper-triangular entry.
  design_ = Eigen::MatrixXd::Zero(n_in * n_meas, nb * nb);
  for (int j = 0; j < n_in; ++j) {
    const CMatrix rho = projector_of(inputs[j]).matrix();
    for (int m = 0; m < nb; ++m) {
      const CMatrix left = basis[m] * rho;
      for (int n = m; n < nb; ++n) {
        const CMatrix term = left * basis[n].adjoint();
        for (int i = 0; i < n_meas; ++i) {
          const CVector& v = meas[i].amplitudes();
          const Complex b = (v.adjoint() * term * v)(0, 0);
          const int row = j * n_meas + i;
          if (m == n) {
            design_(row, m) = b.real();
          } else {
            const int pair = nb + 2 * (m * nb - m * (m + 1) / 2 + (n - m - 1));
            design_(row, pair) = 2.0 * b.real();
            design_(row, pair + 1) = -2.0 * b.imag();
          }
        }
      }
    }
  }
  svd_ = factorize(design_, condition_, "qpt_linear_inversion");
}

ProcessMatrix ProcessTomography::invert(const ProbabilityTable& table) const {
  const auto& inputs = settings_.inputs();
  const auto& meas = settings_.measurement_states();
  if (table.inputs() != static_cast<int>(inputs.size()) ||
      table.measurements() != static_cast<int>(meas.size())) {
    throw Error(ErrorCode::IncompleteData, "qpt_linear_inversion: table has the wrong shape");
  }
  const int n_meas = table.measurements();
  Eigen::VectorXd rhs(table.inputs() * n_meas);
  for (int j = 0; j < table.inputs(); ++j) {
    for (int i = 0; i < n_meas; ++i) rhs(j * n_meas + i) = table(j, i);
  }
  const Eigen::VectorXd x = svd_.solve(rhs);

  const int nb = static_cast<int>(settings_.basis().size());
  CMatrix chi = CMatrix::Zero(nb, nb);
  for (int m = 0; m < nb; ++m) chi(m, m) = x(m);
  for (int m = 0; m < nb; ++m) {
    for (int n = m + 1; n < nb; ++n) {
      const int pair = nb + 2 * (m * nb - m * (m + 1) / 2 + (n - m - 1));
      chi(m, n) = Complex(x(pair), x(pair + 1));
      chi(n, m) = std::conj(chi(m, n));
    }
  }
  return ProcessMatrix(hermitian_part(chi));
}

ProcessMatrix qpt_linear_inversion(const ProbabilityTable& table,
                                   const MeasurementSettings& settings) {
  return ProcessTomography(settings).invert(table);
}

ProcessMatrix project_to_physical_process(const CMatrix& chi) {
  const double original = hermitian_part(chi).trace().real();
  double clamped_tr = 0.0;
  const CMatrix clamped = clamp_spectrum(chi, clamped_tr);
  if (!(clamped_tr > 0.0) || !(original > 0.0)) {
    throw Error(ErrorCode::ZeroTrace, "project_to_physical_process: zero trace after clamping");
  }
  return ProcessMatrix(clamped * (original / clamped_tr));
}

ProcessMatrix ideal_storage_chi(const OperatorBasis& basis) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  CMatrix chi = CMatrix::Zero(n, n);
  chi(0, 0) = 1.0;
  return ProcessMatrix(std::move(chi));
}

// ---------------------------------------------------------------------------
// full reconstructions

ProcessReconstruction reconstruct_process(std::span<const CountRecord> records,
                                          const ProcessTomography& qpt) {
  const auto table = probabilities_from_counts(records, qpt.settings().dimension());
  ProcessMatrix raw = qpt.invert(table);
  ProcessMatrix physical = project_to_physical_process(raw.matrix());
  const double raw_min = min_eigenvalue(raw.matrix());
  const double phys_min = min_eigenvalue(physical.matrix());
  return {std::move(raw), std::move(physical), raw_min, phys_min};
}

StateReconstruction reconstruct_state(std::span<const CountRecord> records,
                                      const MeasurementSettings& settings) {
  const Eigen::VectorXd p = state_probabilities_from_counts(records, settings.dimension());
  DensityMatrix raw = qst_linear_inversion(p, settings);
  DensityMatrix physical = project_to_physical_state(raw.matrix());
  const double raw_min = min_eigenvalue(raw.matrix());
  const double phys_min = min_eigenvalue(physical.matrix());
  return {std::move(raw), std::move(physical), raw_min, phys_min};
}

BootstrapSummary bootstrap_process_fidelity(std::span<const CountRecord> records,
                                            const ProcessTomography& qpt,
                                            const ProcessMatrix& reference, int samples,
                                            std::uint64_t seed) {
  std::vector<double> f;
  f.reserve(static_cast<std::size_t>(std::max(samples, 0)));
  for (int s = 0; s < samples; ++s) {
    const auto resampled = stats::resample_counts(records, seed + static_cast<std::uint64_t>(s));
    try {
      f.push_back(process_fidelity(reconstruct_process(resampled, qpt).physical, reference));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateData && e.code() != ErrorCode::ZeroTrace) throw;
    }
  }
  return summarize(f);
}

BootstrapSummary bootstrap_state_fidelity(std::span<const CountRecord> records,
                                          const MeasurementSettings& settings,
                                          const DensityMatrix& reference, int samples,
                                          std::uint64_t seed) {
  std::vector<double> f;
  f.reserve(static_cast<std::size_t>(std::max(samples, 0)));
  for (int s = 0; s < samples; ++s) {
    const auto resampled = stats::resample_counts(records, seed + static_cast<std::uint64_t>(s));
    try {
      f.push_back(state_fidelity(reconstruct_state(resampled, settings).physical, reference));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateData && e.code() != ErrorCode::NotPositive) throw;
    }
  }
  return summarize(f);
}

}  // namespace qmem
