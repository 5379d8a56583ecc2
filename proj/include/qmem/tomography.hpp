#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qmem/qudit.hpp"
#include "qmem/records.hpp"

namespace qmem {

/// Input states, measurement projectors and operator basis of a tomography
/// run. The first d measurement states must form an orthonormal basis (their
/// projectors sum to I): count normalization relies on it.
class MeasurementSettings {
 public:
  MeasurementSettings(std::vector<StateVector> inputs, std::vector<StateVector> measurements,
                      OperatorBasis basis);

  /// Nine canonical qutrit inputs, measured on the same nine vectors, with
  /// the Gell-Mann operator basis.
  static MeasurementSettings canonical();

  int dimension() const noexcept { return basis_.dimension(); }
  const std::vector<StateVector>& inputs() const noexcept { return inputs_; }
  const std::vector<StateVector>& measurement_states() const noexcept { return meas_; }
  const std::vector<DensityMatrix>& projectors() const noexcept { return projectors_; }
  const OperatorBasis& basis() const noexcept { return basis_; }

 private:
  std::vector<StateVector> inputs_;
  std::vector<StateVector> meas_;
  std::vector<DensityMatrix> projectors_;
  OperatorBasis basis_;
};

/// Tr(mu_i rho) for every measurement projector.
Eigen::VectorXd predict_state_probabilities(const DensityMatrix& rho,
                                            const MeasurementSettings& settings);

ProbabilityTable predict_probabilities(const KrausChannel& channel,
                                       const MeasurementSettings& settings);
ProbabilityTable predict_probabilities(const ProcessMatrix& chi,
                                       const MeasurementSettings& settings);

/// Background-subtracted counts (negatives clamped to zero), normalized per
/// input by the sum over the first d projectors. Requires every
/// (input, measurement) pair exactly once.
ProbabilityTable probabilities_from_counts(std::span<const CountRecord> records, int d = 3);

/// State-mode variant: one input, d^2 measurement records.
Eigen::VectorXd state_probabilities_from_counts(std::span<const CountRecord> records, int d = 3);

/// Unique Hermitian rho with Tr(mu_i rho) = p_i (least squares). The result
/// is not projected onto the physical set.
DensityMatrix qst_linear_inversion(const Eigen::VectorXd& p, const MeasurementSettings& settings);

/// Linear-inversion process tomography. The design matrix maps the d^4 real
/// parameters of a Hermitian chi onto the inputs x projectors probabilities
/// and is factorized once per settings object.
class ProcessTomography {
 public:
  explicit ProcessTomography(MeasurementSettings settings);

  /// Least-squares chi, Hermitian by construction, not yet physical.
  ProcessMatrix invert(const ProbabilityTable& table) const;

  double condition_number() const noexcept { return condition_; }
  const MeasurementSettings& settings() const noexcept { return settings_; }
  const Eigen::MatrixXd& design_matrix() const noexcept { return design_; }

 private:
  MeasurementSettings settings_;
  Eigen::MatrixXd design_;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd_;
  double condition_ = 0.0;
};

ProcessMatrix qpt_linear_inversion(const ProbabilityTable& table,
                                   const MeasurementSettings& settings);

/// Hermitize, clamp negative eigenvalues to zero, renormalize to unit trace.
DensityMatrix project_to_physical_state(const CMatrix& rho);

/// Hermitize, clamp negative eigenvalues, rescale to the input trace.
ProcessMatrix project_to_physical_process(const CMatrix& chi);

/// chi = e_11: the identity map in a basis whose first element is I.
ProcessMatrix ideal_storage_chi(const OperatorBasis& basis);

struct ProcessReconstruction {
  ProcessMatrix raw;
  ProcessMatrix physical;
  double raw_min_eigenvalue;
  double physical_min_eigenvalue;
};

struct StateReconstruction {
  DensityMatrix raw;
  DensityMatrix physical;
  double raw_min_eigenvalue;
  double physical_min_eigenvalue;
};

ProcessReconstruction reconstruct_process(std::span<const CountRecord> records,
                                          const ProcessTomography& qpt);

StateReconstruction reconstruct_state(std::span<const CountRecord> records,
                                      const MeasurementSettings& settings);

/// Parametric bootstrap: every raw and background count is redrawn from a
/// Poisson law with the observed value as mean, then the full reconstruction
/// is repeated.
struct BootstrapSummary {
  int samples = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

BootstrapSummary bootstrap_process_fidelity(std::span<const CountRecord> records,
                                            const ProcessTomography& qpt,
                                            const ProcessMatrix& reference, int samples,
                                            std::uint64_t seed);

BootstrapSummary bootstrap_state_fidelity(std::span<const CountRecord> records,
                                          const MeasurementSettings& settings,
                                          const DensityMatrix& reference, int samples,
                                          std::uint64_t seed);

}  // namespace qmem
