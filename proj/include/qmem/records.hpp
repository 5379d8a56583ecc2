#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace qmem {

/// One (input state, measurement projector) setting of the experiment.
/// Indices are 1-based, as written in counts files.
struct CountRecord {
  int input_index = 0;
  int meas_index = 0;
  std::int64_t raw_counts = 0;
  std::int64_t background_counts = 0;

  friend bool operator==(const CountRecord&, const CountRecord&) = default;
};

/// p(j, i): probability that the retrieved input j projects onto measurement
/// vector i. Zero-based in code. Tables derived from counts are ratios of
/// noisy data and may leave [0, 1] slightly; predicted tables do not.
class ProbabilityTable {
 public:
  ProbabilityTable() = default;
  explicit ProbabilityTable(Eigen::MatrixXd p) : p_(std::move(p)) {}

  int inputs() const noexcept { return static_cast<int>(p_.rows()); }
  int measurements() const noexcept { return static_cast<int>(p_.cols()); }
  double operator()(int input, int meas) const { return p_(input, meas); }
  const Eigen::MatrixXd& matrix() const noexcept { return p_; }

 private:
  Eigen::MatrixXd p_;
};

}  // namespace qmem
