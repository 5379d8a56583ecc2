#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qmem/records.hpp"

namespace qmem::stats {

/// Coincidence source model. The memory physics is folded into a single
/// end-to-end efficiency.
struct SourceConfig {
  double counts_per_setting = 1e6;  // expected coincidences at unit probability
  double background = 0.0;          // expected background coincidences per setting
  double efficiency = 1.0;
  double window_s = 50e-9;  // coincidence window
  std::uint64_t seed = 0;

  /// Throws Error(InvalidConfig) with a "source.<field>" message.
  void validate() const;
};

enum class Sampling {
  Poisson,   // shot noise on signal and background
  Expected,  // rounded expectation values, no noise
};

/// raw ~ Poisson(eta N p + b), background ~ Poisson(b), one record per
/// setting. Every setting draws from its own generator seeded by
/// (seed, setting index), so the output does not depend on evaluation order.
std::vector<CountRecord> simulate_counts(const ProbabilityTable& p, const SourceConfig& cfg,
                                         Sampling sampling = Sampling::Poisson);

/// State tomography: a single input (index 1) measured on every projector.
std::vector<CountRecord> simulate_state_counts(const Eigen::VectorXd& p, const SourceConfig& cfg,
                                               Sampling sampling = Sampling::Poisson);

struct CorrectedCount {
  int input_index = 0;
  int meas_index = 0;
  double counts = 0.0;
};

/// max(raw - background, 0) per record.
std::vector<CorrectedCount> subtract_background(std::span<const CountRecord> records);

/// Redraws every raw and background count from Poisson(observed).
std::vector<CountRecord> resample_counts(std::span<const CountRecord> records, std::uint64_t seed);

/// Heralded anti-correlation parameter alpha = N_T N_T12 / (N_T1 N_T2).
double anticorrelation_alpha(std::int64_t n_trigger, std::int64_t n_t1, std::int64_t n_t2,
                             std::int64_t n_t12);

/// Normalized cross-correlation: coincidence rate over the accidental rate
/// expected for independent streams, R_c / (R_s R_t tau_w).
double cross_correlation_g2(std::int64_t n_coinc, std::int64_t n_signal, std::int64_t n_trigger,
                            double window_s, double duration_s);

enum class PhotonStatistics { Poissonian, SinglePhoton };

struct HeraldedCounts {
  std::int64_t triggers = 0;
  std::int64_t t1 = 0;   // trigger + detector 1
  std::int64_t t2 = 0;   // trigger + detector 2
  std::int64_t t12 = 0;  // trigger + both detectors
};

/// Hanbury Brown-Twiss splitting of the heralded signal on a 50:50 beam
/// splitter. For Poissonian light `mean_photons` is the mean photon number
/// per trigger; for a single-photon source it is the probability that the
/// photon is present.
HeraldedCounts simulate_heralded_splitting(std::int64_t triggers, double mean_photons,
                                           PhotonStatistics statistics, std::uint64_t seed);

struct StreamCounts {
  std::int64_t signal = 0;
  std::int64_t trigger = 0;
  std::int64_t coincidences = 0;
  double window_s = 0.0;
  double duration_s = 0.0;
};

/// Two statistically independent click streams binned at the coincidence
/// window.
StreamCounts simulate_independent_streams(double signal_rate_hz, double trigger_rate_hz,
                                          double window_s, double duration_s, std::uint64_t seed);

}  // namespace qmem::stats
