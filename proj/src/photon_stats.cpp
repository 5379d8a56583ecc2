#include "qmem/photon_stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "qmem/error.hpp"

namespace qmem::stats {

namespace {

// SplitMix64 finalizer: adjacent (seed, setting) pairs map to unrelated
// engine seeds, so neighbouring settings never share a stream.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 setting_rng(std::uint64_t seed, std::uint64_t setting) {
  return std::mt19937_64(mix(mix(seed) ^ setting));
}

std::int64_t draw_poisson(std::mt19937_64& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(rng);
}

std::int64_t draw(std::mt19937_64& rng, double mean, Sampling sampling) {
  if (sampling == Sampling::Expected) return std::llround(std::max(mean, 0.0));
  return draw_poisson(rng, mean);
}

void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); }

CountRecord simulate_setting(int j, int i, double prob, const SourceConfig& cfg,
                             std::uint64_t setting, Sampling sampling) {
  auto rng = setting_rng(cfg.seed, setting);
  const double signal = cfg.efficiency * cfg.counts_per_setting * std::max(prob, 0.0);
  CountRecord r;
  r.input_index = j;
  r.meas_index = i;
  r.raw_counts = draw(rng, signal + cfg.background, sampling);
  r.background_counts = draw(rng, cfg.background, sampling);
  return r;
}

}  // namespace

void SourceConfig::validate() const {
  if (!(counts_per_setting > 0.0) || !std::isfinite(counts_per_setting)) {
    invalid("source.counts_per_setting: must be positive");
  }
  if (!(background >= 0.0) || !std::isfinite(background)) {
    invalid("source.background: must be non-negative");
  }
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) invalid("source.efficiency: must lie in [0, 1]");
  if (!(window_s > 0.0) || !std::isfinite(window_s)) invalid("source.window_s: must be positive");
}

std::vector<CountRecord> simulate_counts(const ProbabilityTable& p, const SourceConfig& cfg,
                                         Sampling sampling) {
  cfg.validate();
  if (!p.matrix().allFinite()) {
    throw Error(ErrorCode::InvalidConfig, "simulate_counts: probability table is not finite");
  }
  std::vector<CountRecord> out;
  out.reserve(static_cast<std::size_t>(p.inputs() * p.measurements()));
  for (int j = 0; j < p.inputs(); ++j) {
    for (int i = 0; i < p.measurements(); ++i) {
      const auto setting = static_cast<std::uint64_t>(j * p.measurements() + i);
      out.push_back(simulate_setting(j + 1, i + 1, p(j, i), cfg, setting, sampling));
    }
  }
  return out;
}

std::vector<CountRecord> simulate_state_counts(const Eigen::VectorXd& p, const SourceConfig& cfg,
                                               Sampling sampling) {
  return simulate_counts(ProbabilityTable(p.transpose()), cfg, sampling);
}

std::vector<CorrectedCount> subtract_background(std::span<const CountRecord> records) {
  std::vector<CorrectedCount> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const auto diff = static_cast<double>(r.raw_counts - r.background_counts);
    out.push_back({r.input_index, r.meas_index, std::max(diff, 0.0)});
  }
  return out;
}

std::vector<CountRecord> resample_counts(std::span<const CountRecord> records,
                                         std::uint64_t seed) {
  std::vector<CountRecord> out(records.begin(), records.end());
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto rng = setting_rng(seed, k);
    out[k].raw_counts = draw_poisson(rng, static_cast<double>(out[k].raw_counts));
    out[k].background_counts = draw_poisson(rng, static_cast<double>(out[k].background_counts));
  }
  return out;
}

double anticorrelation_alpha(std::int64_t n_trigger, std::int64_t n_t1, std::int64_t n_t2,
                             std::int64_t n_t12) {
  if (n_t1 <= 0 || n_t2 <= 0) {
    throw Error(ErrorCode::DegenerateData, "anticorrelation_alpha: zero single-detector counts");
  }
  if (n_trigger < 0 || n_t12 < 0) {
    throw Error(ErrorCode::InvalidConfig, "anticorrelation_alpha: negative counts");
  }
  // long double keeps the products exact for realistic count magnitudes.
  const long double num = static_cast<long double>(n_t12) * n_trigger;
  const long double den = static_cast<long double>(n_t1) * n_t2;
  return static_cast<double>(num / den);
}

double cross_correlation_g2(std::int64_t n_coinc, std::int64_t n_signal, std::int64_t n_trigger,
                            double window_s, double duration_s) {
  if (n_signal <= 0 || n_trigger <= 0 || !(window_s > 0.0) || !(duration_s > 0.0)) {
    throw Error(ErrorCode::DegenerateData, "cross_correlation_g2: zero rate or duration");
  }
  if (n_coinc < 0) throw Error(ErrorCode::InvalidConfig, "cross_correlation_g2: negative counts");
  const long double coinc_rate = static_cast<long double>(n_coinc) / duration_s;
  const long double accidental = (static_cast<long double>(n_signal) / duration_s) *
                                 (static_cast<long double>(n_trigger) / duration_s) * window_s;
  return static_cast<double>(coinc_rate / accidental);
}

HeraldedCounts simulate_heralded_splitting(std::int64_t triggers, double mean_photons,
                                           PhotonStatistics statistics, std::uint64_t seed) {
  if (triggers < 0 || !(mean_photons >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "simulate_heralded_splitting: bad parameters");
  }
  if (statistics == PhotonStatistics::SinglePhoton && mean_photons > 1.0) {
    throw Error(ErrorCode::InvalidConfig,
                "simulate_heralded_splitting: single-photon presence probability exceeds 1");
  }
  std::mt19937_64 rng(seed);
  std::poisson_distribution<std::int64_t> poisson(mean_photons > 0.0 ? mean_photons : 1.0);
  std::bernoulli_distribution present(std::min(mean_photons, 1.0));
  HeraldedCounts c;
  c.triggers = triggers;
  for (std::int64_t t = 0; t < triggers; ++t) {
    std::int64_t photons = 0;
    if (mean_photons > 0.0) {
      photons = statistics == PhotonStatistics::Poissonian ? poisson(rng) : (present(rng) ? 1 : 0);
    }
    if (photons == 0) continue;
    std::binomial_distribution<std::int64_t> split(photons, 0.5);
    const std::int64_t to_one = split(rng);
    const bool click1 = to_one > 0;
    const bool click2 = photons - to_one > 0;
    c.t1 += click1;
    c.t2 += click2;
    c.t12 += click1 && click2;
  }
  return c;
}

StreamCounts simulate_independent_streams(double signal_rate_hz, double trigger_rate_hz,
                                          double window_s, double duration_s,
                                          std::uint64_t seed) {
  if (!(window_s > 0.0) || !(duration_s > window_s) || signal_rate_hz < 0.0 ||
      trigger_rate_hz < 0.0) {
    throw Error(ErrorCode::InvalidConfig, "simulate_independent_streams: bad parameters");
  }
  const double ps = signal_rate_hz * window_s;
  const double pt = trigger_rate_hz * window_s;
  if (ps > 1.0 || pt > 1.0) {
    throw Error(ErrorCode::InvalidConfig,
                "simulate_independent_streams: more than one click per window");
  }
  const auto bins = static_cast<std::int64_t>(duration_s / window_s);
  std::mt19937_64 rng(seed);
  // Each bin is one of (both, signal only, trigger only, neither); the totals
  // are multinomial and are drawn as a chain of conditional binomials.
  const double p_both = ps * pt;
  const double p_sig = ps * (1.0 - pt);
  const double p_trig = (1.0 - ps) * pt;
  auto binomial = [&rng](std::int64_t n, double p) -> std::int64_t {
    if (n <= 0 || !(p > 0.0)) return 0;
    if (p >= 1.0) return n;
    return std::binomial_distribution<std::int64_t>(n, p)(rng);
  };
  const std::int64_t both = binomial(bins, p_both);
  const std::int64_t sig_only = binomial(bins - both, p_sig / (1.0 - p_both));
  const std::int64_t trig_only =
      binomial(bins - both - sig_only, p_trig / (1.0 - p_both - p_sig));
  StreamCounts c;
  c.window_s = window_s;
  c.duration_s = static_cast<double>(bins) * window_s;
  c.coincidences = both;
  c.signal = both + sig_only;
  c.trigger = both + trig_only;
  return c;
}

}  // namespace qmem::stats
