#include "doctest.h"

#include <cmath>
#include <string>

#include "qmem/channels.hpp"
#include "qmem/photon_stats.hpp"
#include "qmem/tomography.hpp"

using namespace qmem;
using namespace qmem::stats;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected qmem::Error");
  return ErrorCode::InvalidConfig;
}

std::string message_of(const SourceConfig& cfg) {
  try {
    cfg.validate();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

ProbabilityTable identity_table() {
  return predict_probabilities(identity_channel(3), MeasurementSettings::canonical());
}

}  // namespace

TEST_CASE("source config validation") {
  SourceConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.counts_per_setting = 0;
  CHECK(message_of(cfg).rfind("source.counts_per_setting", 0) == 0);
  cfg = {};
  cfg.background = -1;
  CHECK(message_of(cfg).rfind("source.background", 0) == 0);
  cfg = {};
  cfg.efficiency = 1.5;
  CHECK(message_of(cfg).rfind("source.efficiency", 0) == 0);
  cfg = {};
  cfg.window_s = 0;
  CHECK(message_of(cfg).rfind("source.window_s", 0) == 0);
  CHECK(code_of([&] { simulate_counts(identity_table(), cfg); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("simulate_counts examples") {
  SourceConfig cfg;
  cfg.seed = 3;
  const auto zeros = simulate_counts(ProbabilityTable(Eigen::MatrixXd::Zero(9, 9)), cfg);
  REQUIRE(zeros.size() == 81);
  for (const auto& r : zeros) {
    CHECK(r.raw_counts == 0);
    CHECK(r.background_counts == 0);
  }

  cfg.background = 50;
  const auto a = simulate_counts(identity_table(), cfg);
  const auto b = simulate_counts(identity_table(), cfg);
  CHECK(a == b);
  cfg.seed = 4;
  CHECK(simulate_counts(identity_table(), cfg) != a);

  int k = 0;
  for (int j = 1; j <= 9; ++j) {
    for (int i = 1; i <= 9; ++i, ++k) {
      CHECK(a[k].input_index == j);
      CHECK(a[k].meas_index == i);
      CHECK(a[k].raw_counts >= 0);
      CHECK(a[k].background_counts >= 0);
    }
  }

  SourceConfig big;
  big.counts_per_setting = 1e6;
  big.seed = 12;
  const auto table = identity_table();
  const auto recs = simulate_counts(table, big);
  double worst = 0.0;
  for (const auto& r : recs) {
    const double rate = static_cast<double>(r.raw_counts) / big.counts_per_setting;
    worst = std::max(worst, std::abs(rate - table(r.input_index - 1, r.meas_index - 1)));
  }
  CHECK(worst < 0.005);
}

TEST_CASE("expected sampling rounds the mean") {
  SourceConfig cfg;
  cfg.counts_per_setting = 1000;
  cfg.efficiency = 0.5;
  cfg.background = 10;
  const auto recs = simulate_counts(identity_table(), cfg, Sampling::Expected);
  CHECK(recs[0].raw_counts == 510);
  CHECK(recs[0].background_counts == 10);
  CHECK(recs[1].raw_counts == 10);
  CHECK(recs[3].raw_counts == 260);  // |<psi_4|L>|^2 = 1/2
}

TEST_CASE("simulated means match the source model") {
  // p(j, i) spread over (0, 1) so that every setting has its own mean
  Eigen::MatrixXd p(9, 9);
  for (int j = 0; j < 9; ++j) {
    for (int i = 0; i < 9; ++i) p(j, i) = (1 + j * 9 + i) / 82.0;
  }
  const ProbabilityTable table(p);
  SourceConfig cfg;
  cfg.counts_per_setting = 200;
  cfg.efficiency = 0.7;
  cfg.background = 4;
  constexpr int kDraws = 10000;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(9, 9);
  for (int s = 0; s < kDraws; ++s) {
    cfg.seed = static_cast<std::uint64_t>(s);
    for (const auto& r : simulate_counts(table, cfg)) {
      sum(r.input_index - 1, r.meas_index - 1) += static_cast<double>(r.raw_counts);
    }
  }
  int outside = 0;
  for (int j = 0; j < 9; ++j) {
    for (int i = 0; i < 9; ++i) {
      const double mean = cfg.efficiency * cfg.counts_per_setting * p(j, i) + cfg.background;
      const double se = std::sqrt(mean / kDraws);
      if (std::abs(sum(j, i) / kDraws - mean) > 3 * se) ++outside;
    }
  }
  CHECK(outside == 0);
}

TEST_CASE("subtract_background") {
  const std::vector<CountRecord> recs{{1, 1, 120, 20}, {1, 2, 5, 9}, {1, 3, 7, 7}};
  const auto c = subtract_background(recs);
  REQUIRE(c.size() == 3);
  CHECK(c[0].counts == 100.0);
  CHECK(c[1].counts == 0.0);
  CHECK(c[2].counts == 0.0);
  CHECK(c[0].input_index == 1);
  CHECK(c[1].meas_index == 2);

  // unbiased before clamping: signal far above the background fluctuations
  SourceConfig cfg;
  cfg.counts_per_setting = 2000;
  cfg.background = 100;
  cfg.efficiency = 0.5;
  const ProbabilityTable table(Eigen::MatrixXd::Constant(9, 9, 0.5));
  double sum = 0.0;
  int n = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    cfg.seed = s;
    for (const auto& x : subtract_background(simulate_counts(table, cfg))) {
      CHECK(x.counts >= 0.0);
      sum += x.counts;
      ++n;
    }
  }
  const double expect = 0.5 * 2000 * 0.5;
  const double se = std::sqrt((expect + 2 * cfg.background) / n);
  CHECK(std::abs(sum / n - expect) < 3 * se);
}

TEST_CASE("state counts") {
  Eigen::VectorXd p(9);
  p << 1, 0, 0, 0.5, 0, 0.5, 0, 0.5, 0.5;
  SourceConfig cfg;
  cfg.counts_per_setting = 100;
  const auto recs = simulate_state_counts(p, cfg, Sampling::Expected);
  REQUIRE(recs.size() == 9);
  for (int i = 0; i < 9; ++i) {
    CHECK(recs[i].input_index == 1);
    CHECK(recs[i].meas_index == i + 1);
    CHECK(recs[i].raw_counts == std::lround(100 * p(i)));
  }
}

TEST_CASE("resample_counts") {
  SourceConfig cfg;
  cfg.counts_per_setting = 500;
  cfg.background = 5;
  cfg.seed = 1;
  const auto recs = simulate_counts(identity_table(), cfg);
  const auto a = resample_counts(recs, 9);
  CHECK(a == resample_counts(recs, 9));
  CHECK(a != resample_counts(recs, 10));
  REQUIRE(a.size() == recs.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].input_index == recs[k].input_index);
    CHECK(a[k].meas_index == recs[k].meas_index);
    if (recs[k].raw_counts == 0) CHECK(a[k].raw_counts == 0);
  }
}

TEST_CASE("anticorrelation alpha") {
  CHECK(anticorrelation_alpha(1000000, 10000, 10000, 0) == 0.0);
  CHECK(anticorrelation_alpha(1000000, 10000, 10000, 1) == doctest::Approx(0.01));
  CHECK(code_of([] { anticorrelation_alpha(100, 0, 5, 0); }) == ErrorCode::DegenerateData);
  CHECK(code_of([] { anticorrelation_alpha(100, 5, 0, 0); }) == ErrorCode::DegenerateData);

  const auto coherent = simulate_heralded_splitting(2000000, 0.2, PhotonStatistics::Poissonian, 4);
  const double a = anticorrelation_alpha(coherent.triggers, coherent.t1, coherent.t2, coherent.t12);
  CHECK(std::abs(a - 1.0) < 0.05);

  const auto single = simulate_heralded_splitting(200000, 0.3, PhotonStatistics::SinglePhoton, 4);
  CHECK(single.t12 == 0);
  CHECK(single.t1 > 0);
  CHECK(anticorrelation_alpha(single.triggers, single.t1, single.t2, single.t12) == 0.0);

  // uniform integer rescaling is an exact identity
  for (std::int64_t k : {2, 7, 1000}) {
    CHECK(anticorrelation_alpha(k * 123456, k * 789, k * 812, k * 3) ==
          doctest::Approx(anticorrelation_alpha(123456, 789, 812, 3)).epsilon(1e-15));
  }
}

TEST_CASE("cross-correlation g2") {
  CHECK(cross_correlation_g2(0, 1000, 1000, 50e-9, 1.0) == 0.0);
  const double g = cross_correlation_g2(40, 100000, 200000, 50e-9, 10.0);
  CHECK(cross_correlation_g2(40, 100000, 200000, 100e-9, 10.0) == doctest::Approx(g / 2));
  CHECK(code_of([] { cross_correlation_g2(1, 0, 10, 50e-9, 1.0); }) == ErrorCode::DegenerateData);
  CHECK(code_of([] { cross_correlation_g2(1, 10, 10, 50e-9, 0.0); }) == ErrorCode::DegenerateData);

  const auto s = simulate_independent_streams(2e5, 3e5, 50e-9, 20.0, 17);
  const double g2 =
      cross_correlation_g2(s.coincidences, s.signal, s.trigger, s.window_s, s.duration_s);
  CHECK(std::abs(g2 - 1.0) < 0.05);

  // scaling the counts together with the acquisition time keeps every rate
  for (std::int64_t k : {2, 5, 64}) {
    CHECK(cross_correlation_g2(k * 40, k * 100000, k * 200000, 50e-9, k * 10.0) ==
          doctest::Approx(g).epsilon(1e-14));
  }
}
