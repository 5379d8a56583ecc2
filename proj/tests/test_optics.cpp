#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qmem/channels.hpp"
#include "qmem/optics.hpp"
#include "qmem/tomography.hpp"
#include "support/test_support.hpp"

using namespace qmem;
using namespace qmem::optics;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected qmem::Error");
  return ErrorCode::InvalidConfig;
}

double l2_distance(const FieldGrid& a, const FieldGrid& b) {
  const double dx = a.spacing();
  return std::sqrt((a.samples() - b.samples()).abs2().sum()) * dx;
}

FieldGrid random_field(const OpticsConfig& cfg, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  GridArray g(cfg.grid_size, cfg.grid_size);
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    for (Eigen::Index c = 0; c < g.cols(); ++c) g(r, c) = Complex(n(rng), n(rng));
  }
  const double dx = cfg.spacing();
  g /= std::sqrt(g.abs2().sum()) * dx;
  return FieldGrid(std::move(g), cfg.extent);
}

int loop_radius(const OpticsConfig& cfg) {
  return static_cast<int>(std::lround(cfg.beam_waist() / cfg.spacing()));
}

CVector vec3(Complex a, Complex b, Complex c) {
  CVector v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_CASE("optics config validation") {
  OpticsConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.fiber_mode_waist() == doctest::Approx(cfg.self_fourier_waist()));
  CHECK(cfg.conjugate_waist(cfg.conjugate_waist(0.1)) == doctest::Approx(0.1));

  auto message_of = [](const OpticsConfig& c) -> std::string {
    try {
      c.validate();
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidConfig);
      return e.what();
    }
    return "";
  };
  OpticsConfig bad = cfg;
  bad.grid_size = 100;
  CHECK(message_of(bad).rfind("optics.grid_size", 0) == 0);
  bad.grid_size = 64;
  CHECK(message_of(bad).rfind("optics.grid_size", 0) == 0);
  bad = cfg;
  bad.waist = 0.3;
  CHECK(message_of(bad).rfind("optics.waist", 0) == 0);
  bad = cfg;
  bad.fiber_waist = 0.26;
  CHECK(message_of(bad).rfind("optics.fiber_waist", 0) == 0);
  bad = cfg;
  bad.extent = -1;
  CHECK(message_of(bad).rfind("optics.extent", 0) == 0);
}

TEST_CASE("grid type validation") {
  CHECK(code_of([] { FieldGrid(GridArray::Zero(4, 6), 1.0); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([] { FieldGrid(GridArray::Zero(5, 5), 1.0); }) == ErrorCode::DimensionMismatch);
  GridArray nan = GridArray::Zero(4, 4);
  nan(1, 1) = Complex(std::nan(""), 0.0);
  CHECK(code_of([&] { FieldGrid(nan, 1.0); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { PhaseMask(RealGrid::Constant(4, 4, -kPi), 1.0); }) ==
        ErrorCode::InvalidConfig);
  CHECK_NOTHROW(PhaseMask(RealGrid::Constant(4, 4, kPi), 1.0));
  const FieldGrid f(GridArray::Ones(4, 4), 1.0);
  CHECK(f.coordinate(2) == 0.0);
  CHECK(f.coordinate(0) == doctest::Approx(-1.0));
}

TEST_CASE("oam mode fields") {
  const OpticsConfig cfg;
  const int c = cfg.grid_size / 2;
  const auto g = oam_mode_field(0, cfg);
  CHECK(g.power() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(g(c, c)) == doctest::Approx(g.samples().abs().maxCoeff()));
  CHECK(g.samples().imag().abs().maxCoeff() < 1e-12 * g.samples().abs().maxCoeff());

  const auto l1 = oam_mode_field(1, cfg);
  CHECK(std::abs(l1(c, c)) < 1e-12);
  CHECK(l1.power() == doctest::Approx(1.0).epsilon(1e-9));

  for (int a : {-1, 0, 1}) {
    for (int b : {-1, 0, 1}) {
      const Complex ip = oam_mode_field(a, cfg).inner(oam_mode_field(b, cfg));
      CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) < 1e-6);
    }
  }
  for (int l = -5; l <= 5; ++l) {
    const auto f = oam_mode_field(l, cfg);
    CHECK(f.power() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(testing::winding_number(f, loop_radius(cfg)) == l);
  }
  CHECK(code_of([&] { oam_mode_field(6, cfg); }) == ErrorCode::InvalidConfig);
  OpticsConfig wide = cfg;
  wide.waist = 0.5;
  CHECK(code_of([&] { oam_mode_field(0, wide); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("superposition fields") {
  const OpticsConfig cfg;
  const int n = cfg.grid_size;
  const int c = n / 2;
  const auto l = superposition_field(oam_state(Oam::L), cfg);
  CHECK(l.inner(oam_mode_field(1, cfg)).real() == doctest::Approx(1.0).epsilon(1e-12));

  const auto lr = superposition_field(StateVector(vec3(1 / std::sqrt(2.0), 0, 1 / std::sqrt(2.0))),
                                      cfg);
  CHECK(lr.power() == doctest::Approx(1.0).epsilon(1e-9));
  // the x = 0 column is the phi = +-pi/2 line: cos(phi) vanishes there
  double on_axis = 0.0;
  for (int r = 0; r < n; ++r) on_axis = std::max(on_axis, std::norm(lr(r, c)));
  CHECK(on_axis < 1e-9);
  // two lobes along x
  const int off = loop_radius(cfg);
  CHECK(std::norm(lr(c, c + off)) > 0.1 * lr.samples().abs2().maxCoeff());
  CHECK(std::norm(lr(c, c - off)) > 0.1 * lr.samples().abs2().maxCoeff());

  const auto psi1 = superposition_field(qutrit_psi1(), cfg);
  CHECK(psi1.power() == doctest::Approx(1.0).epsilon(1e-9));
  // projections onto the LG family recover the amplitudes
  for (int k = 0; k < 3; ++k) {
    const Complex a = oam_mode_field(oam_charge(3, k), cfg).inner(psi1);
    CHECK(std::abs(a - qutrit_psi1()[k]) < 1e-6);
  }
  CHECK(code_of([&] { superposition_field(StateVector(CVector::Unit(2, 0)), cfg); }) ==
        ErrorCode::InvalidDimension);
}

TEST_CASE("phase masks") {
  const OpticsConfig cfg;
  const int n = cfg.grid_size;
  const int c = n / 2;
  const auto l = oam_mode_field(1, cfg);
  const auto mask = phase_mask_of(l);
  CHECK(mask(c, c) == 0.0);
  double worst = 0.0;
  for (int r = c - 40; r <= c + 40; r += 7) {
    for (int k = c - 40; k <= c + 40; k += 5) {
      if (r == c && k == c) continue;
      const double phi = std::atan2(l.coordinate(r), l.coordinate(k));
      worst = std::max(worst, std::abs(std::remainder(mask(r, k) - phi, 2 * kPi)));
    }
  }
  CHECK(worst < 1e-9);

  const auto g = gaussian_field(0.05, cfg);
  CHECK(phase_mask_of(g).phases().abs().maxCoeff() == 0.0);

  const auto lr = superposition_field(StateVector(vec3(1 / std::sqrt(2.0), 0, 1 / std::sqrt(2.0))),
                                      cfg);
  const auto binary = phase_mask_of(lr);
  int mismatches = 0;
  for (int r = 0; r < n; r += 3) {
    for (int k = 0; k < n; k += 3) {
      if (k == c) continue;
      if (std::abs(lr(r, k)) == 0.0) continue;  // underflow far outside the beam
      const double expect = k > c ? 0.0 : kPi;
      if (std::abs(binary(r, k) - expect) > 1e-9) ++mismatches;
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("apply_phase_mask") {
  const OpticsConfig cfg;
  std::mt19937_64 rng(21);
  const auto f = random_field(cfg, rng);
  const PhaseMask zero(RealGrid::Zero(cfg.grid_size, cfg.grid_size), cfg.extent);
  CHECK(l2_distance(apply_phase_mask(f, zero, false), f) == 0.0);

  const auto mask = phase_mask_of(random_field(cfg, rng));
  const auto there = apply_phase_mask(f, mask, false);
  CHECK((there.samples().abs() - f.samples().abs()).abs().maxCoeff() < 1e-12);
  CHECK(l2_distance(apply_phase_mask(there, mask, true), f) < 1e-12);

  const auto l = oam_mode_field(1, cfg);
  const auto unwound = apply_phase_mask(l, phase_mask_of(l), true);
  CHECK(testing::winding_number(unwound, loop_radius(cfg)) == 0);

  OpticsConfig small;
  small.grid_size = 128;
  small.extent = 0.5;
  const PhaseMask other(RealGrid::Zero(128, 128), 0.5);
  CHECK(code_of([&] { apply_phase_mask(f, other, false); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("lens and far-field transforms") {
  const OpticsConfig cfg;
  std::mt19937_64 rng(8);
  const auto g = gaussian_field(cfg.self_fourier_waist(), cfg);
  for (auto* transform : {&lens_fourier, &farfield}) {
    CHECK(l2_distance(transform(g), g) < 1e-6);
    for (int t = 0; t < 3; ++t) {
      const auto f = random_field(cfg, rng);
      CHECK(std::abs(transform(f).power() - f.power()) < 1e-10);
    }
    for (int l : {-2, -1, 1, 3}) {
      const auto out = transform(oam_mode_field(l, cfg));
      CHECK(testing::winding_number(out, loop_radius(cfg)) == l);
    }
  }
  // a Gaussian of waist w lands on the conjugate waist
  const double w = 0.8 * cfg.self_fourier_waist();
  const auto moved = lens_fourier(gaussian_field(w, cfg));
  CHECK(l2_distance(moved, gaussian_field(cfg.conjugate_waist(w), cfg)) < 1e-6);
}

TEST_CASE("4-f imaging inverts the field") {
  const OpticsConfig cfg;
  std::mt19937_64 rng(19);
  const auto g = gaussian_field(0.04, cfg);
  CHECK(l2_distance(four_f_image(g), g) < 1e-9);
  for (int t = 0; t < 3; ++t) {
    const auto f = random_field(cfg, rng);
    CHECK(l2_distance(four_f_image(f), parity_flip(f)) < 1e-9);
    CHECK(std::abs(four_f_image(f).power() - 1.0) < 1e-10);
  }
  for (int l : {-1, 1, 2}) {
    const auto m = oam_mode_field(l, cfg);
    const auto img = four_f_image(m);
    // (x, y) -> (-x, -y) rotates by pi: same winding, phase shifted by l pi
    CHECK(testing::winding_number(img, loop_radius(cfg)) == l);
    CHECK(l2_distance(img, parity_flip(m)) < 1e-9);
  }
}

TEST_CASE("fiber overlap") {
  OpticsConfig cfg;
  const double w1 = cfg.fiber_mode_waist();
  CHECK(std::abs(fiber_overlap(gaussian_field(w1, cfg), cfg)) == doctest::Approx(1.0).epsilon(1e-9));
  for (int l : {-2, -1, 1, 2}) {
    CHECK(std::abs(fiber_overlap(oam_mode_field(l, cfg), cfg)) < 1e-9);
  }
  for (double w2 : {0.6 * w1, 1.7 * w1}) {
    const double closed = 2 * w1 * w2 / (w1 * w1 + w2 * w2);
    CHECK(std::abs(std::abs(fiber_overlap(gaussian_field(w2, cfg), cfg)) - closed) < 1e-6);
  }
}

TEST_CASE("optical projection examples") {
  const OpticsConfig cfg;
  const auto s = canonical_input_states();
  const auto L = oam_state(Oam::L);
  const auto R = oam_state(Oam::R);
  CHECK(std::abs(optical_projection_probability(L, L, cfg, Modulation::Ideal) - 1.0) < 1e-3);
  CHECK(std::abs(optical_projection_probability(L, R, cfg, Modulation::Ideal)) < 1e-3);
  CHECK(std::abs(optical_projection_probability(s[3], s[0], cfg, Modulation::Ideal) - 0.5) < 1e-2);
  OpticsConfig bad;
  bad.grid_size = 96;
  CHECK(code_of([&] { optical_projection_probability(L, L, bad, Modulation::Ideal); }) ==
        ErrorCode::InvalidConfig);
}

TEST_CASE("optical and abstract probabilities agree on all canonical pairs") {
  const OpticsConfig cfg;
  const auto s = canonical_input_states();
  const OpticalMeasurement om(s, cfg, Modulation::Ideal);
  double worst = 0.0;
  for (const auto& in : s) {
    const Eigen::VectorXd p = om.probabilities(in);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double exact = std::norm(s[i].amplitudes().dot(in.amplitudes()));
      worst = std::max(worst, std::abs(p(static_cast<Eigen::Index>(i)) - exact));
    }
  }
  CHECK(worst < 1e-3);
  // the one-shot helper and the cached measurement agree
  CHECK(std::abs(om.probabilities(s[5])(7) -
                 optical_projection_probability(s[5], s[7], cfg, Modulation::Ideal)) < 1e-12);
}

TEST_CASE("phase-only modulation is exact for single vortices only") {
  const OpticsConfig cfg;
  const std::vector<StateVector> pure{oam_state(Oam::L), oam_state(Oam::G), oam_state(Oam::R)};
  const OpticalMeasurement ideal(pure, cfg, Modulation::Ideal);
  const OpticalMeasurement phase(pure, cfg, Modulation::PhaseOnly);
  for (const auto& in : pure) {
    CHECK((ideal.probabilities(in) - phase.probabilities(in)).cwiseAbs().maxCoeff() < 1e-3);
  }
  // a superposition prepared and projected through phase-only masks loses
  // its amplitude structure; the cross terms move away from the inner product
  const auto psi1 = qutrit_psi1();
  const auto L = oam_state(Oam::L);
  const double lossy = optical_projection_probability(psi1, L, cfg, Modulation::PhaseOnly);
  const double exact = optical_projection_probability(psi1, L, cfg, Modulation::Ideal);
  CHECK(exact == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
  CHECK(std::abs(lossy - 1.0 / 3.0) > 0.05);
}

TEST_CASE("optical probability table for a channel") {
  OpticsConfig cfg;
  cfg.grid_size = 256;
  const auto settings = MeasurementSettings::canonical();
  const auto ch = dephasing_channel(3, 0.3);
  const auto optical = optical_probability_table(ch, settings, cfg, Modulation::Ideal);
  const auto abstract = predict_probabilities(ch, settings);
  CHECK((optical.matrix() - abstract.matrix()).cwiseAbs().maxCoeff() < 1e-3);
}
