#include "qmem/optics.hpp"

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include <fftw3.h>

#include "qmem/tomography.hpp"

namespace qmem::optics {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxCharge = 5;
// Relative level of the back-propagated fiber mode below which the ideal
// hologram transmits nothing.
constexpr double kAmplitudeSupport = 1e-8;

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* plan) const {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
};

// Multiply by (-1)^(row + col): moves the origin between the grid centre and
// sample (0, 0).
void checkerboard(GridArray& a) {
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = (r % 2 == 0) ? 1 : 0; c < a.cols(); c += 2) a(r, c) = -a(r, c);
  }
}

// Centered unitary forward DFT, in place. Valid for even N.
void centered_dft(GridArray& a) {
  const int n = static_cast<int>(a.rows());
  auto* data = reinterpret_cast<fftw_complex*>(a.data());
  checkerboard(a);
  std::unique_ptr<fftw_plan_s, PlanDeleter> plan;
  {
    std::lock_guard lock(planner_mutex());
    plan.reset(fftw_plan_dft_2d(n, n, data, data, FFTW_FORWARD, FFTW_ESTIMATE));
  }
  fftw_execute(plan.get());
  checkerboard(a);
  a /= static_cast<double>(n);
}

void require_same_geometry(int n1, double e1, int n2, double e2, const char* who) {
  if (n1 != n2 || e1 != e2) {
    throw Error(ErrorCode::DimensionMismatch, std::string(who) + ": grid geometry mismatch");
  }
}

void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); }

FieldGrid normalized(GridArray samples, double extent) {
  FieldGrid f(std::move(samples), extent);
  const double p = f.power();
  if (!(p > 0.0)) throw Error(ErrorCode::NotNormalized, "field has zero power");
  return FieldGrid(f.samples() / std::sqrt(p), extent);
}

// Unnormalized LG_{p=0, l}: (sqrt(2) (x +/- i y) / w)^|l| exp(-r^2/w^2).
GridArray lg_samples(int l, double w, const OpticsConfig& cfg) {
  const int n = cfg.grid_size;
  const double dx = cfg.spacing();
  const int order = std::abs(l);
  GridArray a(n, n);
  for (int r = 0; r < n; ++r) {
    const double y = (r - n / 2) * dx;
    for (int c = 0; c < n; ++c) {
      const double x = (c - n / 2) * dx;
      const Complex z = Complex(x, l >= 0 ? y : -y) * (std::sqrt(2.0) / w);
      Complex poly = 1.0;
      for (int k = 0; k < order; ++k) poly *= z;
      a(r, c) = poly * std::exp(-(x * x + y * y) / (w * w));
    }
  }
  return a;
}

FieldGrid project_chain(const FieldGrid& image, const MeasurementHologram& holo) {
  FieldGrid masked = apply_phase_mask(image, holo.phase, true);
  if (holo.amplitude.size() != 0) masked = apply_amplitude(masked, holo.amplitude);
  return farfield(masked);
}

double coupling(const FieldGrid& far, const FieldGrid& fiber) {
  return std::norm(fiber.inner(far));
}

}  // namespace

// ---------------------------------------------------------------------------
// configuration and grid types

double OpticsConfig::self_fourier_waist() const {
  return spacing() * std::sqrt(grid_size / kPi);
}

double OpticsConfig::conjugate_waist(double w) const {
  const double dx = spacing();
  return grid_size * dx * dx / (kPi * w);
}

void OpticsConfig::validate() const {
  if (grid_size < 128 || (grid_size & (grid_size - 1)) != 0) {
    invalid("optics.grid_size: must be a power of two >= 128");
  }
  if (!(extent > 0.0) || !std::isfinite(extent)) invalid("optics.extent: must be positive");
  if (!std::isfinite(waist)) invalid("optics.waist: must be finite");
  if (!std::isfinite(fiber_waist)) invalid("optics.fiber_waist: must be finite");
  if (beam_waist() > extent / 4.0) invalid("optics.waist: must not exceed extent/4");
  if (fiber_mode_waist() > extent / 4.0) invalid("optics.fiber_waist: must not exceed extent/4");
}

FieldGrid::FieldGrid(GridArray samples, double extent)
    : samples_(std::move(samples)), extent_(extent) {
  if (samples_.rows() != samples_.cols() || samples_.rows() == 0 || samples_.rows() % 2 != 0) {
    throw Error(ErrorCode::DimensionMismatch, "field grid must be square with an even size");
  }
  if (!(extent_ > 0.0)) throw Error(ErrorCode::InvalidConfig, "field grid extent must be positive");
  if (!samples_.allFinite()) throw Error(ErrorCode::InvalidConfig, "field grid has non-finite samples");
}

double FieldGrid::power() const {
  const double dx = spacing();
  return samples_.abs2().sum() * dx * dx;
}

Complex FieldGrid::inner(const FieldGrid& other) const {
  require_same_geometry(size(), extent_, other.size(), other.extent_, "FieldGrid::inner");
  const double dx = spacing();
  return (samples_.conjugate() * other.samples_).sum() * (dx * dx);
}

PhaseMask::PhaseMask(RealGrid phases, double extent)
    : phases_(std::move(phases)), extent_(extent) {
  if (phases_.rows() != phases_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "phase mask must be square");
  }
  if (!((phases_ > -kPi).all() && (phases_ <= kPi).all())) {
    throw Error(ErrorCode::InvalidConfig, "phase mask values must lie in (-pi, pi]");
  }
}

// ---------------------------------------------------------------------------
// mode constructors

FieldGrid oam_mode_field(int l, const OpticsConfig& cfg) {
  cfg.validate();
  if (std::abs(l) > kMaxCharge) {
    std::ostringstream os;
    os << "oam_mode_field: |l| = " << std::abs(l) << " exceeds " << kMaxCharge;
    throw Error(ErrorCode::InvalidConfig, os.str());
  }
  return normalized(lg_samples(l, cfg.beam_waist(), cfg), cfg.extent);
}

FieldGrid gaussian_field(double waist, const OpticsConfig& cfg) {
  if (!(waist > 0.0)) throw Error(ErrorCode::InvalidConfig, "gaussian_field: waist must be positive");
  return normalized(lg_samples(0, waist, cfg), cfg.extent);
}

FieldGrid superposition_field(const StateVector& psi, const OpticsConfig& cfg) {
  if (psi.dimension() != 3) {
    throw Error(ErrorCode::InvalidDimension, "superposition_field: qutrit state required");
  }
  cfg.validate();
  GridArray sum = GridArray::Zero(cfg.grid_size, cfg.grid_size);
  for (int k = 0; k < 3; ++k) {
    if (psi[k] == Complex{}) continue;
    sum += psi[k] * oam_mode_field(oam_charge(3, k), cfg).samples();
  }
  return normalized(std::move(sum), cfg.extent);
}

// ---------------------------------------------------------------------------
// masks

PhaseMask phase_mask_of(const FieldGrid& field) {
  const auto& s = field.samples();
  RealGrid phases(s.rows(), s.cols());
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    for (Eigen::Index c = 0; c < s.cols(); ++c) {
      const Complex z = s(r, c);
      double a = (z == Complex{}) ? 0.0 : std::arg(z);
      if (a <= -kPi) a = kPi;
      phases(r, c) = a;
    }
  }
  return PhaseMask(std::move(phases), field.extent());
}

FieldGrid apply_phase_mask(const FieldGrid& field, const PhaseMask& mask, bool conjugate) {
  require_same_geometry(field.size(), field.extent(), mask.size(), mask.extent(),
                        "apply_phase_mask");
  const double sign = conjugate ? -1.0 : 1.0;
  GridArray out = field.samples();
  const auto& ph = mask.phases();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) *= std::polar(1.0, sign * ph(r, c));
  }
  return FieldGrid(std::move(out), field.extent());
}

FieldGrid apply_amplitude(const FieldGrid& field, const RealGrid& amplitude) {
  if (amplitude.rows() != field.size() || amplitude.cols() != field.size()) {
    throw Error(ErrorCode::DimensionMismatch, "apply_amplitude: grid geometry mismatch");
  }
  return FieldGrid(field.samples() * amplitude.cast<Complex>(), field.extent());
}

// ---------------------------------------------------------------------------
// propagation

FieldGrid lens_fourier(const FieldGrid& field) {
  GridArray a = field.samples();
  centered_dft(a);
  return FieldGrid(std::move(a), field.extent());
}

FieldGrid four_f_image(const FieldGrid& field) { return lens_fourier(lens_fourier(field)); }

FieldGrid farfield(const FieldGrid& field) { return lens_fourier(field); }

FieldGrid parity_flip(const FieldGrid& field) {
  const int n = field.size();
  const auto& s = field.samples();
  GridArray out(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) out(r, c) = s((n - r) % n, (n - c) % n);
  }
  return FieldGrid(std::move(out), field.extent());
}

Complex fiber_overlap(const FieldGrid& field, const OpticsConfig& cfg) {
  const FieldGrid fiber = gaussian_field(cfg.fiber_mode_waist(), cfg);
  return fiber.inner(field);
}

// ---------------------------------------------------------------------------
// preparation and measurement

FieldGrid prepared_field(const StateVector& psi, const OpticsConfig& cfg, Modulation modulation) {
  const FieldGrid ideal = superposition_field(psi, cfg);
  if (modulation == Modulation::Ideal) return ideal;
  return apply_phase_mask(gaussian_field(cfg.beam_waist(), cfg), phase_mask_of(ideal), false);
}

MeasurementHologram measurement_hologram(const StateVector& meas, const OpticsConfig& cfg,
                                         Modulation modulation) {
  // The 4-f image of the measurement mode, taken in closed form: an FFT round
  // trip would leave round-off with random phase at the vortex core, exactly
  // where a phase-only input carries its peak amplitude.
  const FieldGrid image = parity_flip(superposition_field(meas, cfg));
  MeasurementHologram holo{phase_mask_of(image), RealGrid()};
  if (modulation == Modulation::Ideal) {
    // Fiber mode seen from the SLM plane, i.e. one lens back. Outside its
    // support the ratio would only amplify FFT round-off in the image, and
    // the signal it carries there is below 1e-16.
    const FieldGrid back = gaussian_field(cfg.conjugate_waist(cfg.fiber_mode_waist()), cfg);
    const RealGrid g = back.samples().abs();
    const RealGrid m = image.samples().abs();
    const double floor = kAmplitudeSupport * g.maxCoeff();
    holo.amplitude = (g > floor).select(m / g.max(floor), 0.0);
  }
  return holo;
}

double optical_projection_probability(const StateVector& input, const StateVector& meas,
                                      const OpticsConfig& cfg, Modulation modulation) {
  cfg.validate();
  const FieldGrid image = four_f_image(prepared_field(input, cfg, modulation));
  const MeasurementHologram holo = measurement_hologram(meas, cfg, modulation);
  const FieldGrid fiber = gaussian_field(cfg.fiber_mode_waist(), cfg);
  return coupling(project_chain(image, holo), fiber);
}

OpticalMeasurement::OpticalMeasurement(const std::vector<StateVector>& measurements,
                                       OpticsConfig cfg, Modulation modulation)
    : cfg_(std::move(cfg)), modulation_(modulation) {
  cfg_.validate();
  holograms_.reserve(measurements.size());
  for (const auto& m : measurements) holograms_.push_back(measurement_hologram(m, cfg_, modulation_));
}

Eigen::VectorXd OpticalMeasurement::probabilities(const StateVector& input) const {
  const FieldGrid image = four_f_image(prepared_field(input, cfg_, modulation_));
  const FieldGrid fiber = gaussian_field(cfg_.fiber_mode_waist(), cfg_);
  Eigen::VectorXd p(static_cast<Eigen::Index>(holograms_.size()));
  for (std::size_t i = 0; i < holograms_.size(); ++i) {
    p(static_cast<Eigen::Index>(i)) = coupling(project_chain(image, holograms_[i]), fiber);
  }
  return p;
}

Eigen::VectorXd OpticalMeasurement::channel_probabilities(const KrausChannel& channel,
                                                          const StateVector& input) const {
  if (channel.dimension() != input.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "channel and input dimensions differ");
  }
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(holograms_.size()));
  for (const auto& k : channel.operators()) {
    const CVector branch = k * input.amplitudes();
    const double weight = branch.squaredNorm();
    if (weight < 1e-24) continue;
    p += weight * probabilities(StateVector::normalized(branch));
  }
  return p;
}

ProbabilityTable optical_probability_table(const KrausChannel& channel,
                                           const MeasurementSettings& settings,
                                           const OpticsConfig& cfg, Modulation modulation) {
  const OpticalMeasurement om(settings.measurement_states(), cfg, modulation);
  const auto& inputs = settings.inputs();
  Eigen::MatrixXd p(static_cast<Eigen::Index>(inputs.size()),
                    static_cast<Eigen::Index>(settings.measurement_states().size()));
  for (std::size_t j = 0; j < inputs.size(); ++j) {
    p.row(static_cast<Eigen::Index>(j)) = om.channel_probabilities(channel, inputs[j]).transpose();
  }
  return ProbabilityTable(std::move(p));
}

}  // namespace qmem::optics
