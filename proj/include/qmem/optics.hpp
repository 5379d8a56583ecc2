#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qmem/qudit.hpp"
#include "qmem/records.hpp"

namespace qmem {
class MeasurementSettings;
}

namespace qmem::optics {

using GridArray = Eigen::Array<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealGrid = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Laboratory values of the imaging chain. They are carried for reference
/// only; the simulation works in grid units where every lens maps the grid
/// onto itself.
struct PhysicalSetup {
  double wavelength_m = 795e-9;
  double focal_length_m = 0.300;
  double farfield_distance_m = 2.5;
  double beam_waist_m = 2.5e-3;
  int slm_columns = 1920;
  int slm_rows = 1080;
};

/// Sampling of every plane in the chain. All planes share one N x N grid of
/// half-width `extent`; the centered unitary DFT maps it onto itself, so a
/// Gaussian of waist w in one plane is a Gaussian of waist N dx^2 / (pi w)
/// in the next.
struct OpticsConfig {
  int grid_size = 512;
  double extent = 1.0;
  double waist = 0.0;        // <= 0 selects the self-Fourier waist of the grid
  double fiber_waist = 0.0;  // <= 0 selects the far-field image of the beam waist
  PhysicalSetup physical{};

  double spacing() const { return 2.0 * extent / grid_size; }
  double self_fourier_waist() const;
  /// Waist of the Fourier transform of a Gaussian of waist w.
  double conjugate_waist(double w) const;
  double beam_waist() const { return waist > 0.0 ? waist : self_fourier_waist(); }
  double fiber_mode_waist() const {
    return fiber_waist > 0.0 ? fiber_waist : conjugate_waist(beam_waist());
  }

  /// Throws Error(InvalidConfig) with an "optics.<field>" message.
  void validate() const;
};

/// Sampled transverse field. Sample (row, col) sits at
/// x = (col - N/2) dx, y = (row - N/2) dx.
class FieldGrid {
 public:
  FieldGrid(GridArray samples, double extent);

  int size() const noexcept { return static_cast<int>(samples_.rows()); }
  double extent() const noexcept { return extent_; }
  double spacing() const noexcept { return 2.0 * extent_ / size(); }
  double coordinate(int index) const { return (index - size() / 2) * spacing(); }
  const GridArray& samples() const noexcept { return samples_; }
  Complex operator()(int row, int col) const { return samples_(row, col); }

  /// sum |E|^2 dA
  double power() const;
  /// <this|other> = sum conj(E_this) E_other dA
  Complex inner(const FieldGrid& other) const;

 private:
  GridArray samples_;
  double extent_;
};

/// Phases in (-pi, pi], one per sample.
class PhaseMask {
 public:
  PhaseMask(RealGrid phases, double extent);

  int size() const noexcept { return static_cast<int>(phases_.rows()); }
  double extent() const noexcept { return extent_; }
  const RealGrid& phases() const noexcept { return phases_; }
  double operator()(int row, int col) const { return phases_(row, col); }

 private:
  RealGrid phases_;
  double extent_;
};

enum class Modulation {
  Ideal,      // complex modulation: exact mode preparation and projection
  PhaseOnly,  // phase-only SLMs illuminated by / coupled to the fundamental Gaussian
};

/// Normalized Laguerre-Gauss p = 0 mode with azimuthal index l (|l| <= 5).
FieldGrid oam_mode_field(int l, const OpticsConfig& cfg);

/// Normalized fundamental Gaussian exp(-r^2/w^2).
FieldGrid gaussian_field(double waist, const OpticsConfig& cfg);

/// sum_k c_k LG_{l_k} over (|L>, |G>, |R>) = (l = +1, 0, -1), renormalized.
FieldGrid superposition_field(const StateVector& psi, const OpticsConfig& cfg);

/// Entrywise argument; arg(0) is defined as 0.
PhaseMask phase_mask_of(const FieldGrid& field);

/// Multiplies by exp(+i mask), or exp(-i mask) when `conjugate` is set.
FieldGrid apply_phase_mask(const FieldGrid& field, const PhaseMask& mask, bool conjugate);

/// Multiplies by a real amplitude transmittance.
FieldGrid apply_amplitude(const FieldGrid& field, const RealGrid& amplitude);

/// Centered unitary 2-D DFT: one ideal lens, front to back focal plane.
FieldGrid lens_fourier(const FieldGrid& field);

/// Two lenses: the image of the mask plane, inverted through the origin.
FieldGrid four_f_image(const FieldGrid& field);

/// Fraunhofer propagation to the fiber coupler (quadratic phase dropped).
FieldGrid farfield(const FieldGrid& field);

/// (x, y) -> (-x, -y) on the periodic grid.
FieldGrid parity_flip(const FieldGrid& field);

/// Overlap with the normalized fiber Gaussian; |result|^2 is the coupling
/// probability.
Complex fiber_overlap(const FieldGrid& field, const OpticsConfig& cfg);

/// Field leaving the input SLM for state psi.
FieldGrid prepared_field(const StateVector& psi, const OpticsConfig& cfg, Modulation modulation);

/// Hologram on the measurement SLM that projects onto `meas`: the conjugate
/// of the measurement mode as it appears in the image plane. Ideal
/// modulation adds the amplitude that converts that mode into the
/// back-propagated fiber mode.
struct MeasurementHologram {
  PhaseMask phase;
  RealGrid amplitude;  // empty for phase-only modulation
};

MeasurementHologram measurement_hologram(const StateVector& meas, const OpticsConfig& cfg,
                                         Modulation modulation);

/// Full chain: prepare -> 4-f image -> conjugate hologram -> far field ->
/// fiber coupling.
double optical_projection_probability(const StateVector& input, const StateVector& meas,
                                      const OpticsConfig& cfg, Modulation modulation);

/// The same chain with the measurement holograms computed once.
class OpticalMeasurement {
 public:
  OpticalMeasurement(const std::vector<StateVector>& measurements, OpticsConfig cfg,
                     Modulation modulation);

  /// Coupling probability onto every measurement vector for one input.
  Eigen::VectorXd probabilities(const StateVector& input) const;

  /// Probabilities for the channel output eps(|input><input|), evaluated
  /// Kraus branch by Kraus branch.
  Eigen::VectorXd channel_probabilities(const KrausChannel& channel,
                                        const StateVector& input) const;

  const OpticsConfig& config() const noexcept { return cfg_; }

 private:
  OpticsConfig cfg_;
  Modulation modulation_;
  std::vector<MeasurementHologram> holograms_;
};

ProbabilityTable optical_probability_table(const KrausChannel& channel,
                                           const MeasurementSettings& settings,
                                           const OpticsConfig& cfg, Modulation modulation);

}  // namespace qmem::optics
