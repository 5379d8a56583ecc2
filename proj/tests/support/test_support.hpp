#pragma once

// Shared generators and independent oracles for the test suites. Nothing here
// calls into the code paths it is used to check.

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "qmem/optics.hpp"
#include "qmem/qudit.hpp"

namespace qmem::testing {

inline CMatrix random_complex(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = Complex(n(rng), n(rng));
  }
  return m;
}

inline CMatrix random_unitary(int n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<CMatrix> qr(random_complex(n, n, rng));
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR();
  for (int k = 0; k < n; ++k) q.col(k) *= std::polar(1.0, std::arg(r(k, k)));
  return q;
}

inline DensityMatrix random_density(int d, std::mt19937_64& rng) {
  const CMatrix g = random_complex(d, d, rng);
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix((rho + rho.adjoint()) * 0.5);
}

inline StateVector random_pure(int d, std::mt19937_64& rng) {
  return StateVector::normalized(random_complex(d, 1, rng).col(0));
}

/// Random trace-preserving channel: an isometry V (n d x d) cut into n
/// Kraus blocks.
inline KrausChannel random_cptp(int d, int n_kraus, std::mt19937_64& rng) {
  const CMatrix g = random_complex(n_kraus * d, d, rng);
  // polar factor of g: V = U W^dagger from the thin SVD g = U S W^dagger
  Eigen::JacobiSVD<CMatrix> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const CMatrix v = svd.matrixU() * svd.matrixV().adjoint();
  std::vector<CMatrix> ops;
  for (int k = 0; k < n_kraus; ++k) ops.push_back(v.block(k * d, 0, d, d));
  return KrausChannel(d, std::move(ops));
}

/// Uhlmann fidelity from the spectrum of the non-Hermitian product A B,
/// which shares its eigenvalues with sqrt(A) B sqrt(A). Uses the general
/// complex eigensolver rather than the Hermitian one. Inputs are
/// trace-normalized.
inline double fidelity_oracle(CMatrix a, CMatrix b) {
  a /= a.trace();
  b /= b.trace();
  Eigen::ComplexEigenSolver<CMatrix> es(a * b, false);
  const auto ev = es.eigenvalues();
  double emax = 0.0;
  for (int k = 0; k < ev.size(); ++k) emax = std::max(emax, ev(k).real());
  double t = 0.0;
  for (int k = 0; k < ev.size(); ++k) {
    if (ev(k).real() > 1e-12 * emax) t += std::sqrt(ev(k).real());
  }
  return t * t;
}

/// Net phase winding of a field along the square loop at Chebyshev radius
/// `half` samples around the grid centre, counter-clockwise in (x, y).
inline int winding_number(const optics::FieldGrid& f, int half) {
  const int c = f.size() / 2;
  std::vector<std::pair<int, int>> loop;  // (row, col) = (y, x)
  for (int x = -half; x < half; ++x) loop.emplace_back(c - half, c + x);
  for (int y = -half; y < half; ++y) loop.emplace_back(c + y, c + half);
  for (int x = half; x > -half; --x) loop.emplace_back(c + half, c + x);
  for (int y = half; y > -half; --y) loop.emplace_back(c + y, c - half);
  double total = 0.0;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const auto [r0, c0] = loop[k];
    const auto [r1, c1] = loop[(k + 1) % loop.size()];
    double d = std::arg(f(r1, c1)) - std::arg(f(r0, c0));
    while (d > std::numbers::pi) d -= 2 * std::numbers::pi;
    while (d <= -std::numbers::pi) d += 2 * std::numbers::pi;
    total += d;
  }
  return static_cast<int>(std::lround(total / (2 * std::numbers::pi)));
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace qmem::testing
