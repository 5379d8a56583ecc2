#include "qmem/channels.hpp"

#include <cmath>
#include <numbers>

namespace qmem {

namespace {

void require_probability(double p, const char* who) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, std::string(who) + ": p must lie in [0, 1]");
  }
}

}  // namespace

KrausChannel identity_channel(int d) { return KrausChannel(d, {CMatrix::Identity(d, d)}); }

KrausChannel null_channel(int d) { return KrausChannel(d, {}); }

CMatrix weyl_operator(int d, int a, int b) {
  CMatrix w = CMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const double phase = 2.0 * std::numbers::pi * b * k / d;
    w((k + a) % d, k) = std::polar(1.0, phase);
  }
  return w;
}

KrausChannel depolarizing_channel(int d, double p) {
  require_probability(p, "depolarizing_channel");
  std::vector<CMatrix> ops;
  if (p < 1.0) ops.push_back(std::sqrt(1.0 - p) * CMatrix::Identity(d, d));
  if (p > 0.0) {
    const double scale = std::sqrt(p) / d;
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) ops.push_back(scale * weyl_operator(d, a, b));
    }
  }
  return KrausChannel(d, std::move(ops));
}

KrausChannel dephasing_channel(int d, double p) {
  require_probability(p, "dephasing_channel");
  std::vector<CMatrix> ops;
  ops.push_back(std::sqrt(1.0 - p) * CMatrix::Identity(d, d));
  if (p > 0.0) {
    for (int k = 0; k < d; ++k) {
      CMatrix proj = CMatrix::Zero(d, d);
      proj(k, k) = std::sqrt(p);
      ops.push_back(std::move(proj));
    }
  }
  return KrausChannel(d, std::move(ops));
}

KrausChannel phase_unitary_channel(int d, double theta) {
  CMatrix u = CMatrix::Identity(d, d);
  u(d - 1, d - 1) = std::polar(1.0, theta);
  return KrausChannel(d, {u});
}

}  // namespace qmem
