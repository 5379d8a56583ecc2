#pragma once

#include "qmem/qudit.hpp"

namespace qmem {

KrausChannel identity_channel(int d);

/// Maps every input to zero; useful for background-only simulations.
KrausChannel null_channel(int d);

/// eps(rho) = (1 - p) rho + p Tr(rho) I/d, built from the d^2 clock-and-shift
/// (Weyl) operators.
KrausChannel depolarizing_channel(int d, double p);

/// eps(rho) = (1 - p) rho + p diag(rho).
KrausChannel dephasing_channel(int d, double p);

/// Single unitary diag(1, ..., 1, e^{i theta}).
KrausChannel phase_unitary_channel(int d, double theta);

/// Weyl operator X^a Z^b (shift by a, clock phase b).
CMatrix weyl_operator(int d, int a, int b);

}  // namespace qmem
