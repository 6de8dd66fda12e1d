#ifndef KCLF_BUILTIN_HPP
#define KCLF_BUILTIN_HPP

#include "kclf/vectorfield.hpp"

namespace kclf {

/// Pair on the bidisk: F1 = -a z and
/// F2 = (-a z1 + b (z1^2 - z1 z2^2), -a z2 + (b/2) z1 z2).
SwitchedFamily example1_family(double a, double b);

/// Complexified pair -x1 + mu^-1 sin^2(x1) x1^2 x2 and
/// -x1 + mu^-1 cos^2(x1) x1^2 x2 (second component -x2), Taylor
/// coefficients kept up to total degree `degree`, with exact tail l1 norms.
SwitchedFamily example2_family(double mu, int degree);

/// 1 + (cosh 2 + 1) / (2 mu), inverted: the closed-form radius.
double example2_closed_form_rho(double mu);

/// Linear pair whose Jacobians generate sl2: upper and lower shear around -I.
SwitchedFamily sl2_family();

/// Single linear field (-z1 + c z2, -z2): a coupled family used as a
/// negative control for perturbed weights.
SwitchedFamily linear_coupled_family(double c);

}  // namespace kclf

#endif  // KCLF_BUILTIN_HPP
