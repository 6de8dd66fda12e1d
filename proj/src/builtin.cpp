#include "kclf/builtin.hpp"

#include <cmath>

namespace kclf {

SwitchedFamily example1_family(double a, double b) {
  PolyVectorField f1 = make_field(2, {{0, {1, 0}, -a}, {1, {0, 1}, -a}});
  PolyVectorField f2 = make_field(2, {{0, {1, 0}, -a},
                                      {0, {2, 0}, b},
                                      {0, {1, 2}, -b},
                                      {1, {0, 1}, -a},
                                      {1, {1, 1}, b / 2.0}});
  return SwitchedFamily({std::move(f1), std::move(f2)});
}

SwitchedFamily example2_family(double mu, int degree) {
  if (!(mu > 0.0)) throw std::invalid_argument("example2_family: mu must be positive");
  if (degree < 1) throw std::invalid_argument("example2_family: degree must be >= 1");
  std::vector<Coefficient> c1{{0, {1, 0}, -1.0}, {1, {0, 1}, -1.0}};
  std::vector<Coefficient> c2 = c1;
  if (degree >= 3) c2.push_back({0, {2, 1}, 1.0 / mu});
  // sin^2 x = sum_{p>=1} (-1)^(p+1) 2^(2p-1) x^(2p) / (2p)!, cos^2 = 1 - sin^2.
  double fact = 1.0;  // (2p)!
  for (int p = 1; 2 * p + 3 <= degree; ++p) {
    fact *= (2.0 * p - 1.0) * (2.0 * p);
    const double s = std::ldexp(1.0, 2 * p - 1) / fact / mu;
    const double sign = p % 2 == 1 ? 1.0 : -1.0;
    c1.push_back({0, {2 * p + 2, 1}, sign * s});
    c2.push_back({0, {2 * p + 2, 1}, -sign * s});
  }
  const double ch = std::cosh(2.0);
  PolyVectorField f1 = make_field(2, c1, {1.0 + (ch - 1.0) / (2.0 * mu), 1.0});
  PolyVectorField f2 = make_field(2, c2, {1.0 + (ch + 1.0) / (2.0 * mu), 1.0});
  return SwitchedFamily({std::move(f1), std::move(f2)});
}

double example2_closed_form_rho(double mu) {
  return 1.0 / (1.0 + (std::cosh(2.0) + 1.0) / (2.0 * mu));
}

SwitchedFamily sl2_family() {
  PolyVectorField f1 = make_field(2, {{0, {1, 0}, -1.0}, {0, {0, 1}, 1.0}, {1, {0, 1}, -1.0}});
  PolyVectorField f2 = make_field(2, {{0, {1, 0}, -1.0}, {1, {1, 0}, 1.0}, {1, {0, 1}, -1.0}});
  return SwitchedFamily({std::move(f1), std::move(f2)});
}

SwitchedFamily linear_coupled_family(double c) {
  return SwitchedFamily({make_field(2, {{0, {1, 0}, -1.0}, {0, {0, 1}, c}, {1, {0, 1}, -1.0}})});
}

}  // namespace kclf
