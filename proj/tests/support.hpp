#ifndef KCLF_TESTS_SUPPORT_HPP
#define KCLF_TESTS_SUPPORT_HPP

#include "kclf/vectorfield.hpp"
#include "oracles.hpp"

namespace support {

inline kclf::PolyVectorField to_field(const oracle::Field& F) {
  std::vector<kclf::Coefficient> cs;
  for (std::size_t l = 0; l < F.size(); ++l)
    for (const auto& [e, c] : F[l]) cs.push_back({static_cast<int>(l), kclf::MultiIndex(e), c});
  return kclf::make_field(static_cast<int>(F.size()), cs);
}

inline oracle::Field from_field(const kclf::PolyVectorField& F) {
  oracle::Field out(F.dimension());
  for (int l = 0; l < F.dimension(); ++l)
    for (const auto& [a, c] : F.component(l).terms()) out[l][a.exponents()] = c;
  return out;
}

// Max coefficient difference between two fields.
inline double field_distance(const oracle::Field& a, const oracle::Field& b) {
  double worst = 0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    for (const auto& [e, c] : a[l]) worst = std::max(worst, std::abs(c - oracle::coeff(b[l], e)));
    for (const auto& [e, c] : b[l]) worst = std::max(worst, std::abs(c - oracle::coeff(a[l], e)));
  }
  return worst;
}

}  // namespace support

#endif  // KCLF_TESTS_SUPPORT_HPP
