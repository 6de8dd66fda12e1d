#include "kclf/multiindex.hpp"

#include <numeric>
#include <stdexcept>

namespace kclf {

MultiIndex::MultiIndex(std::vector<int> exponents)
    : exponents_(std::move(exponents)) {
  for (int e : exponents_) {
    if (e < 0) throw std::invalid_argument("MultiIndex: negative exponent");
    degree_ += e;
  }
}

MultiIndex::MultiIndex(std::initializer_list<int> exponents)
    : MultiIndex(std::vector<int>(exponents)) {}

MultiIndex MultiIndex::unit(int n, int l) {
  std::vector<int> e(n, 0);
  e.at(l) = 1;
  return MultiIndex(std::move(e));
}

bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  const int n = std::min(a.dimension(), b.dimension());
  for (int j = 0; j < n; ++j)
    if (a[j] != b[j]) return a[j] > b[j];
  return false;
}

std::size_t MultiIndexHash::operator()(const MultiIndex& a) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (int e : a.exponents()) {
    h ^= static_cast<std::size_t>(e) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
  if (a.dimension() != b.dimension())
    throw std::invalid_argument("MultiIndex: dimension mismatch");
  std::vector<int> e(a.exponents());
  for (int l = 0; l < a.dimension(); ++l) e[l] += b[l];
  return MultiIndex(std::move(e));
}

std::optional<MultiIndex> shift_index(const MultiIndex& alpha, int l,
                                      const MultiIndex& gamma) {
  if (alpha.dimension() != gamma.dimension())
    throw std::invalid_argument("shift_index: dimension mismatch");
  if (l < 0 || l >= alpha.dimension())
    throw std::out_of_range("shift_index: component out of range");
  std::vector<int> e(alpha.dimension());
  for (int i = 0; i < alpha.dimension(); ++i) {
    e[i] = gamma[i] - alpha[i] + (i == l ? 1 : 0);
    if (e[i] < 0) return std::nullopt;
  }
  return MultiIndex(std::move(e));
}

std::size_t basis_size(int n, int max_degree) {
  // C(N + n, n), computed incrementally to stay exact.
  std::size_t c = 1;
  for (int i = 1; i <= n; ++i) c = c * static_cast<std::size_t>(max_degree + i) / i;
  return c;
}

namespace {

// Appends all exponent vectors of total degree `remaining` over slots
// [slot, n) in descending lexicographic order.
void enumerate_degree(std::vector<int>& current, int slot, int remaining,
                      std::vector<MultiIndex>& out) {
  const int n = static_cast<int>(current.size());
  if (slot == n - 1) {
    current[slot] = remaining;
    out.emplace_back(current);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[slot] = e;
    enumerate_degree(current, slot + 1, remaining - e, out);
  }
  current[slot] = 0;
}

}  // namespace

MultiIndexBasis::MultiIndexBasis(int n, int max_degree)
    : n_(n), max_degree_(max_degree) {
  if (n < 1) throw std::invalid_argument("MultiIndexBasis: n must be >= 1");
  if (max_degree < 0)
    throw std::invalid_argument("MultiIndexBasis: max_degree must be >= 0");

  table_.reserve(basis_size(n, max_degree));
  offsets_.reserve(max_degree + 2);
  std::vector<int> current(n, 0);
  for (int d = 0; d <= max_degree; ++d) {
    offsets_.push_back(table_.size());
    enumerate_degree(current, 0, d, table_);
  }
  offsets_.push_back(table_.size());

  inverse_.reserve(table_.size());
  for (std::size_t k = 0; k < table_.size(); ++k) inverse_.emplace(table_[k], k);

  parents_.assign(table_.size(), {0, 0});
  for (std::size_t k = 1; k < table_.size(); ++k) {
    const MultiIndex& a = table_[k];
    int l = 0;
    while (a[l] == 0) ++l;
    std::vector<int> e(a.exponents());
    --e[l];
    parents_[k] = {inverse_.at(MultiIndex(std::move(e))), l};
  }
}

std::optional<std::size_t> MultiIndexBasis::index_of(const MultiIndex& alpha) const {
  if (alpha.dimension() != n_)
    throw std::invalid_argument("index_of: dimension mismatch");
  if (alpha.degree() > max_degree_) return std::nullopt;
  auto it = inverse_.find(alpha);
  if (it == inverse_.end()) return std::nullopt;
  return it->second;
}

}  // namespace kclf
