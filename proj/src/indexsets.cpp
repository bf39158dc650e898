#include "anovasvm/indexsets.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "anovasvm/errors.hpp"

namespace anovasvm {

const char* basis_kind_name(BasisKind kind) noexcept {
  return kind == BasisKind::cosine ? "cos" : "haar";
}

BasisKind parse_basis_kind(std::string_view text) {
  if (text == "cos" || text == "cosine") return BasisKind::cosine;
  if (text == "haar" || text == "chui" || text == "wavelet") return BasisKind::haar;
  fail(ErrorCode::invalid_argument, "unknown basis kind '" + std::string(text) + "'");
}

// ---------------------------------------------------------------- AnovaSubset

AnovaSubset::AnovaSubset(std::vector<int> dims) : dims_(std::move(dims)) {
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (dims_[i] < 1) fail(ErrorCode::invalid_argument, "subset dims are 1-based");
    if (i > 0 && dims_[i] <= dims_[i - 1])
      fail(ErrorCode::invalid_argument, "subset dims must be strictly increasing");
  }
}

AnovaSubset AnovaSubset::parse(std::string_view text) {
  if (text.empty() || text == "-") return {};
  std::vector<int> dims;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto next = text.find('+', pos);
    const auto token = text.substr(pos, next == std::string_view::npos ? text.npos : next - pos);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
      fail(ErrorCode::parse_error, "malformed subset '" + std::string(text) + "'");
    dims.push_back(value);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  std::sort(dims.begin(), dims.end());
  return AnovaSubset(std::move(dims));
}

std::string AnovaSubset::to_string() const {
  if (dims_.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (i) out += '+';
    out += std::to_string(dims_[i]);
  }
  return out;
}

bool AnovaSubset::contains(int dim) const noexcept {
  return std::binary_search(dims_.begin(), dims_.end(), dim);
}

bool operator<(const AnovaSubset& a, const AnovaSubset& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a.dims() < b.dims();
}

// --------------------------------------------------------------- SubsetFamily

SubsetFamily::SubsetFamily(int dimension, std::vector<AnovaSubset> subsets,
                           std::optional<int> superposition)
    : dimension_(dimension), subsets_(std::move(subsets)), superposition_(superposition) {
  if (dimension_ < 1) fail(ErrorCode::invalid_argument, "dimension must be >= 1");
  std::sort(subsets_.begin(), subsets_.end());
  for (std::size_t i = 0; i < subsets_.size(); ++i) {
    if (subsets_[i].max_dim() > dimension_)
      fail(ErrorCode::invalid_argument, "subset " + subsets_[i].to_string() +
                                            " exceeds dimension " + std::to_string(dimension_));
    if (i > 0 && subsets_[i] == subsets_[i - 1])
      fail(ErrorCode::invalid_argument, "duplicate subset " + subsets_[i].to_string());
  }
}

std::optional<std::size_t> SubsetFamily::index_of(const AnovaSubset& u) const {
  const auto it = std::lower_bound(subsets_.begin(), subsets_.end(), u);
  if (it == subsets_.end() || !(*it == u)) return std::nullopt;
  return static_cast<std::size_t>(it - subsets_.begin());
}

namespace {

void add_combinations(int d, int size, int start, std::vector<int>& current,
                      std::vector<AnovaSubset>& out) {
  if (static_cast<int>(current.size()) == size) {
    out.emplace_back(current);
    return;
  }
  for (int i = start; i <= d; ++i) {
    current.push_back(i);
    add_combinations(d, size, i + 1, current, out);
    current.pop_back();
  }
}

}  // namespace

SubsetFamily enumerate_subsets(int dimension, int superposition) {
  if (dimension < 1) fail(ErrorCode::invalid_argument, "dimension must be >= 1");
  if (superposition < 1 || superposition > dimension)
    fail(ErrorCode::invalid_argument, "superposition dimension must lie in [1, d]");
  std::vector<AnovaSubset> subsets;
  subsets.emplace_back();
  std::vector<int> current;
  for (int s = 1; s <= superposition; ++s) add_combinations(dimension, s, 1, current, subsets);
  return SubsetFamily(dimension, std::move(subsets), superposition);
}

// --------------------------------------------------------------- TermIndexSet

namespace {

// Advances a mixed-radix counter (last digit fastest). Returns false on wrap.
bool next_tuple(std::vector<int>& digits, std::span<const int> lo, std::span<const int> hi) {
  for (std::size_t i = digits.size(); i-- > 0;) {
    if (digits[i] < hi[i]) {
      ++digits[i];
      return true;
    }
    digits[i] = lo[i];
  }
  return false;
}

// sum_i j_i / N_i <= 1 in exact integer arithmetic; N_i = 0 admits only j_i = 0.
bool hyperbolic_admissible(std::span<const int> levels, std::span<const int> bandwidth) {
  long long common = 1;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (bandwidth[i] == 0) {
      if (levels[i] != 0) return false;
    } else {
      common *= bandwidth[i];
    }
  }
  long long total = 0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (bandwidth[i] == 0) continue;
    total += static_cast<long long>(levels[i]) * (common / bandwidth[i]);
  }
  return total <= common;
}

}  // namespace

TermIndexSet TermIndexSet::cosine(AnovaSubset subset, std::vector<int> bandwidth) {
  if (bandwidth.size() != subset.size())
    fail(ErrorCode::invalid_argument, "bandwidth length does not match subset " + subset.to_string());
  for (int n : bandwidth)
    if (n < 2 || n % 2 != 0)
      fail(ErrorCode::invalid_argument, "cosine bandwidths must be even integers >= 2 (subset " +
                                            subset.to_string() + ")");
  TermIndexSet t;
  t.kind_ = BasisKind::cosine;
  t.subset_ = std::move(subset);
  t.bandwidth_ = std::move(bandwidth);
  const std::size_t arity = t.subset_.size();
  if (arity == 0) {
    t.size_ = 1;
    return t;
  }
  std::vector<int> lo(arity, 1), hi(arity);
  for (std::size_t i = 0; i < arity; ++i) hi[i] = t.bandwidth_[i] - 1;
  std::vector<int> k = lo;
  do {
    t.entries_.insert(t.entries_.end(), k.begin(), k.end());
    ++t.size_;
  } while (next_tuple(k, lo, hi));
  return t;
}

TermIndexSet TermIndexSet::wavelet(AnovaSubset subset, std::vector<int> bandwidth) {
  if (bandwidth.size() != subset.size())
    fail(ErrorCode::invalid_argument, "bandwidth length does not match subset " + subset.to_string());
  for (int n : bandwidth)
    if (n < 0)
      fail(ErrorCode::invalid_argument, "wavelet bandwidths must be >= 0 (subset " +
                                            subset.to_string() + ")");
  TermIndexSet t;
  t.kind_ = BasisKind::haar;
  t.subset_ = std::move(subset);
  t.bandwidth_ = std::move(bandwidth);
  const std::size_t arity = t.subset_.size();
  if (arity == 0) {
    t.level_offsets_.push_back(0);
    t.size_ = 1;
    return t;
  }

  std::vector<std::vector<int>> admissible;
  std::vector<int> lo(arity, 0), hi(t.bandwidth_.begin(), t.bandwidth_.end());
  std::vector<int> j = lo;
  do {
    if (hyperbolic_admissible(j, t.bandwidth_)) admissible.push_back(j);
  } while (next_tuple(j, lo, hi));
  std::stable_sort(admissible.begin(), admissible.end(), [](const auto& a, const auto& b) {
    const int sa = std::accumulate(a.begin(), a.end(), 0);
    const int sb = std::accumulate(b.begin(), b.end(), 0);
    if (sa != sb) return sa < sb;
    return a < b;
  });

  for (const auto& level : admissible) {
    t.level_offsets_.push_back(t.size_);
    t.levels_.insert(t.levels_.end(), level.begin(), level.end());
    std::vector<int> klo(arity, 0), khi(arity);
    for (std::size_t i = 0; i < arity; ++i) khi[i] = (1 << level[i]) - 1;
    std::vector<int> k = klo;
    do {
      t.entries_.insert(t.entries_.end(), k.begin(), k.end());
      ++t.size_;
    } while (next_tuple(k, klo, khi));
  }
  return t;
}

std::span<const int> TermIndexSet::frequency(std::size_t entry) const {
  const std::size_t arity = subset_.size();
  return std::span<const int>(entries_).subspan(entry * arity, arity);
}

std::span<const int> TermIndexSet::level(std::size_t level_index) const {
  const std::size_t arity = subset_.size();
  return std::span<const int>(levels_).subspan(level_index * arity, arity);
}

std::size_t TermIndexSet::level_of(std::size_t entry) const {
  const auto it = std::upper_bound(level_offsets_.begin(), level_offsets_.end(), entry);
  return static_cast<std::size_t>(it - level_offsets_.begin()) - 1;
}

std::span<const int> TermIndexSet::shift(std::size_t entry) const {
  const std::size_t arity = subset_.size();
  return std::span<const int>(entries_).subspan(entry * arity, arity);
}

// ------------------------------------------------------------ GroupedIndexSet

GroupedIndexSet::GroupedIndexSet(int dimension, BasisKind kind, std::vector<TermIndexSet> terms)
    : dimension_(dimension), kind_(kind), terms_(std::move(terms)) {
  if (dimension_ < 1) fail(ErrorCode::invalid_argument, "dimension must be >= 1");
  offsets_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    if (t.kind() != kind_) fail(ErrorCode::invalid_argument, "term basis kind mismatch");
    if (t.subset().max_dim() > dimension_)
      fail(ErrorCode::invalid_argument, "term subset exceeds dimension");
    if (i > 0 && !(terms_[i - 1].subset() < t.subset()))
      fail(ErrorCode::invalid_argument, "terms must be distinct and in canonical subset order");
    offsets_.push_back(cardinality_);
    cardinality_ += t.size();
  }
}

std::optional<std::size_t> GroupedIndexSet::term_index(const AnovaSubset& u) const {
  const auto it = std::lower_bound(terms_.begin(), terms_.end(), u,
                                   [](const TermIndexSet& t, const AnovaSubset& s) { return t.subset() < s; });
  if (it == terms_.end() || !(it->subset() == u)) return std::nullopt;
  return static_cast<std::size_t>(it - terms_.begin());
}

BlockRange GroupedIndexSet::block_of(const AnovaSubset& u) const {
  const auto idx = term_index(u);
  if (!idx) fail(ErrorCode::not_found, "subset " + u.to_string() + " is not part of the index set");
  return block(*idx);
}

GroupedIndexSet::Location GroupedIndexSet::locate(std::size_t position) const {
  if (position >= cardinality_)
    fail(ErrorCode::index_error, "coefficient position " + std::to_string(position) +
                                     " out of range (cardinality " + std::to_string(cardinality_) + ")");
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), position);
  const auto term = static_cast<std::size_t>(it - offsets_.begin()) - 1;
  return {term, position - offsets_[term]};
}

SubsetFamily GroupedIndexSet::family() const {
  std::vector<AnovaSubset> subsets;
  subsets.reserve(terms_.size());
  for (const auto& t : terms_) subsets.push_back(t.subset());
  return SubsetFamily(dimension_, std::move(subsets));
}

// ------------------------------------------------------------------- builders

Bandwidths bandwidths_by_order(const SubsetFamily& family, std::span<const int> per_order) {
  Bandwidths out;
  out.reserve(family.size());
  for (const auto& u : family.subsets()) {
    if (u.empty()) {
      out.emplace_back();
      continue;
    }
    if (u.size() > per_order.size())
      fail(ErrorCode::invalid_argument, "no bandwidth given for subsets of order " +
                                            std::to_string(u.size()));
    out.emplace_back(u.size(), per_order[u.size() - 1]);
  }
  return out;
}

GroupedIndexSet build_index_set(BasisKind kind, const SubsetFamily& family,
                                const Bandwidths& bandwidths) {
  if (bandwidths.size() != family.size())
    fail(ErrorCode::invalid_argument, "need one bandwidth vector per subset");
  std::vector<TermIndexSet> terms;
  terms.reserve(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto& u = family.subsets()[i];
    terms.push_back(kind == BasisKind::cosine ? TermIndexSet::cosine(u, bandwidths[i])
                                              : TermIndexSet::wavelet(u, bandwidths[i]));
  }
  return GroupedIndexSet(family.dimension(), kind, std::move(terms));
}

GroupedIndexSet build_cosine_set(const SubsetFamily& family, const Bandwidths& bandwidths) {
  return build_index_set(BasisKind::cosine, family, bandwidths);
}

GroupedIndexSet build_wavelet_set(const SubsetFamily& family, const Bandwidths& bandwidths) {
  return build_index_set(BasisKind::haar, family, bandwidths);
}

}  // namespace anovasvm
