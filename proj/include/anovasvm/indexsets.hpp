#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace anovasvm {

enum class BasisKind { cosine, haar };

const char* basis_kind_name(BasisKind kind) noexcept;  // "cos" / "haar"
BasisKind parse_basis_kind(std::string_view text);

/// Ordered set of 1-based coordinate indices u ⊆ {1,…,d}.
class AnovaSubset {
public:
  AnovaSubset() = default;
  explicit AnovaSubset(std::vector<int> dims);
  AnovaSubset(std::initializer_list<int> dims) : AnovaSubset(std::vector<int>(dims)) {}

  /// "-" (or empty text) is the empty subset, otherwise dims joined by '+', e.g. "2+3".
  static AnovaSubset parse(std::string_view text);
  std::string to_string() const;

  const std::vector<int>& dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return dims_.size(); }
  bool empty() const noexcept { return dims_.empty(); }
  bool contains(int dim) const noexcept;
  int max_dim() const noexcept { return dims_.empty() ? 0 : dims_.back(); }

  friend bool operator==(const AnovaSubset&, const AnovaSubset&) = default;
  // canonical order: cardinality first, then lexicographic
  friend bool operator<(const AnovaSubset& a, const AnovaSubset& b);

private:
  std::vector<int> dims_;
};

/// A family of ANOVA subsets in canonical order.
class SubsetFamily {
public:
  SubsetFamily(int dimension, std::vector<AnovaSubset> subsets,
               std::optional<int> superposition = std::nullopt);

  int dimension() const noexcept { return dimension_; }
  const std::vector<AnovaSubset>& subsets() const noexcept { return subsets_; }
  std::optional<int> superposition() const noexcept { return superposition_; }
  std::size_t size() const noexcept { return subsets_.size(); }
  std::optional<std::size_t> index_of(const AnovaSubset& u) const;
  bool contains(const AnovaSubset& u) const { return index_of(u).has_value(); }

private:
  int dimension_;
  std::vector<AnovaSubset> subsets_;
  std::optional<int> superposition_;
};

/// U_{d_s}: the empty set plus every subset of cardinality <= d_s.
SubsetFamily enumerate_subsets(int dimension, int superposition);

/// Index set of a single ANOVA term, together with its enumeration.
///
/// Cosine terms enumerate frequencies k restricted to u, k_i in
/// {1,…,N_i-1}, lexicographically. Haar terms enumerate level vectors
/// j >= 0 on u with sum_i j_i / N_i <= 1, ordered by |j|_1 then
/// lexicographically; each level contributes the shifts of K_j in
/// lexicographic order. The empty subset has exactly one entry.
class TermIndexSet {
public:
  static TermIndexSet cosine(AnovaSubset subset, std::vector<int> bandwidth);
  static TermIndexSet wavelet(AnovaSubset subset, std::vector<int> bandwidth);

  BasisKind kind() const noexcept { return kind_; }
  const AnovaSubset& subset() const noexcept { return subset_; }
  const std::vector<int>& bandwidth() const noexcept { return bandwidth_; }
  std::size_t size() const noexcept { return size_; }

  // cosine entries
  std::span<const int> frequency(std::size_t entry) const;

  // haar entries
  std::size_t level_count() const noexcept { return level_offsets_.size(); }
  std::span<const int> level(std::size_t level_index) const;
  std::size_t level_offset(std::size_t level_index) const { return level_offsets_[level_index]; }
  std::size_t level_of(std::size_t entry) const;
  std::span<const int> shift(std::size_t entry) const;

  friend bool operator==(const TermIndexSet&, const TermIndexSet&) = default;

private:
  TermIndexSet() = default;

  BasisKind kind_ = BasisKind::cosine;
  AnovaSubset subset_;
  std::vector<int> bandwidth_;
  std::size_t size_ = 0;
  std::vector<int> entries_;  // cosine frequencies or haar shifts, stride |u|
  std::vector<int> levels_;   // haar level vectors, stride |u|
  std::vector<std::size_t> level_offsets_;
};

struct BlockRange {
  std::size_t offset;
  std::size_t length;
  friend bool operator==(const BlockRange&, const BlockRange&) = default;
};

/// Disjoint union of term index sets; fixes the coefficient-vector layout.
class GroupedIndexSet {
public:
  GroupedIndexSet() = default;  // empty layout, dimension 0
  GroupedIndexSet(int dimension, BasisKind kind, std::vector<TermIndexSet> terms);

  int dimension() const noexcept { return dimension_; }
  BasisKind kind() const noexcept { return kind_; }
  const std::vector<TermIndexSet>& terms() const noexcept { return terms_; }
  const std::vector<std::size_t>& offsets() const noexcept { return offsets_; }
  std::size_t cardinality() const noexcept { return cardinality_; }

  BlockRange block(std::size_t term) const { return {offsets_[term], terms_[term].size()}; }
  BlockRange block_of(const AnovaSubset& u) const;
  std::optional<std::size_t> term_index(const AnovaSubset& u) const;

  struct Location {
    std::size_t term;
    std::size_t entry;
  };
  Location locate(std::size_t position) const;

  SubsetFamily family() const;

  friend bool operator==(const GroupedIndexSet&, const GroupedIndexSet&) = default;

private:
  int dimension_ = 0;
  BasisKind kind_ = BasisKind::cosine;
  std::vector<TermIndexSet> terms_;
  std::vector<std::size_t> offsets_;
  std::size_t cardinality_ = 0;
};

/// Per-subset bandwidth vectors, parallel to family.subsets().
using Bandwidths = std::vector<std::vector<int>>;

/// Bandwidth (N, …, N) for every subset of cardinality s, taken from
/// per_order[s-1]; the empty subset gets an empty vector.
Bandwidths bandwidths_by_order(const SubsetFamily& family, std::span<const int> per_order);

GroupedIndexSet build_cosine_set(const SubsetFamily& family, const Bandwidths& bandwidths);
GroupedIndexSet build_wavelet_set(const SubsetFamily& family, const Bandwidths& bandwidths);
GroupedIndexSet build_index_set(BasisKind kind, const SubsetFamily& family,
                                const Bandwidths& bandwidths);

inline std::size_t cardinality(const GroupedIndexSet& set) noexcept { return set.cardinality(); }

}  // namespace anovasvm
