#pragma once

#include <cstddef>
#include <vector>

#include "anovasvm/indexsets.hpp"
#include "anovasvm/transform.hpp"

namespace anovasvm {

struct GsiEntry {
  AnovaSubset subset;
  double rho = 0.0;
};

/// Global sensitivity indices of a fitted coefficient vector, one entry per
/// nonempty term, ranked by decreasing rho (ties keep subset order).
struct GsiReport {
  int dimension = 0;
  std::vector<GsiEntry> entries;
  double total_variance = 0.0;
  bool degenerate = false;

  double rho(const AnovaSubset& u) const;  // 0 for subsets not in the report
};

GsiReport gsi(const GroupedIndexSet& set, const Vector& coeffs);

/// {empty} together with every u whose rho exceeds eps, canonically ordered.
SubsetFamily active_set(const GsiReport& report, double eps);

struct ConfusionCounts {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::size_t total() const noexcept { return tp + tn + fp + fn; }
};

ConfusionCounts confusion(const Vector& labels, const Vector& predictions);
double classification_accuracy(const ConfusionCounts& counts);
double classification_accuracy(const Vector& labels, const Vector& predictions);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0,0) to (1,1)
  double auc = 0.0;
};

RocCurve roc_auc(const Vector& scores, const Vector& labels);

}  // namespace anovasvm
