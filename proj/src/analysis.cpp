#include "anovasvm/analysis.hpp"

#include <algorithm>
#include <numeric>

#include "anovasvm/errors.hpp"

namespace anovasvm {

double GsiReport::rho(const AnovaSubset& u) const {
  for (const auto& e : entries)
    if (e.subset == u) return e.rho;
  return 0.0;
}

GsiReport gsi(const GroupedIndexSet& set, const Vector& coeffs) {
  if (coeffs.size() != static_cast<Eigen::Index>(set.cardinality()))
    fail(ErrorCode::invalid_argument, "coefficient vector does not match the index set");
  GsiReport report;
  report.dimension = set.dimension();
  std::vector<double> block_energy;
  for (std::size_t t = 0; t < set.terms().size(); ++t) {
    const auto& u = set.terms()[t].subset();
    if (u.empty()) continue;
    const auto b = set.block(t);
    const double e =
        coeffs.segment(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.length)).squaredNorm();
    report.entries.push_back({u, 0.0});
    block_energy.push_back(e);
    report.total_variance += e;
  }
  report.degenerate = !(report.total_variance > 0);
  if (!report.degenerate)
    for (std::size_t i = 0; i < block_energy.size(); ++i)
      report.entries[i].rho = block_energy[i] / report.total_variance;
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const GsiEntry& a, const GsiEntry& b) { return a.rho > b.rho; });
  return report;
}

SubsetFamily active_set(const GsiReport& report, double eps) {
  if (!(eps > 0)) fail(ErrorCode::invalid_argument, "eps must be positive");
  std::vector<AnovaSubset> subsets{AnovaSubset{}};
  for (const auto& e : report.entries)
    if (e.rho > eps) subsets.push_back(e.subset);
  return SubsetFamily(std::max(report.dimension, 1), std::move(subsets));
}

ConfusionCounts confusion(const Vector& labels, const Vector& predictions) {
  if (labels.size() == 0) fail(ErrorCode::invalid_argument, "cannot score an empty prediction");
  if (labels.size() != predictions.size())
    fail(ErrorCode::invalid_argument, "labels and predictions differ in length");
  ConfusionCounts c;
  for (Eigen::Index j = 0; j < labels.size(); ++j) {
    const bool actual = labels[j] > 0, predicted = predictions[j] > 0;
    if (actual && predicted) ++c.tp;
    else if (!actual && !predicted) ++c.tn;
    else if (predicted) ++c.fp;
    else ++c.fn;
  }
  return c;
}

double classification_accuracy(const ConfusionCounts& counts) {
  if (counts.total() == 0) fail(ErrorCode::invalid_argument, "cannot score an empty prediction");
  return static_cast<double>(counts.tp + counts.tn) / static_cast<double>(counts.total());
}

double classification_accuracy(const Vector& labels, const Vector& predictions) {
  return classification_accuracy(confusion(labels, predictions));
}

RocCurve roc_auc(const Vector& scores, const Vector& labels) {
  if (scores.size() != labels.size())
    fail(ErrorCode::invalid_argument, "scores and labels differ in length");
  if (!scores.allFinite()) fail(ErrorCode::invalid_argument, "scores contain non-finite values");
  std::size_t pos = 0, neg = 0;
  for (Eigen::Index j = 0; j < labels.size(); ++j) (labels[j] > 0 ? pos : neg)++;
  if (pos == 0 || neg == 0) fail(ErrorCode::invalid_argument, "ROC needs both classes present");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  double area = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    // every distinct score is one threshold; tied scores move diagonally
    const double s = scores[order[i]];
    std::size_t dtp = 0, dfp = 0;
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] > 0 ? dtp : dfp)++;
    area += static_cast<double>(dfp) * (static_cast<double>(tp) + 0.5 * static_cast<double>(dtp));
    tp += dtp;
    fp += dfp;
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos)});
  }
  curve.auc = area / (static_cast<double>(pos) * static_cast<double>(neg));
  return curve;
}

}  // namespace anovasvm
