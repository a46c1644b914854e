#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssdm/labelmap.hpp"

namespace ssdm {

// Rows are ground truth, columns are prediction; ignore_index pixels are not
// counted. Supports entrywise merge so tiles can be evaluated independently.
struct ConfusionMatrix {
  int64_t num_classes = 0;
  std::vector<uint64_t> counts;  // K*K row-major

  explicit ConfusionMatrix(int64_t k)
      : num_classes(k), counts(static_cast<size_t>(k * k), 0) {}

  uint64_t& at(int64_t gt, int64_t pred) {
    return counts[static_cast<size_t>(gt * num_classes + pred)];
  }
  uint64_t at(int64_t gt, int64_t pred) const {
    return counts[static_cast<size_t>(gt * num_classes + pred)];
  }
  uint64_t total() const;
  void merge(const ConfusionMatrix& other);
};

ConfusionMatrix confusion(const LabelMap& gt, const LabelMap& pred, int64_t num_classes,
                          int ignore_index = kIgnoreIndex);

// OA, mIoU, mAcc and the per-class table. Classes with tp+fp+fn == 0 are
// excluded from mIoU; classes with tp+fn == 0 are excluded from mAcc.
struct MetricSummary {
  double oa = 0.0;
  double miou = 0.0;
  double macc = 0.0;
  std::vector<double> class_iou;   // NaN where excluded
  std::vector<double> class_acc;   // NaN where excluded
  std::vector<int> evaluated_classes;  // classes contributing to mIoU
};

MetricSummary compute_metrics(const ConfusionMatrix& cm);

// Number of 4-connected components per class value in [0, num_classes).
std::vector<int64_t> count_components_by_class(const LabelMap& map, int64_t num_classes);

// (total components of pred) / (total components of gt); 1.0 means the
// prediction is exactly as fragmented as the truth.
double fragmentation_index(const LabelMap& gt, const LabelMap& pred,
                           int64_t num_classes);

// Full evaluation record for one run. Percent formatting happens only at the
// presentation layer; these fields stay as fractions in [0,1].
struct SegReport {
  std::string config_hash;
  uint64_t seed = 0;
  std::string variant;
  int64_t num_classes = 0;
  MetricSummary metrics;
  double fragmentation = 0.0;
  int64_t pred_components = 0;
  int64_t gt_components = 0;
  uint64_t pixels = 0;
  double wall_time_s = 0.0;  // not serialized; reports must be byte-reproducible
};

std::string seg_report_to_json(const SegReport& report);

}  // namespace ssdm
