#include "ssdm/metrics.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "ssdm/errors.hpp"

namespace ssdm {

uint64_t ConfusionMatrix::total() const {
  uint64_t t = 0;
  for (uint64_t v : counts) t += v;
  return t;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.num_classes != num_classes) {
    throw DimensionError("confusion merge: class counts differ");
  }
  for (size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

ConfusionMatrix confusion(const LabelMap& gt, const LabelMap& pred,
                          int64_t num_classes, int ignore_index) {
  if (gt.height != pred.height || gt.width != pred.width) {
    throw DimensionError("confusion: gt and prediction sizes differ");
  }
  ConfusionMatrix cm(num_classes);
  for (size_t i = 0; i < gt.values.size(); ++i) {
    const int g = gt.values[i];
    if (g == ignore_index) continue;
    const int p = pred.values[i];
    if (g >= num_classes || (p >= num_classes && p != ignore_index)) {
      throw ValidationError("confusion: label " + std::to_string(std::max(g, p)) +
                            " out of range for " + std::to_string(num_classes) +
                            " classes");
    }
    if (p == ignore_index) continue;
    ++cm.at(g, p);
  }
  return cm;
}

MetricSummary compute_metrics(const ConfusionMatrix& cm) {
  const int64_t k = cm.num_classes;
  const uint64_t total = cm.total();
  if (total == 0) throw ValidationError("compute_metrics: empty confusion matrix");

  MetricSummary s;
  s.class_iou.assign(static_cast<size_t>(k), std::numeric_limits<double>::quiet_NaN());
  s.class_acc.assign(static_cast<size_t>(k), std::numeric_limits<double>::quiet_NaN());

  uint64_t trace = 0;
  double iou_sum = 0.0, acc_sum = 0.0;
  int64_t iou_n = 0, acc_n = 0;
  for (int64_t c = 0; c < k; ++c) {
    const uint64_t tp = cm.at(c, c);
    trace += tp;
    uint64_t fp = 0, fn = 0;
    for (int64_t o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += cm.at(o, c);
      fn += cm.at(c, o);
    }
    if (tp + fp + fn > 0) {
      s.class_iou[c] = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
      iou_sum += s.class_iou[c];
      ++iou_n;
      s.evaluated_classes.push_back(static_cast<int>(c));
    }
    if (tp + fn > 0) {
      s.class_acc[c] = static_cast<double>(tp) / static_cast<double>(tp + fn);
      acc_sum += s.class_acc[c];
      ++acc_n;
    }
  }
  s.oa = static_cast<double>(trace) / static_cast<double>(total);
  s.miou = iou_n > 0 ? iou_sum / static_cast<double>(iou_n) : 0.0;
  s.macc = acc_n > 0 ? acc_sum / static_cast<double>(acc_n) : 0.0;
  return s;
}

std::vector<int64_t> count_components_by_class(const LabelMap& map,
                                               int64_t num_classes) {
  std::vector<int64_t> counts(static_cast<size_t>(num_classes), 0);
  const int64_t h = map.height, w = map.width;
  std::vector<uint8_t> visited(map.values.size(), 0);
  std::vector<int64_t> stack;
  for (int64_t start = 0; start < h * w; ++start) {
    if (visited[start]) continue;
    const uint8_t cls = map.values[static_cast<size_t>(start)];
    if (cls >= num_classes) {
      visited[start] = 1;  // ignore pixels form no component
      continue;
    }
    ++counts[cls];
    stack.clear();
    stack.push_back(start);
    visited[start] = 1;
    while (!stack.empty()) {
      const int64_t p = stack.back();
      stack.pop_back();
      const int64_t y = p / w, x = p % w;
      const int64_t neighbors[4] = {p - w, p + w, p - 1, p + 1};
      const bool valid[4] = {y > 0, y + 1 < h, x > 0, x + 1 < w};
      for (int n = 0; n < 4; ++n) {
        if (!valid[n]) continue;
        const int64_t q = neighbors[n];
        if (!visited[q] && map.values[static_cast<size_t>(q)] == cls) {
          visited[q] = 1;
          stack.push_back(q);
        }
      }
    }
  }
  return counts;
}

double fragmentation_index(const LabelMap& gt, const LabelMap& pred,
                           int64_t num_classes) {
  const auto gt_counts = count_components_by_class(gt, num_classes);
  const auto pred_counts = count_components_by_class(pred, num_classes);
  int64_t gt_total = 0, pred_total = 0;
  for (int64_t c : gt_counts) gt_total += c;
  for (int64_t c : pred_counts) pred_total += c;
  if (gt_total == 0) throw ValidationError("fragmentation_index: empty ground truth");
  return static_cast<double>(pred_total) / static_cast<double>(gt_total);
}

std::string seg_report_to_json(const SegReport& report) {
  nlohmann::ordered_json j;
  j["format"] = "ssdm-segreport-v1";
  j["config_hash"] = report.config_hash;
  j["seed"] = report.seed;
  j["variant"] = report.variant;
  j["num_classes"] = report.num_classes;
  j["oa"] = report.metrics.oa;
  j["miou"] = report.metrics.miou;
  j["macc"] = report.metrics.macc;
  auto per_class = nlohmann::ordered_json::array();
  for (int64_t c = 0; c < report.num_classes; ++c) {
    nlohmann::ordered_json row;
    row["class"] = c;
    const double iou = report.metrics.class_iou[static_cast<size_t>(c)];
    const double acc = report.metrics.class_acc[static_cast<size_t>(c)];
    if (std::isnan(acc)) row["acc"] = nullptr; else row["acc"] = acc;
    if (std::isnan(iou)) row["iou"] = nullptr; else row["iou"] = iou;
    per_class.push_back(std::move(row));
  }
  j["per_class"] = std::move(per_class);
  j["evaluated_classes"] = report.metrics.evaluated_classes;
  j["fragmentation_index"] = report.fragmentation;
  j["pred_components"] = report.pred_components;
  j["gt_components"] = report.gt_components;
  j["pixels"] = report.pixels;
  return j.dump(2) + "\n";
}

}  // namespace ssdm
