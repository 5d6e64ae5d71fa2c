#include "poselift/metrics.hpp"

#include <cmath>
#include <cstdio>

namespace poselift {

std::vector<double> per_joint_errors(const Pose3D& pred, const Pose3D& gt,
                                     const JointSchema& schema) {
  const Pose3D pa = root_align(pred, schema);
  const Pose3D ga = root_align(gt, schema);
  std::vector<double> errors(schema.size());
  for (int i = 0; i < schema.size(); ++i) {
    const Point3& p = pa.joints[i];
    const Point3& g = ga.joints[i];
    errors[i] = std::hypot(p.x - g.x, p.y - g.y, p.z - g.z);
  }
  return errors;
}

double mpjpe_protocol1(const Pose3D& pred, const Pose3D& gt, const JointSchema& schema) {
  const std::vector<double> errors = per_joint_errors(pred, gt, schema);
  double sum = 0.0;
  for (const double e : errors) sum += e;
  return sum / errors.size();
}

double pckh(const Pose2D& pred, const Pose2D& gt, const JointSchema& schema, double alpha) {
  if (pred.size() != schema.size() || gt.size() != schema.size())
    throw SchemaMismatch("pckh: joint count mismatch with schema " + schema.name);
  const Pixel2& head = gt.joints[schema.head_top_index];
  const Pixel2& neck = gt.joints[schema.neck_index];
  const double segment = std::hypot(head.u - neck.u, head.v - neck.v);
  if (segment == 0.0) throw ZeroHeadSegment("pckh: head_top equals neck in ground truth");
  const double threshold = alpha * segment;
  int hits = 0;
  for (int i = 0; i < schema.size(); ++i) {
    const double d = std::hypot(pred.joints[i].u - gt.joints[i].u,
                                pred.joints[i].v - gt.joints[i].v);
    if (d <= threshold) ++hits;
  }
  return static_cast<double>(hits) / schema.size();
}

Pck3dResult pck3d_auc(const Pose3D& pred, const Pose3D& gt, const JointSchema& schema,
                      double threshold_mm, int n_auc_steps) {
  const std::vector<double> errors = per_joint_errors(pred, gt, schema);
  // The root is pinned to zero error by the alignment; counting it would only
  // pad the score, so the fraction runs over the other joints.
  auto pck_at = [&](double threshold) {
    int hits = 0;
    for (int i = 0; i < schema.size(); ++i)
      if (i != schema.root_index && errors[i] <= threshold) ++hits;
    return static_cast<double>(hits) / (schema.size() - 1);
  };
  Pck3dResult out;
  out.pck = pck_at(threshold_mm);
  double acc = 0.0;
  for (int k = 1; k <= n_auc_steps; ++k) acc += pck_at(threshold_mm * k / n_auc_steps);
  out.auc = acc / n_auc_steps;
  return out;
}

namespace {

void check_counts(size_t preds, size_t gts, const char* what) {
  if (preds == 0 && gts == 0) throw EmptyDataset(std::string(what) + ": no samples");
  if (preds != gts)
    throw ShapeMismatch(std::string(what) + ": pred/gt sample counts differ");
}

}  // namespace

MetricReport aggregate_mpjpe(const std::vector<Pose3D>& preds, const std::vector<Pose3D>& gts,
                             const JointSchema& schema) {
  check_counts(preds.size(), gts.size(), "aggregate_mpjpe");
  MetricReport report;
  report.name = "mpjpe_mm";
  report.count = preds.size();
  report.per_joint.assign(schema.size(), 0.0);
  double total = 0.0;
  for (size_t s = 0; s < preds.size(); ++s) {
    const std::vector<double> errors = per_joint_errors(preds[s], gts[s], schema);
    double sum = 0.0;
    for (int i = 0; i < schema.size(); ++i) {
      report.per_joint[i] += errors[i];
      sum += errors[i];
    }
    total += sum / schema.size();
  }
  for (double& v : report.per_joint) v /= preds.size();
  report.value = total / preds.size();
  return report;
}

MetricReport aggregate_pckh(const std::vector<Pose2D>& preds, const std::vector<Pose2D>& gts,
                            const JointSchema& schema, double alpha) {
  check_counts(preds.size(), gts.size(), "aggregate_pckh");
  MetricReport report;
  char alpha_buf[16];
  std::snprintf(alpha_buf, sizeof(alpha_buf), "%g", alpha);
  report.name = std::string("pckh@") + alpha_buf;
  report.count = preds.size();
  report.per_joint.assign(schema.size(), 0.0);
  double total = 0.0;
  for (size_t s = 0; s < preds.size(); ++s) {
    total += pckh(preds[s], gts[s], schema, alpha);
    const Pixel2& head = gts[s].joints[schema.head_top_index];
    const Pixel2& neck = gts[s].joints[schema.neck_index];
    const double threshold = alpha * std::hypot(head.u - neck.u, head.v - neck.v);
    for (int i = 0; i < schema.size(); ++i) {
      const double d = std::hypot(preds[s].joints[i].u - gts[s].joints[i].u,
                                  preds[s].joints[i].v - gts[s].joints[i].v);
      if (d <= threshold) report.per_joint[i] += 1.0;
    }
  }
  for (double& v : report.per_joint) v /= preds.size();
  report.value = total / preds.size();
  return report;
}

std::pair<MetricReport, MetricReport> aggregate_pck3d(const std::vector<Pose3D>& preds,
                                                      const std::vector<Pose3D>& gts,
                                                      const JointSchema& schema,
                                                      double threshold_mm, int n_auc_steps) {
  check_counts(preds.size(), gts.size(), "aggregate_pck3d");
  MetricReport pck, auc;
  pck.name = "pck3d@" + std::to_string(static_cast<int>(threshold_mm)) + "mm";
  auc.name = "auc3d";
  pck.count = auc.count = preds.size();
  pck.per_joint.assign(schema.size(), 0.0);
  for (size_t s = 0; s < preds.size(); ++s) {
    const Pck3dResult r = pck3d_auc(preds[s], gts[s], schema, threshold_mm, n_auc_steps);
    pck.value += r.pck;
    auc.value += r.auc;
    const std::vector<double> errors = per_joint_errors(preds[s], gts[s], schema);
    for (int i = 0; i < schema.size(); ++i)
      if (errors[i] <= threshold_mm) pck.per_joint[i] += 1.0;
  }
  pck.value /= preds.size();
  auc.value /= preds.size();
  for (double& v : pck.per_joint) v /= preds.size();
  return {pck, auc};
}

std::string metric_csv_row(const MetricReport& report) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", report.value);
  return "metric," + report.name + "," + buf + "," + std::to_string(report.count);
}

}  // namespace poselift
