#pragma once

#include <string>
#include <vector>

#include "poselift/skeleton.hpp"

namespace poselift {

struct MetricReport {
  std::string name;
  double value = 0.0;
  std::vector<double> per_joint;
  size_t count = 0;
};

// Protocol #1: root-align both poses, mean Euclidean joint distance in mm.
// No rotation or scale fitting.
double mpjpe_protocol1(const Pose3D& pred, const Pose3D& gt, const JointSchema& schema);

// Per-joint distances after root alignment (the terms MPJPE averages).
std::vector<double> per_joint_errors(const Pose3D& pred, const Pose3D& gt,
                                     const JointSchema& schema);

// Fraction of joints within alpha * |gt[head_top] - gt[neck]| pixels
// (inclusive). Throws ZeroHeadSegment when the head segment has zero length.
double pckh(const Pose2D& pred, const Pose2D& gt, const JointSchema& schema, double alpha = 0.5);

struct Pck3dResult {
  double pck = 0.0;
  double auc = 0.0;
};

// 3D PCK at threshold_mm (inclusive, after root alignment) and AUC as the
// mean PCK over thresholds threshold_mm * k / n_auc_steps, k = 1..n_auc_steps.
// The root joint is excluded: alignment forces its error to zero.
Pck3dResult pck3d_auc(const Pose3D& pred, const Pose3D& gt, const JointSchema& schema,
                      double threshold_mm = 150.0, int n_auc_steps = 31);

// Dataset-level reports: mean of per-sample metrics, with per-joint columns.
MetricReport aggregate_mpjpe(const std::vector<Pose3D>& preds, const std::vector<Pose3D>& gts,
                             const JointSchema& schema);
MetricReport aggregate_pckh(const std::vector<Pose2D>& preds, const std::vector<Pose2D>& gts,
                            const JointSchema& schema, double alpha = 0.5);
// Returns {pck report, auc report}.
std::pair<MetricReport, MetricReport> aggregate_pck3d(const std::vector<Pose3D>& preds,
                                                      const std::vector<Pose3D>& gts,
                                                      const JointSchema& schema,
                                                      double threshold_mm = 150.0,
                                                      int n_auc_steps = 31);

// CSV row "metric,name,value,count" (value with full precision).
std::string metric_csv_row(const MetricReport& report);

}  // namespace poselift
