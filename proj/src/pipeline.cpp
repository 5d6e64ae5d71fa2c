#include "poselift/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

namespace poselift {

namespace {

nlohmann::json pose2d_to_meta(const Pose2D& p) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Pixel2& j : p.joints) arr.push_back({j.u, j.v});
  return arr;
}

Pose2D pose2d_from_meta(const nlohmann::json& arr, const std::string& id) {
  if (!arr.is_array()) throw SchemaMismatch("record " + id + ": meta.right2d must be an array");
  Pose2D p;
  p.joints.reserve(arr.size());
  for (const auto& row : arr) {
    if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number())
      throw SchemaMismatch("record " + id + ": meta.right2d entries must be [u,v]");
    p.joints.push_back({row[0].get<double>(), row[1].get<double>()});
  }
  return p;
}

std::string synth_id(size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "synth-%06zu", index);
  return buf;
}

}  // namespace

GenSummary generate_dataset(const SynthConfig& cfg, size_t n, const std::string& path) {
  if (n < 1) throw EmptyDataset("generate_dataset: n must be >= 1");
  cfg.validate();
  const JointSchema& schema = h36m16();
  DatasetWriter writer(path, schema);
  for (size_t i = 0; i < n; ++i) {
    const TrainingPair pair = generate_pair_at(cfg, i);
    DatasetRecord rec;
    rec.id = synth_id(i);
    rec.source = "synthgen";
    rec.schema_name = schema.name;
    rec.crop = pair.crop;
    rec.intrinsics = cfg.intrinsics;  // source frame; crop maps to 256x256
    rec.joints2d = pair.left2d;
    rec.joints3d_rel = pair.pose3d;
    rec.joints3d_abs = pair.pose3d_abs;
    rec.meta["right2d"] = pose2d_to_meta(pair.right2d);
    rec.meta["dx"] = cfg.dx;
    writer.write(rec);
  }
  return {n, cfg.seed};
}

TrainingPair record_to_pair(const DatasetRecord& rec, const JointSchema& schema, bool need_right,
                            bool need_3d) {
  if (rec.joints2d.size() != schema.size())
    throw SchemaMismatch("record " + rec.id + ": joints2d does not match schema " + schema.name);
  TrainingPair pair;
  pair.left2d = rec.joints2d;
  pair.crop = rec.crop;
  pair.intrinsics = adjust_intrinsics_for_crop(effective_intrinsics(rec), rec.crop);
  if (need_right) {
    if (!rec.meta.contains("right2d"))
      throw SchemaMismatch("record " + rec.id + ": no right view under meta.right2d");
    pair.right2d = pose2d_from_meta(rec.meta["right2d"], rec.id);
    if (pair.right2d.size() != schema.size())
      throw SchemaMismatch("record " + rec.id + ": right2d does not match schema " + schema.name);
  }
  if (need_3d) {
    if (!rec.joints3d_rel)
      throw SchemaMismatch("record " + rec.id + ": no joints3d_rel");
    if (rec.joints3d_rel->size() != schema.size())
      throw SchemaMismatch("record " + rec.id + ": joints3d_rel does not match schema " +
                           schema.name);
    pair.pose3d = *rec.joints3d_rel;
  }
  if (rec.joints3d_abs) pair.pose3d_abs = *rec.joints3d_abs;
  return pair;
}

std::vector<TrainingPair> records_to_pairs(const std::vector<DatasetRecord>& records,
                                           const JointSchema& schema, bool need_right,
                                           bool need_3d) {
  std::vector<TrainingPair> pairs;
  pairs.reserve(records.size());
  for (const DatasetRecord& rec : records)
    pairs.push_back(record_to_pair(rec, schema, need_right, need_3d));
  return pairs;
}

namespace {

DatasetRecord mark_failed(DatasetRecord rec, const std::string& reason) {
  rec.meta["failed"] = true;
  rec.meta["fail_reason"] = reason;
  return rec;
}

DatasetRecord fill_refined(DatasetRecord rec, const RefinedPose& refined) {
  rec.joints3d_rel = refined.pose_rel;
  rec.joints3d_abs = refined.pose_abs;
  rec.delta_z = refined.delta_z;
  return rec;
}

}  // namespace

DatasetRecord label_record(const DatasetRecord& rec, const MlpModel& vm, const MlpModel& rm,
                           const SearchConfig& cfg, const JointSchema& schema) {
  try {
    const CameraIntrinsics k = adjust_intrinsics_for_crop(effective_intrinsics(rec), rec.crop);
    const Pose3D coarse = predict_coarse(vm, rm, rec.joints2d, schema);
    return fill_refined(rec, refine(coarse, rec.joints2d, k, cfg, schema));
  } catch (const DegenerateProjection& e) {
    return mark_failed(rec, e.what());
  } catch (const NoValidDepth& e) {
    return mark_failed(rec, e.what());
  } catch (const SchemaMismatch& e) {
    return mark_failed(rec, e.what());
  } catch (const InvalidCrop& e) {
    return mark_failed(rec, e.what());
  }
}

DatasetRecord refine_record(const DatasetRecord& rec, const SearchConfig& cfg,
                            const JointSchema& schema) {
  if (!rec.joints3d_rel) return mark_failed(rec, "no joints3d_rel to refine");
  try {
    const CameraIntrinsics k = adjust_intrinsics_for_crop(effective_intrinsics(rec), rec.crop);
    return fill_refined(rec, refine(*rec.joints3d_rel, rec.joints2d, k, cfg, schema));
  } catch (const DegenerateProjection& e) {
    return mark_failed(rec, e.what());
  } catch (const NoValidDepth& e) {
    return mark_failed(rec, e.what());
  } catch (const SchemaMismatch& e) {
    return mark_failed(rec, e.what());
  } catch (const InvalidCrop& e) {
    return mark_failed(rec, e.what());
  }
}

namespace {

template <typename PerRecord>
LabelSummary stream_records(const std::string& in_path, const std::string& out_path,
                            PerRecord&& per_record) {
  const auto start = std::chrono::steady_clock::now();
  DatasetReader reader(in_path);
  DatasetWriter writer(out_path, reader.schema());
  LabelSummary summary;
  DatasetRecord rec;
  while (reader.next(rec)) {
    const DatasetRecord out = per_record(rec, reader.schema());
    writer.write(out);
    ++summary.total;
    const bool failed = out.meta.contains("failed") && out.meta["failed"].is_boolean() &&
                        out.meta["failed"].get<bool>();
    if (failed)
      ++summary.failed;
    else
      ++summary.labeled;
  }
  summary.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

}  // namespace

LabelSummary label_dataset(const std::string& in_path, const std::string& out_path,
                           const MlpModel& vm, const MlpModel& rm, const SearchConfig& cfg) {
  return stream_records(in_path, out_path,
                        [&](const DatasetRecord& rec, const JointSchema& schema) {
                          return label_record(rec, vm, rm, cfg, schema);
                        });
}

LabelSummary refine_dataset(const std::string& in_path, const std::string& out_path,
                            const SearchConfig& cfg) {
  return stream_records(in_path, out_path,
                        [&](const DatasetRecord& rec, const JointSchema& schema) {
                          return refine_record(rec, cfg, schema);
                        });
}

std::vector<Violation> validate_dataset(const std::string& path) {
  DatasetReader reader(path);
  const JointSchema& schema = reader.schema();
  std::vector<Violation> violations;
  auto report = [&](const std::string& id, const std::string& message) {
    violations.push_back({id, reader.line(), message});
  };

  DatasetRecord rec;
  while (reader.next(rec)) {
    if (rec.schema_name != schema.name) {
      report(rec.id, "schema_name '" + rec.schema_name + "' does not match header '" +
                         schema.name + "'");
      continue;
    }
    if (rec.joints2d.size() != schema.size()) {
      report(rec.id, "joints2d has " + std::to_string(rec.joints2d.size()) + " joints, expected " +
                         std::to_string(schema.size()));
      continue;
    }
    if (!(rec.crop.s > 0.0)) {
      report(rec.id, "crop scale must be positive");
      continue;
    }
    bool finite = true;
    for (const Pixel2& j : rec.joints2d.joints) {
      if (!std::isfinite(j.u) || !std::isfinite(j.v)) finite = false;
      if (j.u < -1.0 || j.u > 257.0 || j.v < -1.0 || j.v > 257.0)
        report(rec.id, "joints2d outside the 256x256 crop (1 px tolerance)");
    }
    if (!finite) {
      report(rec.id, "non-finite 2D coordinates");
      continue;
    }

    for (const auto* field : {&rec.joints3d_rel, &rec.joints3d_abs}) {
      if (!*field) continue;
      if ((*field)->size() != schema.size()) {
        report(rec.id, "3D pose joint count mismatch");
        finite = false;
        break;
      }
      for (const Point3& j : (*field)->joints)
        if (!std::isfinite(j.x) || !std::isfinite(j.y) || !std::isfinite(j.z)) {
          report(rec.id, "non-finite 3D coordinates");
          finite = false;
          break;
        }
    }
    if (!finite) continue;

    if (rec.joints3d_rel) {
      const Point3& root = rec.joints3d_rel->joints[schema.root_index];
      if (root.x != 0.0 || root.y != 0.0 || root.z != 0.0)
        report(rec.id, "joints3d_rel root is not exactly zero");
    }

    if (rec.joints3d_abs) {
      const CameraIntrinsics k = adjust_intrinsics_for_crop(effective_intrinsics(rec), rec.crop);
      bool depths_ok = true;
      for (const Point3& j : rec.joints3d_abs->joints)
        if (!(j.z > 0.0)) depths_ok = false;
      if (!depths_ok) {
        report(rec.id, "joints3d_abs has non-positive depth");
      } else {
        const double err = reprojection_error(*rec.joints3d_abs, rec.joints2d, k);
        if (err > 1e-3)
          report(rec.id, "joints3d_abs reprojection error " + std::to_string(err) + " px");
      }
    }

    if (rec.joints3d_rel && rec.joints3d_abs) {
      const Pose3D aligned = root_align(*rec.joints3d_abs, schema);
      for (int i = 0; i < schema.size(); ++i) {
        const Point3& a = aligned.joints[i];
        const Point3& r = rec.joints3d_rel->joints[i];
        if (std::abs(a.x - r.x) > 1e-6 || std::abs(a.y - r.y) > 1e-6 ||
            std::abs(a.z - r.z) > 1e-6) {
          report(rec.id, "joints3d_rel is not root_align(joints3d_abs)");
          break;
        }
      }
    }
  }
  return violations;
}

}  // namespace poselift
