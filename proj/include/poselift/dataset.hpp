#pragma once

#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "poselift/skeleton.hpp"

namespace poselift {

// One labeled (or to-be-labeled) sample. 2D joints live in 256x256 crop
// coordinates; intrinsics describe the source frame and pair with `crop`.
struct DatasetRecord {
  std::string id;
  std::string source;
  std::string schema_name;
  CropTransform crop;
  std::optional<CameraIntrinsics> intrinsics;
  Pose2D joints2d;
  std::optional<Pose3D> joints3d_rel;
  std::optional<Pose3D> joints3d_abs;
  std::optional<double> delta_z;
  nlohmann::json meta = nlohmann::json::object();
  // Unknown top-level keys, preserved verbatim on rewrite.
  nlohmann::json extra = nlohmann::json::object();
};

// Records without intrinsics are treated as shot by a virtual camera with
// fx = fy = 1150 px and principal point at the crop center (crop frame);
// this returns the equivalent source-frame intrinsics.
CameraIntrinsics default_virtual_intrinsics(const CropTransform& crop, double crop_size = 256.0,
                                            double focal_crop_px = 1150.0);

// The record's intrinsics, or the virtual-camera fallback.
CameraIntrinsics effective_intrinsics(const DatasetRecord& rec);

std::string record_to_json_line(const DatasetRecord& rec);
DatasetRecord record_from_json(const nlohmann::json& j, size_t line_no);

std::string header_to_json_line(const JointSchema& schema);
JointSchema header_from_json(const nlohmann::json& j, size_t line_no);

// Streaming JSONL reader. Line 1 is the header (format_version + schema);
// every further line is one record. Parse failures throw ParseError with the
// 1-based line number.
class DatasetReader {
 public:
  explicit DatasetReader(const std::string& path);

  const JointSchema& schema() const { return schema_; }
  // False at end of file.
  bool next(DatasetRecord& rec);
  size_t line() const { return line_no_; }

 private:
  std::ifstream in_;
  std::string path_;
  JointSchema schema_;
  size_t line_no_ = 0;
};

class DatasetWriter {
 public:
  DatasetWriter(const std::string& path, const JointSchema& schema);

  void write(const DatasetRecord& rec);
  size_t written() const { return count_; }

 private:
  std::ofstream out_;
  std::string path_;
  size_t count_ = 0;
};

// Convenience eager load; use the reader for large files.
std::pair<JointSchema, std::vector<DatasetRecord>> read_dataset(const std::string& path);

}  // namespace poselift
