#pragma once

#include <string>
#include <vector>

#include "poselift/dataset.hpp"
#include "poselift/geosearch.hpp"
#include "poselift/lifting.hpp"
#include "poselift/synthgen.hpp"

namespace poselift {

struct GenSummary {
  size_t count = 0;
  uint64_t seed = 0;
};

// Streams n synthetic training pairs into a JSONL dataset at `path`. Records
// carry joints2d (left, crop coords), both 3D fields, and the right view plus
// the baseline shift under meta.right2d / meta.dx.
GenSummary generate_dataset(const SynthConfig& cfg, size_t n, const std::string& path);

// Converts a loaded record to the in-memory training representation.
// need_right/need_3d control which optional parts must be present.
TrainingPair record_to_pair(const DatasetRecord& rec, const JointSchema& schema, bool need_right,
                            bool need_3d);
std::vector<TrainingPair> records_to_pairs(const std::vector<DatasetRecord>& records,
                                           const JointSchema& schema, bool need_right,
                                           bool need_3d);

// Coarse prediction plus geometric depth search; fills joints3d_rel (refined,
// root-relative), joints3d_abs, and delta_z. Degenerate or depth-infeasible
// records come back with meta.failed = true and their inputs untouched.
DatasetRecord label_record(const DatasetRecord& rec, const MlpModel& vm, const MlpModel& rm,
                           const SearchConfig& cfg, const JointSchema& schema);

// Geometric search only: uses the record's existing joints3d_rel as the
// coarse pose. Records without 3D come back failed.
DatasetRecord refine_record(const DatasetRecord& rec, const SearchConfig& cfg,
                            const JointSchema& schema);

struct LabelSummary {
  size_t total = 0;
  size_t labeled = 0;
  size_t failed = 0;
  double wall_time_s = 0.0;
};

// Streaming, order-preserving batch labeling. Per-record failures mark the
// record and continue; parse failures abort with ParseError.
LabelSummary label_dataset(const std::string& in_path, const std::string& out_path,
                           const MlpModel& vm, const MlpModel& rm, const SearchConfig& cfg);
LabelSummary refine_dataset(const std::string& in_path, const std::string& out_path,
                            const SearchConfig& cfg);

struct Violation {
  std::string record_id;
  size_t line = 0;
  std::string message;
};

// Checks every record invariant: joint counts and schema name, 2D coordinates
// within the crop (1 px tolerance), finite values, absolute-pose reprojection
// onto joints2d within 1e-3 px, and rel == root_align(abs) within 1e-6 mm.
std::vector<Violation> validate_dataset(const std::string& path);

}  // namespace poselift
