#include "poselift/dataset.hpp"

#include <cmath>
#include <cstdio>

namespace poselift {

namespace {

// 17 significant digits round-trips every finite double exactly.
std::string fmt(double v) {
  if (!std::isfinite(v)) throw IoError("refusing to serialize non-finite number");
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string quote(const std::string& s) { return nlohmann::json(s).dump(); }

void append_pose2d(std::string& out, const Pose2D& p) {
  out += '[';
  for (size_t i = 0; i < p.joints.size(); ++i) {
    if (i) out += ',';
    out += '[';
    out += fmt(p.joints[i].u);
    out += ',';
    out += fmt(p.joints[i].v);
    out += ']';
  }
  out += ']';
}

void append_pose3d(std::string& out, const Pose3D& p) {
  out += '[';
  for (size_t i = 0; i < p.joints.size(); ++i) {
    if (i) out += ',';
    out += '[';
    out += fmt(p.joints[i].x);
    out += ',';
    out += fmt(p.joints[i].y);
    out += ',';
    out += fmt(p.joints[i].z);
    out += ']';
  }
  out += ']';
}

double require_number(const nlohmann::json& j, const char* what, size_t line_no) {
  if (!j.is_number()) throw ParseError(line_no, std::string(what) + ": expected a number");
  return j.get<double>();
}

Pose2D parse_pose2d(const nlohmann::json& j, const char* what, size_t line_no) {
  if (!j.is_array()) throw ParseError(line_no, std::string(what) + ": expected an array");
  Pose2D p;
  p.joints.reserve(j.size());
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != 2)
      throw ParseError(line_no, std::string(what) + ": expected [u,v] pairs");
    p.joints.push_back({require_number(row[0], what, line_no),
                        require_number(row[1], what, line_no)});
  }
  return p;
}

Pose3D parse_pose3d(const nlohmann::json& j, const char* what, size_t line_no, Frame frame) {
  if (!j.is_array()) throw ParseError(line_no, std::string(what) + ": expected an array");
  Pose3D p;
  p.frame = frame;
  p.joints.reserve(j.size());
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != 3)
      throw ParseError(line_no, std::string(what) + ": expected [x,y,z] triples");
    p.joints.push_back({require_number(row[0], what, line_no),
                        require_number(row[1], what, line_no),
                        require_number(row[2], what, line_no)});
  }
  return p;
}

}  // namespace

CameraIntrinsics default_virtual_intrinsics(const CropTransform& crop, double crop_size,
                                            double focal_crop_px) {
  // Chosen so the crop-adjusted intrinsics come out as fx = fy = focal_crop_px
  // with the principal point at the crop center.
  return {focal_crop_px / crop.s, focal_crop_px / crop.s, crop.x0 + crop_size / 2.0 / crop.s,
          crop.y0 + crop_size / 2.0 / crop.s};
}

CameraIntrinsics effective_intrinsics(const DatasetRecord& rec) {
  return rec.intrinsics ? *rec.intrinsics : default_virtual_intrinsics(rec.crop);
}

std::string record_to_json_line(const DatasetRecord& rec) {
  std::string out = "{\"id\":" + quote(rec.id) + ",\"source\":" + quote(rec.source) +
                    ",\"schema_name\":" + quote(rec.schema_name);
  out += ",\"crop\":{\"x0\":" + fmt(rec.crop.x0) + ",\"y0\":" + fmt(rec.crop.y0) +
         ",\"s\":" + fmt(rec.crop.s) + "}";
  if (rec.intrinsics) {
    out += ",\"intrinsics\":{\"fx\":" + fmt(rec.intrinsics->fx) +
           ",\"fy\":" + fmt(rec.intrinsics->fy) + ",\"cx\":" + fmt(rec.intrinsics->cx) +
           ",\"cy\":" + fmt(rec.intrinsics->cy) + "}";
  }
  out += ",\"joints2d\":";
  append_pose2d(out, rec.joints2d);
  if (rec.joints3d_rel) {
    out += ",\"joints3d_rel\":";
    append_pose3d(out, *rec.joints3d_rel);
  }
  if (rec.joints3d_abs) {
    out += ",\"joints3d_abs\":";
    append_pose3d(out, *rec.joints3d_abs);
  }
  if (rec.delta_z) out += ",\"delta_z\":" + fmt(*rec.delta_z);
  out += ",\"meta\":" + rec.meta.dump();
  for (const auto& [key, value] : rec.extra.items()) out += "," + quote(key) + ":" + value.dump();
  out += '}';
  return out;
}

DatasetRecord record_from_json(const nlohmann::json& j, size_t line_no) {
  if (!j.is_object()) throw ParseError(line_no, "record: expected a JSON object");
  DatasetRecord rec;
  for (const char* key : {"id", "source", "schema_name", "crop", "joints2d"})
    if (!j.contains(key)) throw ParseError(line_no, std::string("record: missing key '") + key + "'");
  if (!j["id"].is_string() || !j["source"].is_string() || !j["schema_name"].is_string())
    throw ParseError(line_no, "record: id/source/schema_name must be strings");
  rec.id = j["id"].get<std::string>();
  rec.source = j["source"].get<std::string>();
  rec.schema_name = j["schema_name"].get<std::string>();

  const auto& crop = j["crop"];
  if (!crop.is_object() || !crop.contains("x0") || !crop.contains("y0") || !crop.contains("s"))
    throw ParseError(line_no, "record: crop needs x0, y0, s");
  rec.crop = {require_number(crop["x0"], "crop.x0", line_no),
              require_number(crop["y0"], "crop.y0", line_no),
              require_number(crop["s"], "crop.s", line_no)};

  if (j.contains("intrinsics")) {
    const auto& k = j["intrinsics"];
    if (!k.is_object() || !k.contains("fx") || !k.contains("fy") || !k.contains("cx") ||
        !k.contains("cy"))
      throw ParseError(line_no, "record: intrinsics needs fx, fy, cx, cy");
    rec.intrinsics = CameraIntrinsics{require_number(k["fx"], "intrinsics.fx", line_no),
                                      require_number(k["fy"], "intrinsics.fy", line_no),
                                      require_number(k["cx"], "intrinsics.cx", line_no),
                                      require_number(k["cy"], "intrinsics.cy", line_no)};
  }

  rec.joints2d = parse_pose2d(j["joints2d"], "joints2d", line_no);
  if (j.contains("joints3d_rel"))
    rec.joints3d_rel = parse_pose3d(j["joints3d_rel"], "joints3d_rel", line_no,
                                    Frame::RootRelative);
  if (j.contains("joints3d_abs"))
    rec.joints3d_abs = parse_pose3d(j["joints3d_abs"], "joints3d_abs", line_no, Frame::Absolute);
  if (j.contains("delta_z")) rec.delta_z = require_number(j["delta_z"], "delta_z", line_no);
  if (j.contains("meta")) {
    if (!j["meta"].is_object()) throw ParseError(line_no, "record: meta must be an object");
    rec.meta = j["meta"];
  }

  for (const auto& [key, value] : j.items()) {
    if (key == "id" || key == "source" || key == "schema_name" || key == "crop" ||
        key == "intrinsics" || key == "joints2d" || key == "joints3d_rel" ||
        key == "joints3d_abs" || key == "delta_z" || key == "meta")
      continue;
    rec.extra[key] = value;
  }
  return rec;
}

std::string header_to_json_line(const JointSchema& schema) {
  std::string out = "{\"format_version\":1,\"schema\":{\"name\":" + quote(schema.name);
  out += ",\"joint_names\":[";
  for (size_t i = 0; i < schema.joint_names.size(); ++i) {
    if (i) out += ',';
    out += quote(schema.joint_names[i]);
  }
  out += "],\"parent\":[";
  for (size_t i = 0; i < schema.parent.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(schema.parent[i]);
  }
  out += "],\"root_index\":" + std::to_string(schema.root_index);
  out += ",\"head_top_index\":" + std::to_string(schema.head_top_index);
  out += ",\"neck_index\":" + std::to_string(schema.neck_index);
  out += ",\"left_right_pairs\":[";
  for (size_t i = 0; i < schema.left_right_pairs.size(); ++i) {
    if (i) out += ',';
    out += '[' + std::to_string(schema.left_right_pairs[i].first) + ',' +
           std::to_string(schema.left_right_pairs[i].second) + ']';
  }
  out += "]}}";
  return out;
}

JointSchema header_from_json(const nlohmann::json& j, size_t line_no) {
  if (!j.is_object() || !j.contains("format_version") || !j.contains("schema"))
    throw ParseError(line_no, "header: expected format_version and schema");
  if (!j["format_version"].is_number_integer() || j["format_version"].get<int>() != 1)
    throw ParseError(line_no, "header: unsupported format_version");
  const auto& s = j["schema"];
  JointSchema schema;
  try {
    schema.name = s.at("name").get<std::string>();
    schema.joint_names = s.at("joint_names").get<std::vector<std::string>>();
    schema.parent = s.at("parent").get<std::vector<int>>();
    schema.root_index = s.at("root_index").get<int>();
    schema.head_top_index = s.at("head_top_index").get<int>();
    schema.neck_index = s.at("neck_index").get<int>();
    for (const auto& pair : s.at("left_right_pairs")) {
      if (!pair.is_array() || pair.size() != 2)
        throw ParseError(line_no, "header: left_right_pairs entries must be [l,r]");
      schema.left_right_pairs.emplace_back(pair[0].get<int>(), pair[1].get<int>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line_no, std::string("header: ") + e.what());
  }
  try {
    schema.validate();
  } catch (const SchemaMismatch& e) {
    throw ParseError(line_no, std::string("header: ") + e.what());
  }
  return schema;
}

DatasetReader::DatasetReader(const std::string& path) : path_(path) {
  in_.open(path);
  if (!in_) throw IoError("cannot open dataset: " + path);
  std::string line;
  if (!std::getline(in_, line)) throw ParseError(1, "empty file, expected header");
  ++line_no_;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line_no_, e.what());
  }
  schema_ = header_from_json(j, line_no_);
}

bool DatasetReader::next(DatasetRecord& rec) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no_, e.what());
    }
    rec = record_from_json(j, line_no_);
    return true;
  }
  return false;
}

DatasetWriter::DatasetWriter(const std::string& path, const JointSchema& schema) : path_(path) {
  out_.open(path, std::ios::trunc);
  if (!out_) throw IoError("cannot open for writing: " + path);
  out_ << header_to_json_line(schema) << '\n';
  if (!out_) throw IoError("write failed: " + path);
}

void DatasetWriter::write(const DatasetRecord& rec) {
  out_ << record_to_json_line(rec) << '\n';
  if (!out_) throw IoError("write failed at record " + std::to_string(count_) + ": " + path_);
  ++count_;
}

std::pair<JointSchema, std::vector<DatasetRecord>> read_dataset(const std::string& path) {
  DatasetReader reader(path);
  std::vector<DatasetRecord> records;
  DatasetRecord rec;
  while (reader.next(rec)) records.push_back(std::move(rec));
  return {reader.schema(), std::move(records)};
}

}  // namespace poselift
