#include <cstdio>
#include <fstream>

#include <doctest.h>

#include "poselift/dataset.hpp"
#include "poselift/errors.hpp"

#include "test_support.hpp"

using namespace poselift;

namespace {

DatasetRecord sample_record() {
  DatasetRecord rec;
  rec.id = "rec-001";
  rec.source = "unit";
  rec.schema_name = "h36m16";
  rec.crop = {100.0, 50.0, 0.5};
  rec.intrinsics = CameraIntrinsics{1150.0, 1150.0, 512.0, 512.0};
  Pose2D p2;
  Pose3D rel, abs;
  rel.frame = Frame::RootRelative;
  abs.frame = Frame::Absolute;
  for (int i = 0; i < 16; ++i) {
    p2.joints.push_back({10.0 + i + 1.0 / 3.0, 20.0 + i * 0.1});
    rel.joints.push_back({i * 1.1, -i * 2.2, i == 0 ? 0.0 : 33.3 + i});
    abs.joints.push_back({i * 1.1, -i * 2.2, 3000.0 + i});
  }
  rec.joints2d = p2;
  rec.joints3d_rel = rel;
  rec.joints3d_abs = abs;
  rec.delta_z = 2966.7;
  rec.meta["dx"] = 500.0;
  return rec;
}

}  // namespace

TEST_CASE("record JSON round trip preserves every field bitwise") {
  const DatasetRecord rec = sample_record();
  const std::string line = record_to_json_line(rec);
  const DatasetRecord back = record_from_json(nlohmann::json::parse(line), 2);

  CHECK(back.id == rec.id);
  CHECK(back.source == rec.source);
  CHECK(back.schema_name == rec.schema_name);
  CHECK(back.crop.x0 == rec.crop.x0);
  CHECK(back.crop.s == rec.crop.s);
  REQUIRE(back.intrinsics.has_value());
  CHECK(back.intrinsics->fx == rec.intrinsics->fx);
  for (int i = 0; i < 16; ++i) {
    CHECK(back.joints2d.joints[i].u == rec.joints2d.joints[i].u);
    CHECK(back.joints3d_rel->joints[i].z == rec.joints3d_rel->joints[i].z);
    CHECK(back.joints3d_abs->joints[i].x == rec.joints3d_abs->joints[i].x);
  }
  CHECK(back.delta_z == rec.delta_z);
  CHECK(back.meta["dx"] == 500.0);

  // Serialization is stable: a second pass emits identical bytes.
  CHECK(record_to_json_line(back) == line);
}

TEST_CASE("unknown top-level keys survive a rewrite") {
  const std::string line =
      R"({"id":"x","source":"s","schema_name":"h36m16","crop":{"x0":0,"y0":0,"s":1},)"
      R"("joints2d":[[1,2]],"zebra":{"deep":[1,2,3]},"aardvark":7})";
  const DatasetRecord rec = record_from_json(nlohmann::json::parse(line), 2);
  CHECK(rec.extra.contains("zebra"));
  CHECK(rec.extra.contains("aardvark"));
  const std::string out = record_to_json_line(rec);
  const nlohmann::json round = nlohmann::json::parse(out);
  CHECK(round["zebra"]["deep"][2] == 3);
  CHECK(round["aardvark"] == 7);
  // Extra keys come after the known ones, alphabetically.
  CHECK(out.find("\"aardvark\"") < out.find("\"zebra\""));
  CHECK(out.find("\"joints2d\"") < out.find("\"aardvark\""));
}

TEST_CASE("writer/reader round trip through a file") {
  const std::string path = testsupport::temp_path("poselift_dataset_rt.jsonl");
  const DatasetRecord rec = sample_record();
  {
    DatasetWriter w(path, h36m16());
    w.write(rec);
    w.write(rec);
    CHECK(w.written() == 2);
  }
  DatasetReader r(path);
  CHECK(r.schema().name == "h36m16");
  CHECK(r.schema().size() == 16);
  DatasetRecord got;
  size_t count = 0;
  while (r.next(got)) {
    ++count;
    CHECK(got.joints2d.joints[3].u == rec.joints2d.joints[3].u);
  }
  CHECK(count == 2);
  std::remove(path.c_str());
}

TEST_CASE("parse errors carry the 1-based line number") {
  const std::string path = testsupport::temp_path("poselift_dataset_bad.jsonl");
  {
    std::ofstream out(path);
    out << header_to_json_line(h36m16()) << "\n";
    out << record_to_json_line(sample_record()) << "\n";
    out << "{broken json\n";
  }
  DatasetReader r(path);
  DatasetRecord rec;
  CHECK(r.next(rec));
  try {
    r.next(rec);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("missing or malformed header") {
  const std::string empty = testsupport::temp_path("poselift_dataset_empty.jsonl");
  { std::ofstream out(empty); }
  CHECK_THROWS_AS(DatasetReader{empty}, ParseError);
  std::remove(empty.c_str());

  const std::string noschema = testsupport::temp_path("poselift_dataset_noschema.jsonl");
  {
    std::ofstream out(noschema);
    out << "{\"format_version\":1}\n";
  }
  CHECK_THROWS_AS(DatasetReader{noschema}, ParseError);
  std::remove(noschema.c_str());
}

TEST_CASE("virtual intrinsics place the principal point at the crop center") {
  DatasetRecord rec = sample_record();
  rec.intrinsics.reset();
  rec.crop = {300.0, 120.0, 0.5};
  const CameraIntrinsics k = effective_intrinsics(rec);
  // Crop-adjusting the virtual camera must give fx=fy=1150, cx=cy=128.
  const CameraIntrinsics kc = adjust_intrinsics_for_crop(k, rec.crop);
  CHECK(kc.fx == doctest::Approx(1150.0).epsilon(1e-12));
  CHECK(kc.fy == doctest::Approx(1150.0).epsilon(1e-12));
  CHECK(kc.cx == doctest::Approx(128.0).epsilon(1e-12));
  CHECK(kc.cy == doctest::Approx(128.0).epsilon(1e-12));

  // Records with explicit intrinsics use them untouched.
  const DatasetRecord with = sample_record();
  CHECK(effective_intrinsics(with).fx == 1150.0);
  CHECK(effective_intrinsics(with).cx == 512.0);
}

TEST_CASE("floats keep 17 significant digits through serialization") {
  DatasetRecord rec = sample_record();
  rec.joints2d.joints[0].u = 1.0 / 3.0;
  rec.joints2d.joints[0].v = 0.1;
  rec.joints3d_rel->joints[1].x = 12345.678901234567;
  const DatasetRecord back =
      record_from_json(nlohmann::json::parse(record_to_json_line(rec)), 2);
  CHECK(back.joints2d.joints[0].u == 1.0 / 3.0);
  CHECK(back.joints2d.joints[0].v == 0.1);
  CHECK(back.joints3d_rel->joints[1].x == 12345.678901234567);
}

TEST_CASE("reader skips blank lines") {
  const std::string path = testsupport::temp_path("poselift_dataset_blank.jsonl");
  {
    std::ofstream out(path);
    out << header_to_json_line(h36m16()) << "\n\n";
    out << record_to_json_line(sample_record()) << "\n\n";
  }
  DatasetReader r(path);
  DatasetRecord rec;
  size_t count = 0;
  while (r.next(rec)) ++count;
  CHECK(count == 1);
  std::remove(path.c_str());
}
