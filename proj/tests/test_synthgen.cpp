#include <cmath>

#include <doctest.h>

#include "poselift/errors.hpp"
#include "poselift/geosearch.hpp"
#include "poselift/skeleton.hpp"
#include "poselift/synthgen.hpp"

using namespace poselift;

TEST_CASE("generate_pair_at is deterministic per (seed, index)") {
  const SynthConfig cfg = default_synth_config(42);
  const TrainingPair a = generate_pair_at(cfg, 7);
  const TrainingPair b = generate_pair_at(cfg, 7);
  for (int i = 0; i < a.left2d.size(); ++i) {
    CHECK(a.left2d.joints[i].u == b.left2d.joints[i].u);
    CHECK(a.pose3d_abs.joints[i].z == b.pose3d_abs.joints[i].z);
  }
  const TrainingPair c = generate_pair_at(cfg, 8);
  CHECK(a.pose3d_abs.joints[0].z != c.pose3d_abs.joints[0].z);
}

TEST_CASE("sampled poses respect bone ranges and mirror symmetry") {
  const JointSchema& s = h36m16();
  const SynthConfig cfg = default_synth_config(5);
  for (uint64_t i = 0; i < 200; ++i) {
    const TrainingPair pair = generate_pair_at(cfg, i);
    // bone_lengths skips the root, so joint j sits at position j - 1.
    const std::vector<double> lens = bone_lengths(pair.pose3d, s);
    for (int j = 0; j < s.size(); ++j) {
      if (j == s.root_index) continue;
      CHECK(lens[j - 1] >= cfg.bone_length_ranges[j].first - 1e-9);
      CHECK(lens[j - 1] <= cfg.bone_length_ranges[j].second + 1e-9);
    }
    for (const auto& [l, r] : s.left_right_pairs)
      CHECK(lens[l - 1] == doctest::Approx(lens[r - 1]).epsilon(1e-9));
  }
}

TEST_CASE("sampled poses stay visible on the source sensor") {
  const SynthConfig cfg = default_synth_config(17);
  for (uint64_t i = 0; i < 300; ++i) {
    const TrainingPair pair = generate_pair_at(cfg, i);
    const Pose2D src = project_pose(pair.pose3d_abs, cfg.intrinsics);
    for (const Pixel2& p : src.joints) {
      CHECK(p.u >= 0.0);
      CHECK(p.u <= 2.0 * cfg.intrinsics.cx);
      CHECK(p.v >= 0.0);
      CHECK(p.v <= 2.0 * cfg.intrinsics.cy);
    }
    for (const Point3& j : pair.pose3d_abs.joints) CHECK(j.z > 0.0);
  }
}

TEST_CASE("training pairs are internally consistent") {
  const JointSchema& s = h36m16();
  const SynthConfig cfg = default_synth_config(9);
  for (uint64_t i = 0; i < 100; ++i) {
    const TrainingPair pair = generate_pair_at(cfg, i);

    // pose3d == root_align(pose3d_abs), root exactly zero
    CHECK(pair.pose3d.frame == Frame::RootRelative);
    CHECK(pair.pose3d.joints[s.root_index].x == 0.0);
    const Pose3D aligned = root_align(pair.pose3d_abs, s);
    for (int j = 0; j < s.size(); ++j)
      CHECK(pair.pose3d.joints[j].z == doctest::Approx(aligned.joints[j].z).epsilon(1e-12));

    // left2d reprojects from the absolute pose through the crop intrinsics
    CHECK(reprojection_error(pair.pose3d_abs, pair.left2d, pair.intrinsics) <= 1e-9);

    // right view: equal v, crop-frame disparity fx'*dx/z
    for (int j = 0; j < s.size(); ++j) {
      CHECK(std::abs(pair.right2d.joints[j].v - pair.left2d.joints[j].v) <= 1e-9);
      const double want = disparity(pair.intrinsics.fx, cfg.dx, pair.pose3d_abs.joints[j].z);
      CHECK(pair.right2d.joints[j].u - pair.left2d.joints[j].u ==
            doctest::Approx(want).epsilon(1e-9));
    }

    // left joints inside the crop (validator tolerance)
    for (const Pixel2& p : pair.left2d.joints) {
      CHECK(p.u >= -1.0);
      CHECK(p.u <= 257.0);
      CHECK(p.v >= -1.0);
      CHECK(p.v <= 257.0);
    }
  }
}

TEST_CASE("impossible visibility exhausts the retry budget") {
  SynthConfig cfg = default_synth_config(1);
  cfg.intrinsics.cx = 1.0;  // sensor is 2x2 px; a person never fits
  cfg.intrinsics.cy = 1.0;
  cfg.retry_budget = 20;
  Rng rng(1);
  CHECK_THROWS_AS(sample_pose3(rng, cfg), GenerationExhausted);
}

TEST_CASE("synth config validation") {
  SynthConfig cfg = default_synth_config(1);
  cfg.bone_length_ranges.resize(3);
  CHECK_THROWS_AS(cfg.validate(), SchemaMismatch);
  SynthConfig cfg2 = default_synth_config(1);
  cfg2.retry_budget = 0;
  CHECK_THROWS_AS(cfg2.validate(), SchemaMismatch);
  SynthConfig cfg3 = default_synth_config(1);
  cfg3.bone_length_ranges[5] = {300.0, 200.0};  // lo > hi
  CHECK_THROWS_AS(cfg3.validate(), SchemaMismatch);
}
