#include <cmath>

#include <doctest.h>

#include "poselift/errors.hpp"
#include "poselift/geometry.hpp"
#include "poselift/rng.hpp"

using namespace poselift;

TEST_CASE("project maps the worked example exactly") {
  const CameraIntrinsics k{1150.0, 1150.0, 512.0, 512.0};
  const Pixel2 p = project({500.0, -250.0, 2500.0}, k);
  CHECK(p.u == 742.0);
  CHECK(p.v == 397.0);
}

TEST_CASE("project rejects non-positive depth") {
  const CameraIntrinsics k{1150.0, 1150.0, 512.0, 512.0};
  CHECK_THROWS_AS(project({0.0, 0.0, 0.0}, k), NonPositiveDepth);
  CHECK_THROWS_AS(project({1.0, 1.0, -3.0}, k), NonPositiveDepth);
  CHECK_THROWS_AS(back_project({10.0, 10.0}, 0.0, k), NonPositiveDepth);
}

TEST_CASE("back_project inverts project") {
  const CameraIntrinsics k{1150.0, 1100.0, 512.0, 500.0};
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Point3 p{rng.uniform(-800.0, 800.0), rng.uniform(-800.0, 800.0),
                   rng.uniform(500.0, 8000.0)};
    const Point3 q = back_project(project(p, k), p.z, k);
    CHECK(std::abs(q.x - p.x) <= 1e-9);
    CHECK(std::abs(q.y - p.y) <= 1e-9);
    CHECK(q.z == p.z);
  }
}

TEST_CASE("disparity worked example is exact") {
  CHECK(disparity(1150.0, 500.0, 2500.0) == 230.0);
}

TEST_CASE("crop-adjusted intrinsics match the worked example") {
  const CameraIntrinsics k{1000.0, 1000.0, 512.0, 512.0};
  const CameraIntrinsics a = adjust_intrinsics_for_crop(k, {256.0, 256.0, 0.5});
  CHECK(a.fx == 500.0);
  CHECK(a.fy == 500.0);
  CHECK(a.cx == 128.0);
  CHECK(a.cy == 128.0);
}

TEST_CASE("adjust_intrinsics_for_crop rejects non-positive scale") {
  const CameraIntrinsics k{1000.0, 1000.0, 512.0, 512.0};
  CHECK_THROWS_AS(adjust_intrinsics_for_crop(k, {0.0, 0.0, 0.0}), InvalidCrop);
  CHECK_THROWS_AS(adjust_intrinsics_for_crop(k, {0.0, 0.0, -1.0}), InvalidCrop);
}

TEST_CASE("projection commutes with cropping") {
  // project-then-crop equals projecting with crop-adjusted intrinsics.
  const CameraIntrinsics k{1150.0, 1190.0, 480.0, 530.0};
  const CropTransform crop{123.0, 45.0, 0.73};
  const CameraIntrinsics kc = adjust_intrinsics_for_crop(k, crop);
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const Point3 p{rng.uniform(-700.0, 700.0), rng.uniform(-700.0, 700.0),
                   rng.uniform(800.0, 7000.0)};
    const Pixel2 a = crop_apply(crop, project(p, k));
    const Pixel2 b = project(p, kc);
    CHECK(std::abs(a.u - b.u) <= 1e-9);
    CHECK(std::abs(a.v - b.v) <= 1e-9);
  }
}

TEST_CASE("crop_apply and crop_invert round trip") {
  const CropTransform crop{-50.0, 210.0, 1.7};
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const Pixel2 p{rng.uniform(-2000.0, 2000.0), rng.uniform(-2000.0, 2000.0)};
    const Pixel2 q = crop_invert(crop, crop_apply(crop, p));
    CHECK(std::abs(q.u - p.u) <= 1e-9);
    CHECK(std::abs(q.v - p.v) <= 1e-9);
  }
}
