#include <cstdio>
#include <fstream>

#include <doctest.h>

#include "poselift/errors.hpp"
#include "poselift/model_io.hpp"
#include "poselift/neuralnet.hpp"
#include "poselift/rng.hpp"

#include "test_support.hpp"

using namespace poselift;

TEST_CASE("save/load round trip is bit exact") {
  MlpConfig cfg;
  cfg.input_dim = 12;
  cfg.hidden_dim = 20;
  cfg.n_residual_blocks = 2;
  cfg.output_dim = 9;
  cfg.dropout_rate = 0.25;
  cfg.max_norm = 1.5;
  cfg.seed = 77;
  MlpModel m = make_residual_mlp(cfg);

  // Perturb running stats so they are not at the init values.
  Rng rng(5);
  Matrix x(32, 12);
  for (double& v : x.data) v = 2.0 * rng.normal();
  ForwardCache cache;
  forward_train(m, x, rng, cache);

  const std::string path = testsupport::temp_path("poselift_model_rt.json");
  save_model(m, path);
  const MlpModel back = load_model(path);

  CHECK(back.input_dim == m.input_dim);
  CHECK(back.output_dim == m.output_dim);
  CHECK(back.max_norm == m.max_norm);
  REQUIRE(back.ops.size() == m.ops.size());
  CHECK(model_hash(back) == model_hash(m));

  // Forward passes agree bitwise.
  Matrix probe(5, 12);
  for (double& v : probe.data) v = rng.normal();
  const Matrix ya = forward_eval(m, probe);
  const Matrix yb = forward_eval(back, probe);
  for (size_t i = 0; i < ya.data.size(); ++i) CHECK(ya.data[i] == yb.data[i]);

  // Saving the loaded model reproduces the file byte for byte.
  const std::string path2 = testsupport::temp_path("poselift_model_rt2.json");
  save_model(back, path2);
  CHECK(testsupport::slurp(path) == testsupport::slurp(path2));
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("model hash distinguishes models and survives io") {
  MlpModel a = make_plain_mlp(4, {8}, 2, 0.0, 1.0, 1);
  MlpModel b = make_plain_mlp(4, {8}, 2, 0.0, 1.0, 2);
  CHECK(model_hash(a) != model_hash(b));
  a.ops[0].w.at(0, 0) += 1e-15;
  CHECK(model_hash(a) != model_hash(make_plain_mlp(4, {8}, 2, 0.0, 1.0, 1)));
}

TEST_CASE("malformed model files throw") {
  const std::string path = testsupport::temp_path("poselift_model_bad.json");
  {
    std::ofstream out(path);
    out << "{\"not\": \"a model\"}";
  }
  CHECK_THROWS(load_model(path));
  {
    std::ofstream out(path);
    out << "this is not json";
  }
  CHECK_THROWS(load_model(path));
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_model("/nonexistent/dir/m.json"), IoError);
}

TEST_CASE("tampered weight shape is rejected") {
  MlpModel m = make_plain_mlp(3, {4}, 2, 0.0, 1.0, 9);
  const std::string path = testsupport::temp_path("poselift_model_tamper.json");
  save_model(m, path);
  std::string text = testsupport::slurp(path);
  // Bump one row count so stored data no longer matches the declared shape.
  const size_t pos = text.find("\"shape\":[4,3]");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 13, "\"shape\":[5,3]");
  {
    std::ofstream out(path);
    out << text;
  }
  CHECK_THROWS(load_model(path));
  std::remove(path.c_str());
}
