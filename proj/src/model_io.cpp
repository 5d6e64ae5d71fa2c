#include "poselift/model_io.hpp"

#include <fstream>

#include <json.hpp>

#include "poselift/errors.hpp"

namespace poselift {

namespace {

using nlohmann::json;

const char* kind_name(OpKind kind) {
  switch (kind) {
    case OpKind::Linear: return "linear";
    case OpKind::BatchNorm: return "batchnorm";
    case OpKind::Relu: return "relu";
    case OpKind::Dropout: return "dropout";
    case OpKind::SkipSave: return "skip_save";
    case OpKind::SkipAdd: return "skip_add";
  }
  return "?";
}

OpKind kind_from_name(const std::string& name) {
  if (name == "linear") return OpKind::Linear;
  if (name == "batchnorm") return OpKind::BatchNorm;
  if (name == "relu") return OpKind::Relu;
  if (name == "dropout") return OpKind::Dropout;
  if (name == "skip_save") return OpKind::SkipSave;
  if (name == "skip_add") return OpKind::SkipAdd;
  throw IoError("model: unknown op kind '" + name + "'");
}

json matrix_to_json(const Matrix& m) {
  return json{{"shape", {m.rows, m.cols}}, {"data", m.data}};
}

Matrix matrix_from_json(const json& j) {
  const auto shape = j.at("shape").get<std::vector<int>>();
  if (shape.size() != 2) throw IoError("model: tensor shape must be [rows, cols]");
  Matrix m(shape[0], shape[1]);
  m.data = j.at("data").get<std::vector<double>>();
  if (m.data.size() != static_cast<size_t>(shape[0]) * shape[1])
    throw IoError("model: tensor data does not match its shape");
  return m;
}

json model_to_json(const MlpModel& m) {
  json ops = json::array();
  for (const Op& op : m.ops) {
    json jo{{"kind", kind_name(op.kind)}, {"width", op.width}};
    switch (op.kind) {
      case OpKind::Linear:
        jo["w"] = matrix_to_json(op.w);
        jo["b"] = op.b;
        break;
      case OpKind::BatchNorm:
        jo["gamma"] = op.gamma;
        jo["beta"] = op.beta;
        jo["run_mean"] = op.run_mean;
        jo["run_var"] = op.run_var;
        break;
      case OpKind::Dropout:
        jo["rate"] = op.rate;
        break;
      default:
        break;
    }
    ops.push_back(std::move(jo));
  }
  return json{{"format_version", 1},
              {"config",
               {{"input_dim", m.input_dim},
                {"output_dim", m.output_dim},
                {"max_norm", m.max_norm}}},
              {"ops", std::move(ops)}};
}

}  // namespace

void save_model(const MlpModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  out << model_to_json(m).dump() << '\n';
  if (!out) throw IoError("model write failed: " + path);
}

MlpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("model parse failed: " + path + ": " + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != 1)
      throw IoError("model: unsupported format_version");
    MlpModel m;
    const json& cfg = j.at("config");
    m.input_dim = cfg.at("input_dim").get<int>();
    m.output_dim = cfg.at("output_dim").get<int>();
    m.max_norm = cfg.at("max_norm").get<double>();
    for (const json& jo : j.at("ops")) {
      Op op;
      op.kind = kind_from_name(jo.at("kind").get<std::string>());
      op.width = jo.at("width").get<int>();
      switch (op.kind) {
        case OpKind::Linear:
          op.w = matrix_from_json(jo.at("w"));
          op.b = jo.at("b").get<Vector>();
          if (static_cast<int>(op.b.size()) != op.w.rows)
            throw IoError("model: linear bias/weight mismatch");
          break;
        case OpKind::BatchNorm:
          op.gamma = jo.at("gamma").get<Vector>();
          op.beta = jo.at("beta").get<Vector>();
          op.run_mean = jo.at("run_mean").get<Vector>();
          op.run_var = jo.at("run_var").get<Vector>();
          break;
        case OpKind::Dropout:
          op.rate = jo.at("rate").get<double>();
          break;
        default:
          break;
      }
      m.ops.push_back(std::move(op));
    }
    return m;
  } catch (const json::exception& e) {
    throw IoError("model load failed: " + path + ": " + e.what());
  }
}

uint64_t model_hash(const MlpModel& m) {
  const std::string bytes = model_to_json(m).dump();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace poselift
