// poselift: synthetic stereo corpora, lifting-network training, and
// reprojection-consistent 3D labeling over JSONL keypoint datasets.
//
// Exit codes: 0 success, 1 validation or metric-threshold failure,
// 2 usage, 3 IO/parse.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "poselift/action.hpp"
#include "poselift/config.hpp"
#include "poselift/dataset.hpp"
#include "poselift/errors.hpp"
#include "poselift/geosearch.hpp"
#include "poselift/lifting.hpp"
#include "poselift/metrics.hpp"
#include "poselift/model_io.hpp"
#include "poselift/pipeline.hpp"
#include "poselift/svgplot.hpp"
#include "poselift/synthgen.hpp"

namespace {

using namespace poselift;

struct Opts {
  std::string config_path, out, data, pred_path, gt_path;
  std::string view_model_path, recon_model_path, model_path, history_path, dump_data;
  std::string mode = "self";
  std::string search_mode;
  uint64_t seed = 0;
  bool seed_given = false;
  size_t n = 0, n_per_class = 0;
  int epochs = -1, hidden = -1, blocks = -1, batch = -1;
  double dx = -1, fx = -1, fy = -1, cx = -1, cy = -1;
  double dropout = -1, max_norm = -1, lr0 = -1, lr_decay = -1, weight_decay = -1;
  double split = -1, step = -1, zmax = -1;
  double max_mm = -1, min_pckh = -1, min_pck = -1, min_auc = -1, min_accuracy = -1;
  double max_spread = -1;
  bool ablate = false;
  std::vector<double> dx_list;

  Config cfg;  // from --config, loaded before the handler runs

  // CLI value if set, else config key, else the built-in default. A negative
  // CLI value means "not given" for every numeric option below.
  double d(double cli, const char* key, double def) const {
    return cli >= 0 ? cli : cfg.get_double(key, def);
  }
  int i(int cli, const char* key, int def) const {
    return cli >= 0 ? cli : cfg.get_int(key, def);
  }
  size_t u(size_t cli, const char* key, size_t def) const {
    return cli > 0 ? cli : size_t(cfg.get_u64(key, def));
  }
  uint64_t resolved_seed() const {
    return seed_given ? seed : cfg.get_u64("seed", 0);
  }

  TrainConfig train_config(int default_epochs) const {
    TrainConfig tc;
    tc.lr0 = d(lr0, "lr0", tc.lr0);
    tc.lr_decay = d(lr_decay, "lr_decay", tc.lr_decay);
    tc.beta1 = cfg.get_double("beta1", tc.beta1);
    tc.beta2 = cfg.get_double("beta2", tc.beta2);
    tc.weight_decay = d(weight_decay, "weight_decay", tc.weight_decay);
    tc.batch_size = i(batch, "batch_size", tc.batch_size);
    tc.epochs = i(epochs, "epochs", default_epochs);
    tc.seed = resolved_seed();
    return tc;
  }
  LiftingHyper lifting_hyper() const {
    LiftingHyper h;
    h.hidden_dim = i(hidden, "hidden_dim", h.hidden_dim);
    h.n_residual_blocks = i(blocks, "n_residual_blocks", h.n_residual_blocks);
    h.dropout_rate = d(dropout, "dropout", h.dropout_rate);
    h.max_norm = d(max_norm, "max_norm", h.max_norm);
    h.init_seed = resolved_seed();
    return h;
  }
  SearchConfig search_config() const {
    SearchConfig sc;
    sc.step_mm = d(step, "step_mm", sc.step_mm);
    sc.z_max_mm = d(zmax, "z_max_mm", sc.z_max_mm);
    const std::string m =
        !search_mode.empty() ? search_mode : cfg.get_string("search_mode", "scan");
    if (m == "closed")
      sc.mode = SearchConfig::Mode::ClosedForm;
    else if (m == "scan")
      sc.mode = SearchConfig::Mode::Scan;
    else
      throw IoError("unknown search_mode '" + m + "' (scan|closed)");
    return sc;
  }
  SynthConfig synth_config() const {
    SynthConfig sc = default_synth_config(resolved_seed());
    sc.dx = d(dx, "dx", sc.dx);
    sc.intrinsics.fx = d(fx, "fx", sc.intrinsics.fx);
    sc.intrinsics.fy = d(fy, "fy", sc.intrinsics.fy);
    sc.intrinsics.cx = d(cx, "cx", sc.intrinsics.cx);
    sc.intrinsics.cy = d(cy, "cy", sc.intrinsics.cy);
    return sc;
  }
  IndexSplit make_split(size_t count) const {
    return split_by_index_hash(count, d(split, "split_fraction", 0.9),
                               cfg.get_u64("split_salt", 0));
  }
};

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void emit(const nlohmann::json& summary) { std::printf("%s\n", summary.dump().c_str()); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

void write_history_csv(const std::string& path, const std::vector<double>& history) {
  std::string csv = "epoch,loss\n";
  for (size_t e = 0; e < history.size(); ++e)
    csv += std::to_string(e) + "," + fmt_g(history[e]) + "\n";
  write_text(path, csv);
}

// ---------- record matching for eval ----------

struct MatchedRecords {
  JointSchema schema;
  std::vector<const DatasetRecord*> pred, gt;  // same length, aligned by id
  size_t skipped = 0;                          // pred ids with no gt partner
};

MatchedRecords match_by_id(const std::string& pred_path, const std::string& gt_path,
                           std::vector<DatasetRecord>& pred_store,
                           std::vector<DatasetRecord>& gt_store) {
  auto [pred_schema, preds] = read_dataset(pred_path);
  auto [gt_schema, gts] = read_dataset(gt_path);
  if (pred_schema.name != gt_schema.name)
    throw SchemaMismatch("pred schema '" + pred_schema.name + "' vs gt schema '" +
                         gt_schema.name + "'");
  pred_store = std::move(preds);
  gt_store = std::move(gts);

  std::unordered_map<std::string, const DatasetRecord*> gt_by_id;
  for (const DatasetRecord& r : gt_store) gt_by_id[r.id] = &r;

  MatchedRecords m;
  m.schema = pred_schema;
  for (const DatasetRecord& r : pred_store) {
    auto it = gt_by_id.find(r.id);
    if (it == gt_by_id.end()) {
      ++m.skipped;
      continue;
    }
    m.pred.push_back(&r);
    m.gt.push_back(it->second);
  }
  if (m.pred.empty()) throw EmptyDataset("no records with matching ids between pred and gt");
  return m;
}

void collect_3d(const MatchedRecords& m, std::vector<Pose3D>& pred, std::vector<Pose3D>& gt) {
  for (size_t i = 0; i < m.pred.size(); ++i) {
    if (!m.pred[i]->joints3d_rel)
      throw SchemaMismatch("record " + m.pred[i]->id + ": pred has no joints3d_rel");
    if (!m.gt[i]->joints3d_rel)
      throw SchemaMismatch("record " + m.gt[i]->id + ": gt has no joints3d_rel");
    pred.push_back(*m.pred[i]->joints3d_rel);
    gt.push_back(*m.gt[i]->joints3d_rel);
  }
}

// ---------- handlers ----------

int run_synth_gen(const Opts& o) {
  const SynthConfig sc = o.synth_config();
  const size_t n = o.u(o.n, "n", 1000);
  const GenSummary s = generate_dataset(sc, n, o.out);
  emit({{"command", "synth gen"},
        {"count", s.count},
        {"seed", s.seed},
        {"dx", sc.dx},
        {"out", o.out}});
  return 0;
}

int run_train_viewsynth(const Opts& o) {
  auto [schema, records] = read_dataset(o.data);
  const auto pairs = records_to_pairs(records, schema, /*need_right=*/true, /*need_3d=*/false);
  const IndexSplit split = o.make_split(pairs.size());
  const LiftingHyper hyper = o.lifting_hyper();
  const TrainConfig tc = o.train_config(/*default_epochs=*/25);

  std::vector<double> history;
  const MlpModel vm = train_view_synthesis(pairs, split.train, schema, hyper, tc, &history);
  save_model(vm, o.out);
  if (!o.history_path.empty()) write_history_csv(o.history_path, history);

  const double holdout_pckh =
      split.holdout.empty() ? -1.0
                            : eval_view_synthesis_pckh(vm, pairs, split.holdout, schema);
  emit({{"command", "train viewsynth"},
        {"train_count", split.train.size()},
        {"holdout_count", split.holdout.size()},
        {"holdout_pckh", holdout_pckh},
        {"final_loss", history.empty() ? -1.0 : history.back()},
        {"model", o.out}});
  if (o.min_pckh >= 0 && holdout_pckh < o.min_pckh) {
    std::fprintf(stderr, "holdout PCKh %.4f below threshold %.4f\n", holdout_pckh, o.min_pckh);
    return 1;
  }
  return 0;
}

ReconMode parse_mode(const std::string& mode) {
  if (mode == "self") return ReconMode::SelfSynthesized;
  if (mode == "teacher") return ReconMode::TeacherForced;
  if (mode == "mono") return ReconMode::Monocular;
  throw IoError("unknown recon mode '" + mode + "' (self|teacher|mono)");
}

int run_train_recon(const Opts& o) {
  const ReconMode mode = parse_mode(o.mode);
  const bool stereo = mode != ReconMode::Monocular;
  if (stereo && o.view_model_path.empty())
    throw CLI::RequiredError("--view-model (required for stereo modes)");

  auto [schema, records] = read_dataset(o.data);
  const auto pairs = records_to_pairs(records, schema,
                                      /*need_right=*/mode == ReconMode::TeacherForced,
                                      /*need_3d=*/true);
  const IndexSplit split = o.make_split(pairs.size());
  const LiftingHyper hyper = o.lifting_hyper();
  const TrainConfig tc = o.train_config(/*default_epochs=*/25);

  MlpModel vm;
  if (stereo) vm = load_model(o.view_model_path);
  std::vector<double> history;
  const MlpModel rm = train_reconstruction(pairs, split.train, stereo ? &vm : nullptr, schema,
                                           hyper, tc, mode, &history);
  save_model(rm, o.out);
  if (!o.history_path.empty()) write_history_csv(o.history_path, history);

  const double holdout_mpjpe =
      split.holdout.empty() ? -1.0 : eval_recon_mpjpe(vm, rm, pairs, split.holdout, schema);
  emit({{"command", "train recon"},
        {"mode", o.mode},
        {"train_count", split.train.size()},
        {"holdout_count", split.holdout.size()},
        {"holdout_mpjpe_mm", holdout_mpjpe},
        {"final_loss", history.empty() ? -1.0 : history.back()},
        {"model", o.out}});
  if (o.max_mm >= 0 && holdout_mpjpe > o.max_mm) {
    std::fprintf(stderr, "holdout MPJPE %.2f mm above threshold %.2f mm\n", holdout_mpjpe,
                 o.max_mm);
    return 1;
  }
  return 0;
}

int run_label(const Opts& o) {
  const MlpModel vm = load_model(o.view_model_path);
  const MlpModel rm = load_model(o.recon_model_path);
  const LabelSummary s = label_dataset(o.data, o.out, vm, rm, o.search_config());
  emit({{"command", "label"},
        {"total", s.total},
        {"labeled", s.labeled},
        {"failed", s.failed},
        {"wall_time_s", s.wall_time_s},
        {"out", o.out}});
  return 0;
}

int run_refine(const Opts& o) {
  const LabelSummary s = refine_dataset(o.data, o.out, o.search_config());
  emit({{"command", "refine"},
        {"total", s.total},
        {"labeled", s.labeled},
        {"failed", s.failed},
        {"wall_time_s", s.wall_time_s},
        {"out", o.out}});
  return 0;
}

int run_validate(const Opts& o) {
  const std::vector<Violation> violations = validate_dataset(o.data);
  for (const Violation& v : violations)
    std::fprintf(stderr, "line %zu (%s): %s\n", v.line, v.record_id.c_str(), v.message.c_str());
  emit({{"command", "validate"}, {"data", o.data}, {"violations", violations.size()}});
  return violations.empty() ? 0 : 1;
}

int run_eval_mpjpe(const Opts& o) {
  std::vector<DatasetRecord> ps, gs;
  const MatchedRecords m = match_by_id(o.pred_path, o.gt_path, ps, gs);
  std::vector<Pose3D> pred, gt;
  collect_3d(m, pred, gt);
  const MetricReport rep = aggregate_mpjpe(pred, gt, m.schema);
  if (!o.out.empty()) write_text(o.out, metric_csv_row(rep) + "\n");
  emit({{"command", "eval mpjpe"},
        {"value_mm", rep.value},
        {"count", rep.count},
        {"skipped", m.skipped}});
  if (o.max_mm >= 0 && rep.value > o.max_mm) {
    std::fprintf(stderr, "MPJPE %.2f mm above threshold %.2f mm\n", rep.value, o.max_mm);
    return 1;
  }
  return 0;
}

int run_eval_pckh(const Opts& o) {
  std::vector<DatasetRecord> ps, gs;
  const MatchedRecords m = match_by_id(o.pred_path, o.gt_path, ps, gs);
  std::vector<Pose2D> pred, gt;
  for (size_t i = 0; i < m.pred.size(); ++i) {
    pred.push_back(m.pred[i]->joints2d);
    gt.push_back(m.gt[i]->joints2d);
  }
  const MetricReport rep = aggregate_pckh(pred, gt, m.schema);
  if (!o.out.empty()) write_text(o.out, metric_csv_row(rep) + "\n");
  emit({{"command", "eval pckh"},
        {"value", rep.value},
        {"count", rep.count},
        {"skipped", m.skipped}});
  if (o.min_pckh >= 0 && rep.value < o.min_pckh) {
    std::fprintf(stderr, "PCKh %.4f below threshold %.4f\n", rep.value, o.min_pckh);
    return 1;
  }
  return 0;
}

int run_eval_pck3d(const Opts& o) {
  std::vector<DatasetRecord> ps, gs;
  const MatchedRecords m = match_by_id(o.pred_path, o.gt_path, ps, gs);
  std::vector<Pose3D> pred, gt;
  collect_3d(m, pred, gt);
  const auto [pck_rep, auc_rep] = aggregate_pck3d(pred, gt, m.schema);
  if (!o.out.empty())
    write_text(o.out, metric_csv_row(pck_rep) + "\n" + metric_csv_row(auc_rep) + "\n");
  emit({{"command", "eval pck3d"},
        {"pck", pck_rep.value},
        {"auc", auc_rep.value},
        {"count", pck_rep.count},
        {"skipped", m.skipped}});
  if (o.min_pck >= 0 && pck_rep.value < o.min_pck) return 1;
  if (o.min_auc >= 0 && auc_rep.value < o.min_auc) return 1;
  return 0;
}

std::vector<ActionSequence> subset(const std::vector<ActionSequence>& seqs,
                                   const std::vector<size_t>& idx) {
  std::vector<ActionSequence> out;
  out.reserve(idx.size());
  for (size_t i : idx) out.push_back(seqs[i]);
  return out;
}

int run_action_train(const Opts& o) {
  std::vector<ActionSequence> seqs =
      o.data.empty() ? gen_motion_dataset(o.resolved_seed(), o.u(o.n_per_class, "n_per_class", 100))
                     : load_sequences(o.data);
  if (!o.dump_data.empty()) save_sequences(o.dump_data, seqs);
  if (o.ablate) seqs = ablate_depth(seqs);

  const IndexSplit split = o.make_split(seqs.size());
  TrainConfig tc = o.train_config(/*default_epochs=*/40);
  const ActionModel m = train_action(subset(seqs, split.train), tc);
  save_model(m.mlp, o.out);

  const double acc =
      split.holdout.empty() ? -1.0 : action_accuracy(m, subset(seqs, split.holdout));
  emit({{"command", "action train"},
        {"classes", m.n_classes},
        {"train_count", split.train.size()},
        {"holdout_count", split.holdout.size()},
        {"holdout_accuracy", acc},
        {"ablate_depth", o.ablate},
        {"model", o.out}});
  if (o.min_accuracy >= 0 && acc < o.min_accuracy) {
    std::fprintf(stderr, "holdout accuracy %.4f below threshold %.4f\n", acc, o.min_accuracy);
    return 1;
  }
  return 0;
}

int run_action_eval(const Opts& o) {
  const ActionModel m = action_model_from_mlp(load_model(o.model_path));
  std::vector<ActionSequence> seqs = load_sequences(o.data);
  if (o.ablate) seqs = ablate_depth(seqs);
  const double acc = action_accuracy(m, seqs);
  emit({{"command", "action eval"},
        {"count", seqs.size()},
        {"accuracy", acc},
        {"ablate_depth", o.ablate}});
  if (o.min_accuracy >= 0 && acc < o.min_accuracy) return 1;
  return 0;
}

int run_report_loss(const Opts& o) {
  std::ifstream in(o.history_path);
  if (!in) throw IoError("cannot open " + o.history_path);
  std::filesystem::create_directories(o.out);
  Series s;
  s.name = std::filesystem::path(o.history_path).stem().string();
  std::string line, csv;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    csv += line + "\n";
    if (line_no == 1 || line.empty()) continue;  // header
    const size_t comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(line_no, "expected epoch,loss");
    try {
      s.xs.push_back(std::stod(line.substr(0, comma)));
      s.ys.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ParseError(line_no, "expected epoch,loss");
    }
  }
  if (s.xs.empty()) throw ParseError(line_no, "no data rows in " + o.history_path);
  const std::string csv_path = (std::filesystem::path(o.out) / "loss.csv").string();
  const std::string svg_path = (std::filesystem::path(o.out) / "loss.svg").string();
  write_text(csv_path, csv);
  write_line_plot(svg_path, "Training loss", "epoch", "loss", {s});
  emit({{"command", "report loss"}, {"csv", csv_path}, {"svg", svg_path}});
  return 0;
}

int run_report_errors(const Opts& o) {
  std::vector<DatasetRecord> ps, gs;
  const MatchedRecords m = match_by_id(o.pred_path, o.gt_path, ps, gs);
  std::vector<Pose3D> pred3, gt3;
  collect_3d(m, pred3, gt3);
  std::filesystem::create_directories(o.out);

  const MetricReport mpjpe = aggregate_mpjpe(pred3, gt3, m.schema);
  const auto [pck, auc] = aggregate_pck3d(pred3, gt3, m.schema);
  std::string metrics_csv = "metric,name,value,count\n";
  metrics_csv += metric_csv_row(mpjpe) + "\n" + metric_csv_row(pck) + "\n" +
                 metric_csv_row(auc) + "\n";
  const std::string metrics_path = (std::filesystem::path(o.out) / "metrics.csv").string();
  write_text(metrics_path, metrics_csv);

  std::string per_joint_csv = "joint_index,joint_name,mean_error_mm\n";
  Series s{"mean error (mm)", {}, {}};
  for (size_t j = 0; j < mpjpe.per_joint.size(); ++j) {
    per_joint_csv += std::to_string(j) + "," + m.schema.joint_names[j] + "," +
                     fmt_g(mpjpe.per_joint[j]) + "\n";
    s.xs.push_back(double(j));
    s.ys.push_back(mpjpe.per_joint[j]);
  }
  const std::string pj_path = (std::filesystem::path(o.out) / "per_joint_errors.csv").string();
  const std::string svg_path = (std::filesystem::path(o.out) / "per_joint_errors.svg").string();
  write_text(pj_path, per_joint_csv);
  write_line_plot(svg_path, "Per-joint mean error", "joint index", "mm", {s});
  emit({{"command", "report errors"},
        {"mpjpe_mm", mpjpe.value},
        {"pck3d", pck.value},
        {"auc", auc.value},
        {"out", o.out}});
  return 0;
}

int run_report_dx_ablation(const Opts& o) {
  const uint64_t seed = o.resolved_seed();
  const size_t n = o.u(o.n, "n", 6000);
  std::vector<double> dxs = o.dx_list;
  if (dxs.empty()) dxs = {250.0, 500.0, 750.0};

  LiftingHyper hyper = o.lifting_hyper();
  if (o.hidden < 0 && !o.cfg.has("hidden_dim")) hyper.hidden_dim = 192;
  const TrainConfig tc = o.train_config(/*default_epochs=*/20);
  const JointSchema& schema = h36m16();

  std::filesystem::create_directories(o.out);
  std::string csv = "dx_mm,holdout_mpjpe_mm\n";
  Series s{"holdout MPJPE", {}, {}};
  std::vector<double> results;
  for (double dx_mm : dxs) {
    SynthConfig sc = o.synth_config();
    sc.seed = seed;  // same poses for every baseline; only the right view moves
    sc.dx = dx_mm;
    std::vector<TrainingPair> pairs;
    pairs.reserve(n);
    for (size_t i = 0; i < n; ++i) pairs.push_back(generate_pair_at(sc, i));
    const IndexSplit split = o.make_split(pairs.size());

    const MlpModel vm = train_view_synthesis(pairs, split.train, schema, hyper, tc);
    const MlpModel rm = train_reconstruction(pairs, split.train, &vm, schema, hyper, tc,
                                             ReconMode::SelfSynthesized);
    const double mpjpe = eval_recon_mpjpe(vm, rm, pairs, split.holdout, schema);
    results.push_back(mpjpe);
    csv += fmt_g(dx_mm) + "," + fmt_g(mpjpe) + "\n";
    s.xs.push_back(dx_mm);
    s.ys.push_back(mpjpe);
    std::fprintf(stderr, "dx=%g mm -> holdout MPJPE %.2f mm\n", dx_mm, mpjpe);
  }

  const std::string csv_path = (std::filesystem::path(o.out) / "dx_ablation.csv").string();
  const std::string svg_path = (std::filesystem::path(o.out) / "dx_ablation.svg").string();
  write_text(csv_path, csv);
  write_line_plot(svg_path, "Stereo baseline ablation", "baseline shift (mm)",
                  "holdout MPJPE (mm)", {s});

  const double lo = *std::min_element(results.begin(), results.end());
  const double hi = *std::max_element(results.begin(), results.end());
  const double spread = lo > 0 ? (hi - lo) / lo : std::numeric_limits<double>::infinity();
  emit({{"command", "report dx-ablation"},
        {"dx_mm", dxs},
        {"holdout_mpjpe_mm", results},
        {"rel_spread", spread},
        {"csv", csv_path}});
  if (o.max_spread >= 0 && spread >= o.max_spread) {
    std::fprintf(stderr, "relative spread %.4f not below %.4f\n", spread, o.max_spread);
    return 1;
  }
  return 0;
}

// ---------- wiring ----------

void add_train_options(CLI::App* cmd, Opts& o) {
  cmd->add_option("--epochs", o.epochs, "training epochs");
  cmd->add_option("--hidden", o.hidden, "hidden width");
  cmd->add_option("--blocks", o.blocks, "residual blocks");
  cmd->add_option("--batch", o.batch, "batch size");
  cmd->add_option("--dropout", o.dropout, "dropout rate");
  cmd->add_option("--max-norm", o.max_norm, "per-row weight norm cap");
  cmd->add_option("--lr0", o.lr0, "initial learning rate");
  cmd->add_option("--lr-decay", o.lr_decay, "per-epoch lr decay");
  cmd->add_option("--weight-decay", o.weight_decay, "L2 weight decay");
  cmd->add_option("--split", o.split, "train fraction of the index-hash split");
  cmd->add_option("--history", o.history_path, "write per-epoch loss CSV here");
}

void add_search_options(CLI::App* cmd, Opts& o) {
  cmd->add_option("--step", o.step, "depth scan step, mm");
  cmd->add_option("--zmax", o.zmax, "depth scan upper bound, mm");
  cmd->add_option("--search-mode", o.search_mode, "scan|closed")
      ->check(CLI::IsMember({"scan", "closed"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stereo-consistent 3D pose label generator"};
  app.require_subcommand(1);
  app.fallthrough();

  auto o = std::make_shared<Opts>();
  auto* config_opt =
      app.add_option("--config", o->config_path, "key=value config file (CLI flags win)");
  auto* seed_opt = app.add_option("--seed", o->seed, "RNG seed");
  app.add_option("--out", o->out, "output file or directory");
  int rc = 0;
  // Installs the handler as the leaf command's final callback. By the time it
  // runs, CLI11 has assigned every option value — including ones that fell
  // through to the root app — so the --out requirement and --config loading
  // are checked here, not in a parse_complete_callback (which fires before
  // fallthrough values are bound).
  auto install = [&rc, o, config_opt, seed_opt](CLI::App* cmd, int (*fn)(const Opts&),
                                                bool needs_out = false) {
    cmd->callback([&rc, o, cmd, fn, needs_out, config_opt, seed_opt] {
      if (needs_out && o->out.empty())
        throw CLI::RequiredError(cmd->get_name() + ": --out");
      if (config_opt->count() > 0) o->cfg = Config::from_file(o->config_path);
      o->seed_given = seed_opt->count() > 0;
      rc = fn(*o);
    });
  };

  auto* synth = app.add_subcommand("synth", "synthetic data")->require_subcommand(1);
  synth->fallthrough();
  auto* gen = synth->add_subcommand("gen", "generate a stereo training corpus");
  gen->fallthrough();
  gen->add_option("--n", o->n, "record count");
  gen->add_option("--dx", o->dx, "stereo baseline shift, mm");
  gen->add_option("--fx", o->fx, "focal length x, px");
  gen->add_option("--fy", o->fy, "focal length y, px");
  gen->add_option("--cx", o->cx, "principal point x, px");
  gen->add_option("--cy", o->cy, "principal point y, px");
  install(gen, run_synth_gen, /*needs_out=*/true);

  auto* train = app.add_subcommand("train", "train lifting networks")->require_subcommand(1);
  train->fallthrough();
  auto* viewsynth = train->add_subcommand("viewsynth", "left 2D -> right 2D view synthesis");
  viewsynth->fallthrough();
  viewsynth->add_option("--data", o->data, "training JSONL")->required();
  viewsynth->add_option("--min-pckh", o->min_pckh, "fail (exit 1) below this holdout PCKh");
  add_train_options(viewsynth, *o);
  install(viewsynth, run_train_viewsynth, /*needs_out=*/true);

  auto* recon = train->add_subcommand("recon", "2D -> root-relative 3D reconstruction");
  recon->fallthrough();
  recon->add_option("--data", o->data, "training JSONL")->required();
  recon->add_option("--view-model", o->view_model_path, "frozen view-synthesis model");
  recon->add_option("--mode", o->mode, "right-view source: self|teacher|mono")
      ->check(CLI::IsMember({"self", "teacher", "mono"}));
  recon->add_option("--max-mpjpe", o->max_mm, "fail (exit 1) above this holdout MPJPE, mm");
  add_train_options(recon, *o);
  install(recon, run_train_recon, /*needs_out=*/true);

  auto* label = app.add_subcommand("label", "attach refined 3D labels to a 2D dataset");
  label->fallthrough();
  label->add_option("--data", o->data, "input JSONL")->required();
  label->add_option("--view-model", o->view_model_path, "view-synthesis model")->required();
  label->add_option("--recon-model", o->recon_model_path, "reconstruction model")->required();
  add_search_options(label, *o);
  install(label, run_label, /*needs_out=*/true);

  auto* refine_cmd = app.add_subcommand("refine", "re-run the depth search on existing 3D");
  refine_cmd->fallthrough();
  refine_cmd->add_option("--data", o->data, "input JSONL")->required();
  add_search_options(refine_cmd, *o);
  install(refine_cmd, run_refine, /*needs_out=*/true);

  auto* validate = app.add_subcommand("validate", "check every record invariant");
  validate->fallthrough();
  validate->add_option("--data", o->data, "JSONL to check")->required();
  install(validate, run_validate);

  auto* eval = app.add_subcommand("eval", "compare datasets by id")->require_subcommand(1);
  eval->fallthrough();
  auto add_eval_common = [&](CLI::App* cmd) {
    cmd->fallthrough();
    cmd->add_option("--pred", o->pred_path, "predicted JSONL")->required();
    cmd->add_option("--gt", o->gt_path, "ground-truth JSONL")->required();
  };
  auto* mpjpe = eval->add_subcommand("mpjpe", "mean per-joint position error, mm");
  add_eval_common(mpjpe);
  mpjpe->add_option("--max-mm", o->max_mm, "fail (exit 1) above this value");
  install(mpjpe, run_eval_mpjpe);
  auto* pckh_cmd = eval->add_subcommand("pckh", "2D PCKh@0.5");
  add_eval_common(pckh_cmd);
  pckh_cmd->add_option("--min", o->min_pckh, "fail (exit 1) below this value");
  install(pckh_cmd, run_eval_pckh);
  auto* pck3d = eval->add_subcommand("pck3d", "3D PCK@150mm and AUC");
  add_eval_common(pck3d);
  pck3d->add_option("--min-pck", o->min_pck, "fail (exit 1) below this PCK");
  pck3d->add_option("--min-auc", o->min_auc, "fail (exit 1) below this AUC");
  install(pck3d, run_eval_pck3d);

  auto* action = app.add_subcommand("action", "sequence classifier")->require_subcommand(1);
  action->fallthrough();
  auto* atrain = action->add_subcommand("train", "train the action classifier");
  atrain->fallthrough();
  atrain->add_option("--data", o->data, "sequence JSONL (default: generate synthetic motions)");
  atrain->add_option("--n-per-class", o->n_per_class, "sequences per class when generating");
  atrain->add_option("--dump-data", o->dump_data, "also write the sequences here");
  atrain->add_flag("--ablate-depth", o->ablate, "zero every z before training");
  atrain->add_option("--min-accuracy", o->min_accuracy, "fail (exit 1) below this accuracy");
  atrain->add_option("--epochs", o->epochs, "training epochs");
  atrain->add_option("--batch", o->batch, "batch size");
  atrain->add_option("--split", o->split, "train fraction");
  install(atrain, run_action_train, /*needs_out=*/true);
  auto* aeval = action->add_subcommand("eval", "evaluate a saved classifier");
  aeval->fallthrough();
  aeval->add_option("--model", o->model_path, "classifier model JSON")->required();
  aeval->add_option("--data", o->data, "sequence JSONL")->required();
  aeval->add_flag("--ablate-depth", o->ablate, "zero every z before evaluating");
  aeval->add_option("--min-accuracy", o->min_accuracy, "fail (exit 1) below this accuracy");
  install(aeval, run_action_eval);

  auto* report = app.add_subcommand("report", "CSV / SVG reports")->require_subcommand(1);
  report->fallthrough();
  auto* rloss = report->add_subcommand("loss", "loss-curve plot from a history CSV");
  rloss->fallthrough();
  rloss->add_option("--history", o->history_path, "epoch,loss CSV")->required();
  install(rloss, run_report_loss, /*needs_out=*/true);
  auto* rerr = report->add_subcommand("errors", "metric table and per-joint error histogram");
  rerr->fallthrough();
  rerr->add_option("--pred", o->pred_path, "predicted JSONL")->required();
  rerr->add_option("--gt", o->gt_path, "ground-truth JSONL")->required();
  install(rerr, run_report_errors, /*needs_out=*/true);
  auto* rdx = report->add_subcommand("dx-ablation", "train/eval across stereo baselines");
  rdx->fallthrough();
  rdx->add_option("--n", o->n, "corpus size per baseline");
  rdx->add_option("--dx-list", o->dx_list, "baseline shifts to test, mm");
  rdx->add_option("--max-spread", o->max_spread, "fail (exit 1) unless relative spread is below");
  add_train_options(rdx, *o);
  install(rdx, run_report_dx_ablation, /*needs_out=*/true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return 3;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "json error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return rc;
}
