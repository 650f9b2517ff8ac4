#include "mpgrade/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <json.hpp>
#include <map>
#include <mutex>
#include <optional>
#include <set>

#include "mpgrade/cascade.hpp"
#include "mpgrade/config.hpp"
#include "mpgrade/features.hpp"
#include "mpgrade/io_util.hpp"
#include "mpgrade/parallel.hpp"
#include "mpgrade/phantom.hpp"
#include "mpgrade/preprocess.hpp"
#include "mpgrade/report.hpp"
#include "mpgrade/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mpgrade {

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
};

ExperimentConfig load(const Common& common, std::initializer_list<std::string_view> required) {
  std::string path = common.config;
  if (path.empty())
    if (const char* env = std::getenv(kConfigEnv)) path = env;
  if (path.empty()) throw ConfigError(std::string("no config file: pass --config or set ") + kConfigEnv);
  auto cfg = load_config(path, required);
  if (common.seed) apply_seed(cfg, *common.seed);
  return cfg;
}

// Tracks whether a command rewrote anything.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  const fs::path& dir() const { return dir_; }
  void note(bool changed) { changed_ = changed_ || changed; }
  void text(const fs::path& rel, std::string_view content) {
    if (!(dir_ / rel).parent_path().empty()) fs::create_directories((dir_ / rel).parent_path());
    note(write_if_changed(dir_ / rel, content));
  }
  void summary(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }
  void report(std::ostream& out) const { out << (changed_ ? "wrote " : "up-to-date: ") << dir_.string() << "\n"; }

 private:
  fs::path dir_;
  bool changed_ = false;
};

json split_counts(const DatasetManifest& m) {
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  for (const auto& e : m.entries) ++counts[std::string(split_name(e.split))][std::to_string(e.label)];
  return counts;
}

int cmd_phantom(const Common& common, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  const auto cfg = load(common, {"phantom"});
  Outputs o(out_dir);
  bool changed = false;
  const auto generated = generate_dataset(cfg.phantom, o.dir(), common.jobs, &changed);
  o.note(changed);
  const auto split = split_dataset(generated, cfg.train.split_seed);
  o.text("manifest.csv", format_manifest(split.manifest));
  json folds = json::array();
  if (cfg.train.folds >= 2) {
    const auto fold_splits = split_folds(generated, cfg.train.split_seed, cfg.train.folds);
    for (std::size_t f = 0; f < fold_splits.size(); ++f) {
      const std::string name = "manifest_fold" + std::to_string(f) + ".csv";
      o.text(name, format_manifest(fold_splits[f].manifest));
      folds.push_back(name);
    }
  }
  for (const auto& w : split.warnings) err << "warning: " << w << "\n";
  o.summary("phantom_summary.json", {{"command", "phantom"},
                                     {"seed", cfg.seed},
                                     {"cases", generated.entries.size()},
                                     {"manifest", "manifest.csv"},
                                     {"fold_manifests", folds},
                                     {"split_counts", split_counts(split.manifest)},
                                     {"warnings", split.warnings}});
  o.report(out);
  out << (o.dir() / "manifest.csv").string() << "\n";
  return 0;
}

// Applies `fn` to every volume of the manifest and writes the results under
// out_dir with the same relative paths. Per-volume failures are listed.
template <typename F>
int map_volumes(const Common& common, const std::string& manifest_path, Outputs& o, std::ostream& err, F&& fn) {
  const auto manifest = load_manifest(manifest_path);
  std::vector<std::string> errors(manifest.entries.size());
  std::vector<char> changed(manifest.entries.size(), 0);
  parallel_for(manifest.entries.size(), common.jobs, [&](std::size_t i) {
    const auto& e = manifest.entries[i];
    try {
      const auto vol = fn(read_volume(resolve_entry(manifest_path, e)), e);
      const auto target = o.dir() / e.path;
      fs::create_directories(target.parent_path());
      changed[i] = write_volume(vol, target) ? 1 : 0;
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
    }
  });
  std::size_t failures = 0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    o.note(changed[i] != 0);
    if (!errors[i].empty()) {
      err << "error: " << manifest.entries[i].path << ": " << errors[i] << "\n";
      ++failures;
    }
  }
  o.text("manifest.csv", format_manifest(manifest));
  return failures == 0 ? 0 : 1;
}

int cmd_preprocess(const Common& common, const std::string& manifest, const std::string& out_dir, std::ostream& out,
                   std::ostream& err) {
  const auto cfg = load(common, {"preprocess"});
  Outputs o(out_dir);
  const int rc = map_volumes(common, manifest, o, err,
                             [&](const MpMriVolume& v, const ManifestEntry&) { return preprocess_volume(v, cfg.preprocess); });
  o.summary("preprocess_summary.json", {{"command", "preprocess"},
                                        {"target_width", cfg.preprocess.target_width},
                                        {"target_height", cfg.preprocess.target_height},
                                        {"ok", rc == 0}});
  o.report(out);
  return rc;
}

void dump_maps(const MpMriVolume& in, const MpMriVolume& extracted, const FeConfig& fe, std::optional<std::size_t> slice,
               const fs::path& dir, const std::string& stem, std::mutex& mutex, bool& changed) {
  const std::size_t k = std::min(slice.value_or(in.dims.slices / 2), in.dims.slices - 1);
  const std::size_t w = in.dims.cols, h = in.dims.rows;
  auto slice_of = [&](const Field3& f) {
    return std::span<const double>(f.values).subspan(k * h * w, h * w);
  };
  std::vector<std::pair<std::string, std::string>> images;
  for (const char* name : {"T2W", "ADC", "DWI"}) {
    const auto field = channel_field(in, in.require_channel(name));
    std::string lower = name;
    for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    images.emplace_back(stem + "_" + lower + "_sd.pgm", encode_pgm(to_gray(slice_of(symmetric_difference(field, fe)), w, h)));
    images.emplace_back(stem + "_" + lower + "_sw.pgm", encode_pgm(to_gray(slice_of(symmetrically_weighted(field, fe)), w, h)));
    images.emplace_back(stem + "_" + lower + "_mix.pgm", encode_pgm(to_gray(slice_of(mix(field, fe)), w, h)));
  }
  const auto fe_field = channel_field(extracted, extracted.require_channel("FE"));
  const auto fe_slice = slice_of(fe_field);
  GrayImage fe_img{w, h, {}};
  for (const double v : fe_slice) fe_img.pixels.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))));
  images.emplace_back(stem + "_fe.pgm", encode_pgm(fe_img));
  std::lock_guard lock(mutex);
  for (const auto& [name, content] : images) changed = write_if_changed(dir / name, content) || changed;
}

int cmd_extract(const Common& common, const std::string& manifest, const std::string& out_dir,
                const std::string& dump_dir, std::optional<std::size_t> slice, std::ostream& out, std::ostream& err) {
  const auto cfg = load(common, {"feature_extract"});
  Outputs o(out_dir);
  std::mutex dump_mutex;
  bool dump_changed = false;
  if (!dump_dir.empty()) fs::create_directories(dump_dir);
  const int rc = map_volumes(common, manifest, o, err, [&](const MpMriVolume& v, const ManifestEntry& e) {
    auto result = extract_features(v, cfg.feature_extract);
    if (!dump_dir.empty())
      dump_maps(v, result, cfg.feature_extract, slice, dump_dir, fs::path(e.path).stem().string(), dump_mutex,
                dump_changed);
    return result;
  });
  o.note(dump_changed);
  o.summary("extract_summary.json", {{"command", "extract"},
                                     {"phi", cfg.feature_extract.phi},
                                     {"channel_weights", cfg.feature_extract.channel_weights},
                                     {"ok", rc == 0}});
  o.report(out);
  return rc;
}

std::vector<Sample> stage_samples(const DatasetManifest& manifest, const fs::path& manifest_path, Split split,
                                  const ModelConfig& model, int stage, std::size_t jobs) {
  auto samples = load_samples(manifest, manifest_path, split, model, jobs);
  if (stage >= 1 && stage <= 3) return relabel_for_stage(samples, stage);
  return samples;
}

void check_stage(int stage) {
  if (stage != 1 && stage != 2 && stage != 3 && stage != 6)
    throw ConfigError("--stage must be 1, 2, 3 or 6, got " + std::to_string(stage));
}

json checkpoint_json(const ClassifierCheckpoint& c) {
  return {{"epoch", c.epoch}, {"val_acc", c.val_acc}, {"val_recall", c.val_recall}, {"val_ars", c.val_ars()}};
}

int cmd_train(const Common& common, const std::string& manifest_path, int stage, const std::string& loss,
              const std::string& out_dir, std::ostream& out, std::ostream& err) {
  auto cfg = load(common, {"model", "train", "loss", "feedback"});
  check_stage(stage);
  if (!loss.empty()) {
    try {
      cfg.loss.kind = parse_loss_kind(loss);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  cfg.model.num_classes = stage == 6 ? 6 : 2;
  if (stage == 6 && (cfg.loss.kind == LossKind::Rfa || cfg.loss.kind == LossKind::Focal))
    throw ConfigError("loss '" + std::string(loss_kind_name(cfg.loss.kind)) + "' needs a binary stage (1, 2 or 3)");

  const auto manifest = load_manifest(manifest_path);
  const auto train_set = stage_samples(manifest, manifest_path, Split::Train, cfg.model, stage, common.jobs);
  const auto val_set = stage_samples(manifest, manifest_path, Split::Val, cfg.model, stage, common.jobs);
  auto result = train(train_set, val_set, cfg.model, cfg.train, cfg.loss, cfg.feedback);
  for (auto& c : result.checkpoints) c.stage = stage;
  result.final_state.stage = stage;
  result.best_state.stage = stage;

  Outputs o(out_dir);
  o.text("train_log.csv", format_training_log(result.log));
  fs::create_directories(o.dir() / "checkpoints");
  std::set<std::string> keep;
  json kept = json::array();
  for (const auto& c : result.checkpoints) {
    char name[32];
    std::snprintf(name, sizeof name, "epoch_%04zu", c.epoch);
    o.note(write_checkpoint(c, o.dir() / "checkpoints" / name));
    keep.insert(std::string(name) + ".json");
    keep.insert(std::string(name) + ".raw");
    kept.push_back(checkpoint_json(c));
  }
  for (const auto& entry : fs::directory_iterator(o.dir() / "checkpoints")) {
    const auto name = entry.path().filename().string();
    if (name.starts_with("epoch_") && !keep.contains(name)) {
      fs::remove(entry.path());
      o.note(true);
    }
  }
  const auto& selected = select_for_test(result);
  o.note(write_checkpoint(selected, o.dir() / "selected"));
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";
  o.summary("train_summary.json", {{"command", "train"},
                                   {"stage", stage},
                                   {"loss", loss_kind_name(cfg.loss.kind)},
                                   {"feedback_masked", cfg.feedback.masked},
                                   {"seed", cfg.seed},
                                   {"train_samples", train_set.size()},
                                   {"val_samples", val_set.size()},
                                   {"epochs_run", result.log.size()},
                                   {"checkpoints", kept},
                                   {"selected", checkpoint_json(selected)},
                                   {"selected_is_excellent", !result.checkpoints.empty()},
                                   {"warnings", result.warnings}});
  o.report(out);
  return 0;
}

json metrics_json(const MetricBundle& m) {
  json j{{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
         {"ars", m.ars},           {"f2", m.f2},               {"auc", m.auc ? json(*m.auc) : json(nullptr)}};
  if (!m.multiclass) j["confusion"] = {{"tp", m.binary.tp}, {"fp", m.binary.fp}, {"fn", m.binary.fn}, {"tn", m.binary.tn}};
  return j;
}

int cmd_eval(const Common& common, const std::string& checkpoint, const std::string& manifest_path,
             const std::string& split_tag, const std::string& out_dir, std::ostream& out) {
  (void)common;
  Split split;
  try {
    split = parse_split(split_tag);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto ckpt = read_checkpoint(checkpoint);
  const auto manifest = load_manifest(manifest_path);
  const auto samples = stage_samples(manifest, manifest_path, split, ckpt.model, ckpt.stage, common.jobs);
  const auto m = evaluate(ckpt, samples);
  out << format_metric_table(m);
  Outputs o(out_dir);
  const std::string tag(split_name(split));
  o.text("eval_" + tag + ".csv", format_metric_csv(m));
  if (m.multiclass) {
    std::vector<std::string> labels{"0", "1", "2", "3", "4", "5"};
    o.text("eval_" + tag + "_confusion.csv", format_count_matrix_csv(labels, *m.multiclass));
  }
  o.summary("eval_" + tag + "_summary.json", {{"command", "eval"},
                                              {"split", tag},
                                              {"stage", ckpt.stage},
                                              {"samples", samples.size()},
                                              {"metrics", metrics_json(m)}});
  o.report(out);
  return 0;
}

int cmd_cascade(const Common& common, const std::string& manifest_path, const std::array<std::string, 3>& paths,
                const std::string& baseline_path, const std::string& out_dir, std::ostream& out) {
  const auto cfg = load(common, {"cascade"});
  std::vector<ClassifierCheckpoint> ckpts;
  for (int s = 0; s < kStageCount; ++s) {
    auto c = read_checkpoint(paths[static_cast<std::size_t>(s)]);
    if (c.stage != 0 && c.stage != s + 1)
      throw ConfigError("--c" + std::to_string(s + 1) + " holds a stage " + std::to_string(c.stage) + " checkpoint");
    if (c.model.num_classes != 2) throw ConfigError("--c" + std::to_string(s + 1) + " is not a binary classifier");
    ckpts.push_back(std::move(c));
  }
  for (const auto& c : ckpts)
    if (c.model.grid != ckpts[0].model.grid || c.model.channels != ckpts[0].model.channels)
      throw ConfigError("cascade checkpoints disagree on the model input");
  const auto manifest = load_manifest(manifest_path);
  const auto samples = load_samples(manifest, manifest_path, cfg.cascade.split, ckpts[0].model, common.jobs);
  const CascadeModels models{{ckpts[0].classifier(), ckpts[1].classifier(), ckpts[2].classifier()}};
  const auto result = cascade_evaluate(models, samples);

  Outputs o(out_dir);
  const std::vector<std::string> binary_labels{"0", "1"};
  const auto leaves = leaf_labels();
  json stages = json::array();
  for (int s = 0; s < kStageCount; ++s) {
    const auto& c = result.stages[static_cast<std::size_t>(s)];
    o.text("stage" + std::to_string(s + 1) + "_confusion.csv",
           format_matrix_csv(binary_labels, {{double(c.tn), double(c.fp)}, {double(c.fn), double(c.tp)}}));
    stages.push_back({{"stage", s + 1}, {"tn", c.tn}, {"fp", c.fp}, {"fn", c.fn}, {"tp", c.tp},
                      {"negative_recall", c.specificity()}, {"positive_recall", c.recall()}});
  }
  o.text("composed_recall.csv", format_matrix_csv(leaves, to_rows(result.composed)));
  o.text("empirical_confusion.csv", format_count_matrix_csv(leaves, result.empirical));
  const auto empirical_recall = recall_matrix(result.empirical);
  o.text("empirical_recall.csv", format_matrix_csv(leaves, to_rows(empirical_recall)));
  std::string routes = "id,grade,leaf,confidence,stage1_p1,stage2_p1,stage3_p1\n";
  for (const auto& r : result.routes) {
    routes += r.id + ',' + std::to_string(r.grade) + ',' + std::string(leaf_name(r.route.leaf)) + ',' +
              format_number(r.route.confidence);
    for (std::size_t s = 0; s < 3; ++s)
      routes += ',' + (s < r.route.stages.size() ? format_number(r.route.stages[s].p1) : std::string());
    routes += '\n';
  }
  o.text("routes.csv", routes);
  json summary{{"command", "cascade"},
               {"split", split_name(cfg.cascade.split)},
               {"samples", samples.size()},
               {"stages", stages},
               {"composed_diagonal_mean", diagonal_mean(result.composed)},
               {"empirical_diagonal_mean", diagonal_mean(empirical_recall)}};
  if (!baseline_path.empty()) {
    const auto base = read_checkpoint(baseline_path);
    if (base.model.num_classes != 6) throw ConfigError("--baseline must be a six-class checkpoint");
    const auto base_samples = load_samples(manifest, manifest_path, cfg.cascade.split, base.model, common.jobs);
    const auto m = evaluate(base, base_samples);
    const auto grouped = recall_matrix(group_to_leaves(*m.multiclass));
    const std::vector<std::string> grades{"0", "1", "2", "3", "4", "5"};
    o.text("baseline_confusion.csv", format_count_matrix_csv(grades, *m.multiclass));
    o.text("baseline_grouped_recall.csv", format_matrix_csv(leaves, to_rows(grouped)));
    summary["baseline_grouped_diagonal_mean"] = diagonal_mean(grouped);
  }
  o.summary("cascade_summary.json", summary);
  out << format_matrix_csv(leaves, to_rows(result.composed));
  o.report(out);
  return 0;
}

int cmd_report(const Common& common, const std::string& log_path, std::optional<double> sigma_override,
               const std::string& cascade_dir, const std::string& out_dir, std::ostream& out) {
  const auto cfg = load(common, {"report"});
  const double sigma = sigma_override.value_or(cfg.report.smooth_sigma);
  if (!(sigma >= 0)) throw ConfigError("--smooth-sigma must be >= 0");
  const auto log = parse_training_log(read_text(log_path));
  Outputs o(out_dir);
  o.text("loss_curve.csv", format_curve_csv(log, sigma));
  std::vector<double> loss, acc, recall;
  for (const auto& r : log) {
    loss.push_back(r.train_loss);
    acc.push_back(r.val_acc);
    recall.push_back(r.val_recall);
  }
  const std::vector<std::vector<double>> loss_series{loss, gaussian_smooth(loss, sigma)};
  o.text("loss_curve.pgm", encode_pgm(plot_series(loss_series)));
  const std::vector<std::vector<double>> val_series{acc, recall};
  o.text("val_curve.pgm", encode_pgm(plot_series(val_series)));
  json plots = json::array({"loss_curve.pgm", "val_curve.pgm"});
  if (!cascade_dir.empty()) {
    for (const char* name : {"composed_recall", "empirical_recall", "baseline_grouped_recall"}) {
      const fs::path src = fs::path(cascade_dir) / (std::string(name) + ".csv");
      if (!fs::exists(src)) continue;
      o.text(std::string(name) + ".pgm", encode_pgm(plot_matrix(parse_matrix_csv(read_text(src)))));
      plots.push_back(std::string(name) + ".pgm");
    }
  }
  o.summary("report_summary.json",
            {{"command", "report"}, {"smooth_sigma", sigma}, {"epochs", log.size()}, {"plots", plots}});
  o.report(out);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prostate mpMRI grading toolkit: phantom data, preprocessing, feature maps, training, cascade"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config, std::string("TOML config (default: $") + kConfigEnv + ")");
  app.add_option("--seed", common.seed, "Override the global seed");
  app.add_option("--jobs", common.jobs, "Worker threads for per-volume work")->check(CLI::PositiveNumber);

  std::string out_dir, manifest, loss, dump_dir, checkpoint, split = "test", baseline, log_path, cascade_dir;
  std::optional<std::size_t> slice;
  std::optional<double> sigma;
  int stage = 0;
  std::array<std::string, 3> stages;

  auto* phantom = app.add_subcommand("phantom", "Generate a synthetic dataset and its split manifest");
  phantom->add_option("--out", out_dir, "Output directory")->required();

  auto* preprocess = app.add_subcommand("preprocess", "Crop, resize, normalise, flip and suppress");
  preprocess->add_option("--manifest", manifest, "Input manifest")->required();
  preprocess->add_option("--out", out_dir, "Output directory")->required();

  auto* extract = app.add_subcommand("extract", "Append the fused feature channel");
  extract->add_option("--manifest", manifest, "Input manifest (preprocessed)")->required();
  extract->add_option("--out", out_dir, "Output directory")->required();
  extract->add_option("--dump-maps", dump_dir, "Write SD/SW/Mix/FE slices as PGM images here");
  extract->add_option("--slice", slice, "Slice to dump (default: middle)");

  auto* train_cmd = app.add_subcommand("train", "Train one classifier");
  train_cmd->add_option("--manifest", manifest, "Split manifest")->required();
  train_cmd->add_option("--stage", stage, "1, 2, 3 (cascade stages) or 6 (grade classifier)")->required();
  train_cmd->add_option("--loss", loss, "Override [loss] kind: rfa, ce, focal, recall");
  train_cmd->add_option("--out", out_dir, "Run directory")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint sidecar")->required();
  eval->add_option("--manifest", manifest, "Split manifest")->required();
  eval->add_option("--split", split, "train, val or test");
  eval->add_option("--out", out_dir, "Output directory")->required();

  auto* cascade = app.add_subcommand("cascade", "Route through three stage classifiers");
  cascade->add_option("--manifest", manifest, "Split manifest")->required();
  cascade->add_option("--c1", stages[0], "Stage 1 checkpoint")->required();
  cascade->add_option("--c2", stages[1], "Stage 2 checkpoint")->required();
  cascade->add_option("--c3", stages[2], "Stage 3 checkpoint")->required();
  cascade->add_option("--baseline", baseline, "Six-class checkpoint for comparison");
  cascade->add_option("--out", out_dir, "Output directory")->required();

  auto* report = app.add_subcommand("report", "Curves and matrices as CSV and PGM");
  report->add_option("--log", log_path, "Training log CSV")->required();
  report->add_option("--smooth-sigma", sigma, "Gaussian smoothing sigma in epochs");
  report->add_option("--cascade", cascade_dir, "Cascade output directory to render");
  report->add_option("--out", out_dir, "Output directory")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (phantom->parsed()) return cmd_phantom(common, out_dir, out, err);
    if (preprocess->parsed()) return cmd_preprocess(common, manifest, out_dir, out, err);
    if (extract->parsed()) return cmd_extract(common, manifest, out_dir, dump_dir, slice, out, err);
    if (train_cmd->parsed()) return cmd_train(common, manifest, stage, loss, out_dir, out, err);
    if (eval->parsed()) return cmd_eval(common, checkpoint, manifest, split, out_dir, out);
    if (cascade->parsed()) return cmd_cascade(common, manifest, stages, baseline, out_dir, out);
    if (report->parsed()) return cmd_report(common, log_path, sigma, cascade_dir, out_dir, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace mpgrade
