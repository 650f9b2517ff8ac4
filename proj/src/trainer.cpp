#include "mpgrade/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "mpgrade/io_util.hpp"
#include "mpgrade/parallel.hpp"
#include "mpgrade/rng.hpp"
#include "mpgrade/volume.hpp"

namespace mpgrade {

void TrainConfig::validate() const {
  if (!(lr0 > 0) || !std::isfinite(lr0)) throw std::invalid_argument("train.lr0 must be positive");
  if (!(decay_factor > 0) || !std::isfinite(decay_factor))
    throw std::invalid_argument("train.decay_factor must be positive");
  if (batch < 1) throw std::invalid_argument("train.batch must be >= 1");
  if (max_epochs < 1) throw std::invalid_argument("train.max_epochs must be >= 1");
  for (const double t : {acc_min, recall_min})
    if (!(t >= 0 && t <= 1)) throw std::invalid_argument("checkpoint thresholds must lie in [0, 1]");
  if (folds == 1) throw std::invalid_argument("train.folds must be 0 (off) or >= 2");
  if (keep_checkpoints < 1) throw std::invalid_argument("train.keep_checkpoints must be >= 1");
}

double scheduled_lr(const TrainConfig& cfg, std::size_t epoch) {
  double lr = cfg.lr0;
  for (const std::size_t milestone : cfg.decay_epochs)
    if (milestone <= epoch) lr *= cfg.decay_factor;
  return lr;
}

namespace {

constexpr int kMaxLabel = 5;

// Largest-remainder allocation of `target` items across classes in proportion
// to their sizes. Ties go to the smaller label.
std::vector<std::size_t> allocate(const std::vector<std::size_t>& sizes, std::size_t target) {
  std::size_t total = 0;
  for (const auto s : sizes) total += s;
  std::vector<std::size_t> out(sizes.size(), 0);
  if (total == 0) return out;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    const double exact = static_cast<double>(sizes[c]) * static_cast<double>(target) / static_cast<double>(total);
    out[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += out[c];
    remainders.emplace_back(exact - static_cast<double>(out[c]), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t i = 0; assigned < target && i < remainders.size(); ++i) {
    const std::size_t c = remainders[i].second;
    if (out[c] < sizes[c]) {
      ++out[c];
      ++assigned;
    }
  }
  return out;
}

using ClassMembers = std::vector<std::vector<std::size_t>>;

ClassMembers members_by_class(const DatasetManifest& manifest, const std::vector<std::size_t>& indices, Rng& rng) {
  ClassMembers members(kMaxLabel + 1);
  for (const auto i : indices) members[static_cast<std::size_t>(manifest.entries[i].label)].push_back(i);
  for (auto& m : members) shuffle(m, rng);
  return members;
}

std::vector<std::size_t> sizes_of(const ClassMembers& members) {
  std::vector<std::size_t> sizes;
  for (const auto& m : members) sizes.push_back(m.size());
  return sizes;
}

struct TestSplit {
  std::vector<Split> tags;
  std::vector<std::size_t> pool;
};

TestSplit split_test(const DatasetManifest& manifest, Rng& rng) {
  manifest.validate();
  const std::size_t n = manifest.entries.size();
  if (n < 10) throw std::invalid_argument("split_dataset needs at least 10 samples, got " + std::to_string(n));
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  const auto members = members_by_class(manifest, all, rng);
  const auto quota = allocate(sizes_of(members), static_cast<std::size_t>(std::llround(static_cast<double>(n) / 10.0)));
  TestSplit out{std::vector<Split>(n, Split::Train), {}};
  for (std::size_t c = 0; c < members.size(); ++c)
    for (std::size_t t = 0; t < quota[c]; ++t) out.tags[members[c][t]] = Split::Test;
  for (std::size_t i = 0; i < n; ++i)
    if (out.tags[i] != Split::Test) out.pool.push_back(i);
  return out;
}

std::vector<std::string> empty_class_warnings(const DatasetManifest& manifest) {
  std::vector<std::string> warnings;
  std::map<int, std::map<Split, std::size_t>> counts;
  for (const auto& e : manifest.entries) ++counts[e.label][e.split];
  for (const auto& [label, per_split] : counts)
    for (const Split s : {Split::Train, Split::Val, Split::Test})
      if (!per_split.contains(s))
        warnings.push_back("class " + std::to_string(label) + " has no samples in split " +
                           std::string(split_name(s)));
  return warnings;
}

}  // namespace

SplitOutcome split_dataset(const DatasetManifest& manifest, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "split"));
  const auto test = split_test(manifest, rng);
  const auto members = members_by_class(manifest, test.pool, rng);
  const auto quota =
      allocate(sizes_of(members), static_cast<std::size_t>(std::llround(static_cast<double>(test.pool.size()) * 0.2)));
  SplitOutcome out;
  out.manifest = manifest;
  out.manifest.seed = seed;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) out.manifest.entries[i].split = test.tags[i];
  for (std::size_t c = 0; c < members.size(); ++c)
    for (std::size_t t = 0; t < quota[c]; ++t) out.manifest.entries[members[c][t]].split = Split::Val;
  out.warnings = empty_class_warnings(out.manifest);
  return out;
}

std::vector<SplitOutcome> split_folds(const DatasetManifest& manifest, std::uint64_t seed, std::size_t folds) {
  if (folds < 2) throw std::invalid_argument("split_folds needs at least 2 folds");
  Rng rng(derive_seed(seed, "split"));
  const auto test = split_test(manifest, rng);
  const auto members = members_by_class(manifest, test.pool, rng);
  std::vector<std::size_t> fold_of(manifest.entries.size(), 0);
  std::size_t deal = 0;
  for (const auto& m : members)
    for (const auto i : m) fold_of[i] = deal++ % folds;
  std::vector<SplitOutcome> out;
  for (std::size_t f = 0; f < folds; ++f) {
    SplitOutcome o;
    o.manifest = manifest;
    o.manifest.seed = seed;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
      auto& e = o.manifest.entries[i];
      e.split = test.tags[i];
      if (e.split != Split::Test && fold_of[i] == f) e.split = Split::Val;
    }
    o.warnings = empty_class_warnings(o.manifest);
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<Sample> load_samples(const DatasetManifest& manifest, const std::filesystem::path& manifest_path,
                                 Split split, const ModelConfig& model, std::size_t jobs) {
  std::vector<const ManifestEntry*> entries;
  for (const auto& e : manifest.entries)
    if (e.split == split) entries.push_back(&e);
  std::vector<Sample> out(entries.size());
  parallel_for(entries.size(), jobs, [&](std::size_t i) {
    const auto vol = read_volume(resolve_entry(manifest_path, *entries[i]));
    out[i] = {pool_volume(vol, model.grid, model.channels), entries[i]->label, entries[i]->path};
  });
  return out;
}

double ClassifierCheckpoint::val_ars() const { return ars(val_recall, val_acc); }

SurrogateClassifier ClassifierCheckpoint::classifier() const {
  auto m = SurrogateClassifier::zeroed(model);
  m.set_parameters(parameters);
  return m;
}

namespace {

struct ValMetrics {
  double acc = 0;
  double recall = 0;
};

ValMetrics validate_model(const SurrogateClassifier& model, std::span<const Sample> val) {
  if (model.num_classes() == 2) {
    const auto c = confusion(predict_binary(model, val));
    return {c.accuracy(), c.recall()};
  }
  ConfusionMatrix cm(model.num_classes());
  const auto pred = predict_classes(model, val);
  for (std::size_t i = 0; i < val.size(); ++i) cm.add(static_cast<std::size_t>(val[i].label), pred[i]);
  return {cm.accuracy(), cm.macro_recall()};
}

std::size_t argmax(std::span<const double> p) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.size(); ++c)
    if (p[c] > p[best]) best = c;
  return best;
}

void check_samples(std::span<const Sample> samples, const ModelConfig& cfg, const char* what) {
  if (samples.empty()) throw std::invalid_argument(std::string("empty ") + what + " split");
  for (const auto& s : samples) {
    if (s.features.size() != cfg.input_dim())
      throw std::invalid_argument("sample " + s.id + " has " + std::to_string(s.features.size()) +
                                  " features, model expects " + std::to_string(cfg.input_dim()));
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= cfg.num_classes)
      throw std::invalid_argument("sample " + s.id + " label " + std::to_string(s.label) +
                                  " outside the model's classes");
  }
}

// Returns true when the new checkpoint is retained.
bool keep_best(std::vector<ClassifierCheckpoint>& set, ClassifierCheckpoint ckpt, std::size_t keep) {
  const std::size_t epoch = ckpt.epoch;
  set.push_back(std::move(ckpt));
  std::stable_sort(set.begin(), set.end(), [](const auto& x, const auto& y) {
    if (x.val_ars() != y.val_ars()) return x.val_ars() > y.val_ars();
    return x.epoch < y.epoch;
  });
  if (set.size() > keep) set.resize(keep);
  return std::any_of(set.begin(), set.end(), [&](const auto& c) { return c.epoch == epoch; });
}

std::string describe_threshold(const TrainConfig& cfg) {
  return "no checkpoint met the thresholds (val acc > " + format_number(cfg.acc_min) + ", val recall > " +
         format_number(cfg.recall_min) + "); using the best validation ARS epoch";
}

}  // namespace

TrainResult train(std::span<const Sample> train_set, std::span<const Sample> val_set, const ModelConfig& model_cfg,
                  const TrainConfig& train_cfg, const LossConfig& loss_cfg, const FeedbackConfig& feedback_cfg) {
  model_cfg.validate();
  train_cfg.validate();
  loss_cfg.validate();
  feedback_cfg.validate();
  check_samples(train_set, model_cfg, "train");
  check_samples(val_set, model_cfg, "val");
  const std::size_t k = model_cfg.num_classes;
  if (k != 2 && (loss_cfg.kind == LossKind::Rfa || loss_cfg.kind == LossKind::Focal))
    throw std::invalid_argument(std::string(loss_kind_name(loss_cfg.kind)) + " loss requires a binary model");

  SurrogateClassifier model(model_cfg);
  AdamState adam;
  FeedbackState feedback = FeedbackState::initial(feedback_cfg);
  RecallLossState recall_state{std::vector<double>(k, 0.0)};
  Rng order_rng(derive_seed(train_cfg.shuffle_seed, "shuffle"));

  TrainResult result;
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> grad(model.parameter_count());

  double best_ars = -1;
  std::size_t last_progress = 0;
  ValMetrics val;

  for (std::size_t epoch = 0; epoch < train_cfg.max_epochs; ++epoch) {
    const double lr = scheduled_lr(train_cfg, epoch);
    const double adjustment = adjustment_factor(feedback, loss_cfg.rfa);
    const double accuracy = clamped_accuracy(feedback);
    shuffle(order, order_rng);

    double loss_sum = 0;
    ConfusionMatrix train_cm(k);
    for (std::size_t start = 0; start < order.size(); start += train_cfg.batch) {
      const std::size_t end = std::min(order.size(), start + train_cfg.batch);
      const double inv_b = 1.0 / static_cast<double>(end - start);
      std::vector<ForwardCache> caches;
      std::vector<std::vector<double>> d_probs;
      std::vector<std::vector<double>> probs;
      std::vector<int> labels;
      for (std::size_t b = start; b < end; ++b) {
        const Sample& s = train_set[order[b]];
        caches.push_back(forward_features(model, s.features));
        probs.push_back(caches.back().probs);
        labels.push_back(s.label);
        train_cm.add(static_cast<std::size_t>(s.label), argmax(caches.back().probs));
      }
      if (loss_cfg.kind == LossKind::Recall) {
        auto bl = recall_ce(probs, labels, recall_state);
        loss_sum += bl.value * static_cast<double>(end - start);
        d_probs = std::move(bl.d_probs);
      } else {
        for (std::size_t b = 0; b < caches.size(); ++b) {
          const auto& p = caches[b].probs;
          std::vector<double> d(k, 0.0);
          double value = 0;
          if (loss_cfg.kind == LossKind::CrossEntropy) {
            value = cross_entropy(p, labels[b], d);
          } else {
            const ProbPair pp{p[0], p[1]};
            const LossGrad g = loss_cfg.kind == LossKind::Rfa
                                   ? rfa_loss(pp, labels[b], adjustment, accuracy)
                                   : focal_loss(pp, labels[b], loss_cfg.gamma, loss_cfg.alpha);
            value = g.value;
            d = {g.d_p0, g.d_p1};
          }
          loss_sum += value;
          for (auto& x : d) x *= inv_b;
          d_probs.push_back(std::move(d));
        }
      }
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = 0; b < caches.size(); ++b) backward(model, caches[b], d_probs[b], grad);
      adam_step(model.mutable_parameters(), grad, adam, lr);
    }
    const double train_loss = loss_sum / static_cast<double>(train_set.size());
    if (!std::isfinite(train_loss))
      throw std::runtime_error("non-finite training loss at epoch " + std::to_string(epoch) + " (loss " +
                               std::string(loss_kind_name(loss_cfg.kind)) + ", lr " + format_number(lr) + ")");
    for (const auto& p : model.parameters())
      if (!std::isfinite(p)) throw std::runtime_error("non-finite parameter at epoch " + std::to_string(epoch));

    const auto rm = train_cm.recall_matrix();
    for (std::size_t c = 0; c < k; ++c) recall_state.recalls[c] = rm[c][c];

    val = validate_model(model, val_set);
    if (!feedback_cfg.masked) feedback = record_epoch(std::move(feedback), val.acc, val.recall);

    result.log.push_back({epoch, train_loss, val.acc, val.recall, adjustment, lr});

    bool progress = false;
    if (val.acc > train_cfg.acc_min && val.recall > train_cfg.recall_min) {
      ClassifierCheckpoint ckpt{model_cfg, {model.parameters().begin(), model.parameters().end()},
                                val.acc,   val.recall,
                                epoch,     loss_cfg};
      progress = keep_best(result.checkpoints, std::move(ckpt), train_cfg.keep_checkpoints);
    }
    const double current = ars(val.recall, val.acc);
    if (current > best_ars) {
      best_ars = current;
      progress = true;
      result.best_state = {model_cfg, {model.parameters().begin(), model.parameters().end()},
                           val.acc,   val.recall,
                           epoch,     loss_cfg};
    }
    if (progress) last_progress = epoch;
    if (train_cfg.early_stop_patience > 0 && epoch - last_progress >= train_cfg.early_stop_patience) break;
  }

  result.final_state = {model_cfg, {model.parameters().begin(), model.parameters().end()},
                        val.acc,   val.recall,
                        result.log.back().epoch, loss_cfg};
  if (result.checkpoints.empty()) result.warnings.push_back(describe_threshold(train_cfg));
  return result;
}

TrainResult train(const DatasetManifest& manifest, const std::filesystem::path& manifest_path,
                  const ModelConfig& model_cfg, const TrainConfig& train_cfg, const LossConfig& loss_cfg,
                  const FeedbackConfig& feedback_cfg) {
  const auto train_set = load_samples(manifest, manifest_path, Split::Train, model_cfg);
  const auto val_set = load_samples(manifest, manifest_path, Split::Val, model_cfg);
  return train(train_set, val_set, model_cfg, train_cfg, loss_cfg, feedback_cfg);
}

const ClassifierCheckpoint& select_for_test(const TrainResult& result) {
  return result.checkpoints.empty() ? result.best_state : result.checkpoints.front();
}

std::vector<BinaryPrediction> predict_binary(const SurrogateClassifier& model, std::span<const Sample> samples) {
  if (model.num_classes() != 2) throw std::invalid_argument("predict_binary needs a binary model");
  std::vector<BinaryPrediction> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const auto c = forward_features(model, s.features);
    out.push_back({c.probs[1], c.probs[1] > c.probs[0] ? 1 : 0, s.label});
  }
  return out;
}

std::vector<std::size_t> predict_classes(const SurrogateClassifier& model, std::span<const Sample> samples) {
  std::vector<std::size_t> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(argmax(forward_features(model, s.features).probs));
  return out;
}

MetricBundle evaluate(const ClassifierCheckpoint& checkpoint, std::span<const Sample> samples) {
  check_samples(samples, checkpoint.model, "evaluation");
  const auto model = checkpoint.classifier();
  MetricBundle out;
  if (model.num_classes() == 2) {
    const auto preds = predict_binary(model, samples);
    out.binary = confusion(preds);
    out.accuracy = out.binary.accuracy();
    out.precision = out.binary.precision();
    out.recall = out.binary.recall();
    const bool both = out.binary.tp + out.binary.fn > 0 && out.binary.tn + out.binary.fp > 0;
    if (both) out.auc = auc(preds);
  } else {
    ConfusionMatrix cm(model.num_classes());
    const auto pred = predict_classes(model, samples);
    for (std::size_t i = 0; i < samples.size(); ++i) cm.add(static_cast<std::size_t>(samples[i].label), pred[i]);
    out.accuracy = cm.accuracy();
    out.recall = cm.macro_recall();
    double precision_sum = 0;
    std::size_t used = 0;
    for (std::size_t c = 0; c < cm.classes(); ++c) {
      std::size_t column = 0;
      for (std::size_t t = 0; t < cm.classes(); ++t) column += cm.count(t, c);
      if (cm.row_total(c) == 0 && column == 0) continue;
      precision_sum += column == 0 ? 0.0 : static_cast<double>(cm.count(c, c)) / static_cast<double>(column);
      ++used;
    }
    out.precision = used == 0 ? 0.0 : precision_sum / static_cast<double>(used);
    out.multiclass = cm;
  }
  out.ars = ars(out.recall, out.accuracy);
  out.f2 = f_beta(out.precision, out.recall, 2.0);
  return out;
}

std::string format_training_log(std::span<const EpochLog> log) {
  std::string out = "epoch,train_loss,val_acc,val_recall,A,lr\n";
  for (const auto& row : log) {
    out += std::to_string(row.epoch) + ',' + format_number(row.train_loss) + ',' + format_number(row.val_acc) + ',' +
           format_number(row.val_recall) + ',' + format_number(row.adjustment) + ',' + format_number(row.lr) + '\n';
  }
  return out;
}

std::vector<EpochLog> parse_training_log(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line != "epoch,train_loss,val_acc,val_recall,A,lr")
    throw std::runtime_error("training log: unexpected header");
  std::vector<EpochLog> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(row, field, ',')) f.push_back(field);
    if (f.size() != 6) throw std::runtime_error("training log: malformed row '" + line + "'");
    out.push_back({std::stoul(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4]),
                   std::stod(f[5])});
  }
  return out;
}

namespace {

nlohmann::json model_to_json(const ModelConfig& m) {
  return {{"grid", {m.grid.z, m.grid.y, m.grid.x}},
          {"hidden_width", m.hidden_width},
          {"num_classes", m.num_classes},
          {"init_seed", m.init_seed},
          {"channels", m.channels}};
}

ModelConfig model_from_json(const nlohmann::json& j) {
  ModelConfig m;
  const auto grid = j.at("grid").get<std::vector<std::size_t>>();
  if (grid.size() != 3) throw std::runtime_error("checkpoint: grid must have 3 entries");
  m.grid = {grid[0], grid[1], grid[2]};
  m.hidden_width = j.at("hidden_width").get<std::size_t>();
  m.num_classes = j.at("num_classes").get<std::size_t>();
  m.init_seed = j.at("init_seed").get<std::uint64_t>();
  m.channels = j.at("channels").get<std::vector<std::string>>();
  m.validate();
  return m;
}

std::pair<std::filesystem::path, std::filesystem::path> checkpoint_paths(const std::filesystem::path& path) {
  auto stem = path;
  if (stem.extension() == ".json") stem.replace_extension();
  auto json = stem, raw = stem;
  json += ".json";
  raw += ".raw";
  return {json, raw};
}

}  // namespace

bool write_checkpoint(const ClassifierCheckpoint& ckpt, const std::filesystem::path& path) {
  const auto [json_path, raw_path] = checkpoint_paths(path);
  if (!json_path.parent_path().empty() && !std::filesystem::is_directory(json_path.parent_path()))
    throw std::runtime_error("checkpoint directory does not exist: " + json_path.parent_path().string());
  nlohmann::json j;
  j["model"] = model_to_json(ckpt.model);
  j["parameter_count"] = ckpt.parameters.size();
  j["dtype"] = "f64";
  j["data_file"] = raw_path.filename().string();
  j["val_acc"] = ckpt.val_acc;
  j["val_recall"] = ckpt.val_recall;
  j["epoch"] = ckpt.epoch;
  j["stage"] = ckpt.stage;
  j["loss"] = {{"kind", loss_kind_name(ckpt.loss.kind)},
               {"m", ckpt.loss.rfa.m},
               {"n1", ckpt.loss.rfa.n1},
               {"n2", ckpt.loss.rfa.n2},
               {"gamma", ckpt.loss.gamma},
               {"alpha", ckpt.loss.alpha}};
  std::vector<char> bytes(ckpt.parameters.size() * 8);
  for (std::size_t i = 0; i < ckpt.parameters.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &ckpt.parameters[i], 8);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  bool changed = write_if_changed(raw_path, bytes);
  changed = write_if_changed(json_path, j.dump(2) + "\n") || changed;
  return changed;
}

ClassifierCheckpoint read_checkpoint(const std::filesystem::path& path) {
  const auto [json_path, raw_path] = checkpoint_paths(path);
  const auto j = nlohmann::json::parse(read_text(json_path));
  ClassifierCheckpoint ckpt;
  ckpt.model = model_from_json(j.at("model"));
  ckpt.val_acc = j.at("val_acc").get<double>();
  ckpt.val_recall = j.at("val_recall").get<double>();
  ckpt.epoch = j.at("epoch").get<std::size_t>();
  ckpt.stage = j.value("stage", 0);
  const auto& l = j.at("loss");
  ckpt.loss.kind = parse_loss_kind(l.at("kind").get<std::string>());
  ckpt.loss.rfa = {l.at("m").get<double>(), l.at("n1").get<double>(), l.at("n2").get<double>()};
  ckpt.loss.gamma = l.at("gamma").get<double>();
  ckpt.loss.alpha = l.at("alpha").get<double>();
  const auto count = j.at("parameter_count").get<std::size_t>();
  const auto bytes = read_file(json_path.parent_path() / j.at("data_file").get<std::string>());
  if (bytes.size() != count * 8)
    throw std::runtime_error("checkpoint payload size mismatch: expected " + std::to_string(count * 8) +
                             " bytes, found " + std::to_string(bytes.size()));
  ckpt.parameters.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[i * 8 + b])) << (8 * b);
    std::memcpy(&ckpt.parameters[i], &bits, 8);
    if (!std::isfinite(ckpt.parameters[i])) throw std::runtime_error("checkpoint holds a non-finite parameter");
  }
  const auto expected = SurrogateClassifier::zeroed(ckpt.model).parameter_count();
  if (count != expected)
    throw std::runtime_error("checkpoint parameter count " + std::to_string(count) + " does not match model (" +
                             std::to_string(expected) + ")");
  return ckpt;
}

}  // namespace mpgrade
