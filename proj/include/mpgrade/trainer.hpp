#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpgrade/feedback.hpp"
#include "mpgrade/losses.hpp"
#include "mpgrade/manifest.hpp"
#include "mpgrade/metrics.hpp"
#include "mpgrade/model.hpp"

namespace mpgrade {

struct TrainConfig {
  double lr0 = 5e-4;
  std::vector<std::size_t> decay_epochs{100, 200};
  double decay_factor = 0.1;
  std::size_t batch = 16;
  std::size_t max_epochs = 500;
  std::size_t early_stop_patience = 100;  // 0 disables early stopping
  std::uint64_t split_seed = 0;
  std::uint64_t shuffle_seed = 0;
  double acc_min = 0.7;
  double recall_min = 0.6;
  std::size_t folds = 0;
  std::size_t keep_checkpoints = 5;

  void validate() const;
};

// lr0 multiplied by decay_factor once for every milestone <= epoch (0-based).
double scheduled_lr(const TrainConfig& cfg, std::size_t epoch);

struct SplitOutcome {
  DatasetManifest manifest;
  std::vector<std::string> warnings;
};

// Stratified 9:1 train-pool/test split, then 8:2 train/val inside the pool.
// Per-class quotas use largest-remainder rounding so totals match the ratios.
SplitOutcome split_dataset(const DatasetManifest& manifest, std::uint64_t seed);

// Same test split; the pool is dealt into `folds` stratified folds and fold f
// becomes the validation set of the f-th manifest.
std::vector<SplitOutcome> split_folds(const DatasetManifest& manifest, std::uint64_t seed, std::size_t folds);

struct Sample {
  std::vector<double> features;  // pooled model input
  int label = 0;
  std::string id;
};

std::vector<Sample> load_samples(const DatasetManifest& manifest, const std::filesystem::path& manifest_path,
                                 Split split, const ModelConfig& model, std::size_t jobs = 1);

struct ClassifierCheckpoint {
  ModelConfig model;
  std::vector<double> parameters;
  double val_acc = 0;
  double val_recall = 0;
  std::size_t epoch = 0;
  LossConfig loss;
  int stage = 0;  // 1..3 for cascade stages, 6 for the grade classifier, 0 if unset

  double val_ars() const;
  SurrogateClassifier classifier() const;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0;
  double val_acc = 0;
  double val_recall = 0;
  double adjustment = 0;
  double lr = 0;
};

struct TrainResult {
  // Excellent-parameter set, best validation ARS first.
  std::vector<ClassifierCheckpoint> checkpoints;
  std::vector<EpochLog> log;
  ClassifierCheckpoint final_state;
  // Parameters at the epoch with the highest validation ARS, earliest on ties.
  ClassifierCheckpoint best_state;
  std::vector<std::string> warnings;
};

TrainResult train(std::span<const Sample> train_set, std::span<const Sample> val_set, const ModelConfig& model_cfg,
                  const TrainConfig& train_cfg, const LossConfig& loss_cfg, const FeedbackConfig& feedback_cfg);

TrainResult train(const DatasetManifest& manifest, const std::filesystem::path& manifest_path,
                  const ModelConfig& model_cfg, const TrainConfig& train_cfg, const LossConfig& loss_cfg,
                  const FeedbackConfig& feedback_cfg);

// Best-ARS excellent checkpoint, or best_state when the set is empty.
const ClassifierCheckpoint& select_for_test(const TrainResult& result);

struct MetricBundle {
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double ars = 0;
  double f2 = 0;
  std::optional<double> auc;  // absent when the split holds a single class
  BinaryConfusion binary;     // binary models only
  std::optional<ConfusionMatrix> multiclass;
};

// Binary predictions use argmax (class 1 iff p1 > p0).
std::vector<BinaryPrediction> predict_binary(const SurrogateClassifier& model, std::span<const Sample> samples);
std::vector<std::size_t> predict_classes(const SurrogateClassifier& model, std::span<const Sample> samples);

MetricBundle evaluate(const ClassifierCheckpoint& checkpoint, std::span<const Sample> samples);

std::string format_training_log(std::span<const EpochLog> log);
std::vector<EpochLog> parse_training_log(std::string_view csv);

// Sidecar JSON + little-endian f64 parameter blob (<stem>.json, <stem>.raw).
bool write_checkpoint(const ClassifierCheckpoint& checkpoint, const std::filesystem::path& path);
ClassifierCheckpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace mpgrade
