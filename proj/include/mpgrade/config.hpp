#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mpgrade/features.hpp"
#include "mpgrade/feedback.hpp"
#include "mpgrade/losses.hpp"
#include "mpgrade/manifest.hpp"
#include "mpgrade/model.hpp"
#include "mpgrade/phantom.hpp"
#include "mpgrade/preprocess.hpp"
#include "mpgrade/trainer.hpp"

namespace mpgrade {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CascadeConfig {
  Split split = Split::Test;
};

struct ReportConfig {
  double smooth_sigma = 3.0;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  PhantomConfig phantom;
  PreprocessConfig preprocess;
  FeConfig feature_extract;
  LossConfig loss;
  FeedbackConfig feedback;
  ModelConfig model;
  TrainConfig train;
  CascadeConfig cascade;
  ReportConfig report;
};

// Parses TOML; every name in `required` must be present as a section.
// Unknown sections or keys and invalid values raise ConfigError.
// Sub-seeds (phantom, split, init, shuffle) are derived from the global seed.
ExperimentConfig parse_config(std::string_view text, std::initializer_list<std::string_view> required = {});
ExperimentConfig load_config(const std::filesystem::path& path, std::initializer_list<std::string_view> required = {});

// Sets the global seed and re-derives every sub-seed from it.
void apply_seed(ExperimentConfig& cfg, std::uint64_t seed);

// A complete config with every key at its default value.
std::string default_config_text();

}  // namespace mpgrade
