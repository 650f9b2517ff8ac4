#include "mpgrade/config.hpp"

#include <set>
#include <sstream>
#include <toml.hpp>

#include "mpgrade/io_util.hpp"
#include "mpgrade/rng.hpp"

namespace mpgrade {

namespace {

const std::set<std::string, std::less<>> kSections{"phantom",  "preprocess", "feature_extract", "loss",  "feedback",
                                                   "model",    "train",      "cascade",         "report"};

class Section {
 public:
  Section(const toml::table* table, std::string name) : table_(table), name_(std::move(name)) {}

  bool present() const { return table_ != nullptr; }

  void allow(std::initializer_list<std::string_view> keys) const {
    if (!table_) return;
    for (const auto& [key, _] : *table_) {
      bool known = false;
      for (const auto k : keys) known = known || key.str() == k;
      if (!known) throw ConfigError("unknown key '" + std::string(key.str()) + "' in [" + name_ + "]");
    }
  }

  const toml::node* node(std::string_view key) const { return table_ ? table_->get(key) : nullptr; }

  void get(std::string_view key, double& out) const {
    if (const auto* n = node(key)) {
      if (const auto v = n->value<double>()) {
        out = *v;
        return;
      }
      fail(key, "a number");
    }
  }

  void get(std::string_view key, std::size_t& out) const {
    if (const auto* n = node(key)) {
      const auto v = n->value_exact<std::int64_t>();
      if (!v || *v < 0) fail(key, "a non-negative integer");
      out = static_cast<std::size_t>(*v);
    }
  }

  void get(std::string_view key, bool& out) const {
    if (const auto* n = node(key)) {
      const auto v = n->value_exact<bool>();
      if (!v) fail(key, "a boolean");
      out = *v;
    }
  }

  void get(std::string_view key, std::string& out) const {
    if (const auto* n = node(key)) {
      const auto v = n->value_exact<std::string>();
      if (!v) fail(key, "a string");
      out = *v;
    }
  }

  template <typename T>
  void get_list(std::string_view key, std::vector<T>& out, std::size_t expected = 0) const {
    const auto* n = node(key);
    if (!n) return;
    const auto* arr = n->as_array();
    if (!arr) fail(key, "an array");
    if (expected && arr->size() != expected) fail(key, "an array of " + std::to_string(expected) + " elements");
    std::vector<T> values;
    for (const auto& item : *arr) {
      if constexpr (std::is_same_v<T, std::string>) {
        const auto v = item.value_exact<std::string>();
        if (!v) fail(key, "an array of strings");
        values.push_back(*v);
      } else if constexpr (std::is_same_v<T, double>) {
        const auto v = item.value<double>();
        if (!v) fail(key, "an array of numbers");
        values.push_back(*v);
      } else {
        const auto v = item.value_exact<std::int64_t>();
        if (!v || *v < 0) fail(key, "an array of non-negative integers");
        values.push_back(static_cast<T>(*v));
      }
    }
    out = std::move(values);
  }

  void get_ranges(std::string_view key, std::array<GradeRange, 6>& out) const {
    const auto* n = node(key);
    if (!n) return;
    const auto* arr = n->as_array();
    if (!arr || arr->size() != 6) fail(key, "an array of 6 [lo, hi] pairs");
    for (std::size_t g = 0; g < 6; ++g) {
      const auto* pair = (*arr)[g].as_array();
      if (!pair || pair->size() != 2) fail(key, "an array of 6 [lo, hi] pairs");
      const auto lo = (*pair)[0].value<double>(), hi = (*pair)[1].value<double>();
      if (!lo || !hi) fail(key, "an array of 6 [lo, hi] pairs");
      out[g] = {*lo, *hi};
    }
  }

  [[noreturn]] void fail(std::string_view key, const std::string& what) const {
    throw ConfigError("[" + name_ + "] " + std::string(key) + " must be " + what);
  }

 private:
  const toml::table* table_;
  std::string name_;
};

template <typename F>
void check(const std::string& section, F&& validate) {
  try {
    validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("[" + section + "] " + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, std::initializer_list<std::string_view> required) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config parse error: " << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError(msg.str());
  }
  ExperimentConfig cfg;
  for (const auto& [key, node] : root) {
    if (key.str() == "seed") {
      const auto v = node.value_exact<std::int64_t>();
      if (!v || *v < 0) throw ConfigError("seed must be a non-negative integer");
      cfg.seed = static_cast<std::uint64_t>(*v);
    } else if (!kSections.contains(key.str()) || !node.is_table()) {
      throw ConfigError("unknown config entry '" + std::string(key.str()) + "'");
    }
  }
  for (const auto name : required)
    if (!root.get_as<toml::table>(name)) throw ConfigError("missing config section [" + std::string(name) + "]");

  auto section = [&](const char* name) { return Section(root.get_as<toml::table>(name), name); };

  {
    const auto s = section("phantom");
    s.allow({"counts", "shape", "radius", "contrast", "lesion_z_ratio", "asymmetric", "noise_sigma",
             "texture_amplitude"});
    std::vector<std::size_t> counts;
    s.get_list(std::string_view("counts"), counts, 6);
    if (!counts.empty()) std::copy(counts.begin(), counts.end(), cfg.phantom.counts.begin());
    std::vector<std::size_t> shape;
    s.get_list(std::string_view("shape"), shape, 3);
    if (!shape.empty()) cfg.phantom.shape = {shape[0], shape[1], shape[2]};
    s.get_ranges("radius", cfg.phantom.radius);
    s.get_ranges("contrast", cfg.phantom.contrast);
    s.get("lesion_z_ratio", cfg.phantom.lesion_z_ratio);
    s.get("asymmetric", cfg.phantom.asymmetric);
    s.get("noise_sigma", cfg.phantom.noise_sigma);
    s.get("texture_amplitude", cfg.phantom.texture_amplitude);
    check("phantom", [&] { cfg.phantom.validate(); });
  }
  {
    const auto s = section("preprocess");
    s.allow({"target_width", "target_height", "k_max", "k_min", "block"});
    s.get("target_width", cfg.preprocess.target_width);
    s.get("target_height", cfg.preprocess.target_height);
    s.get("k_max", cfg.preprocess.k_max);
    s.get("k_min", cfg.preprocess.k_min);
    s.get("block", cfg.preprocess.block);
    check("preprocess", [&] { cfg.preprocess.validate(); });
  }
  {
    const auto s = section("feature_extract");
    s.allow({"phi", "sd_floor", "mu", "sigma", "sine_coeff", "channel_weights"});
    auto& fe = cfg.feature_extract;
    s.get("phi", fe.phi);
    s.get("sd_floor", fe.sd_floor);
    if (s.node("mu")) {
      double mu = 0;
      s.get("mu", mu);
      fe.mu = mu;
    }
    if (s.node("sigma")) {
      double sigma = 0;
      s.get("sigma", sigma);
      fe.sigma = sigma;
    }
    s.get("sine_coeff", fe.sine_coeff);
    std::vector<double> weights;
    s.get_list(std::string_view("channel_weights"), weights, 3);
    if (!weights.empty()) fe.channel_weights = {weights[0], weights[1], weights[2]};
    check("feature_extract", [&] { fe.validate(); });
  }
  {
    const auto s = section("loss");
    s.allow({"kind", "m", "n1", "n2", "gamma", "alpha"});
    std::string kind(loss_kind_name(cfg.loss.kind));
    s.get("kind", kind);
    check("loss", [&] { cfg.loss.kind = parse_loss_kind(kind); });
    s.get("m", cfg.loss.rfa.m);
    s.get("n1", cfg.loss.rfa.n1);
    s.get("n2", cfg.loss.rfa.n2);
    s.get("gamma", cfg.loss.gamma);
    s.get("alpha", cfg.loss.alpha);
    check("loss", [&] { cfg.loss.validate(); });
  }
  {
    const auto s = section("feedback");
    s.allow({"period", "r_floor", "a_ceiling", "mask"});
    s.get("period", cfg.feedback.period);
    s.get("r_floor", cfg.feedback.r_floor);
    s.get("a_ceiling", cfg.feedback.a_ceiling);
    s.get("mask", cfg.feedback.masked);
    check("feedback", [&] { cfg.feedback.validate(); });
  }
  {
    const auto s = section("model");
    s.allow({"grid", "hidden_width", "channels"});
    std::vector<std::size_t> grid;
    s.get_list(std::string_view("grid"), grid, 3);
    if (!grid.empty()) cfg.model.grid = {grid[0], grid[1], grid[2]};
    s.get("hidden_width", cfg.model.hidden_width);
    s.get_list(std::string_view("channels"), cfg.model.channels);
    check("model", [&] { cfg.model.validate(); });
  }
  {
    const auto s = section("train");
    s.allow({"lr0", "decay_epochs", "decay_factor", "batch", "max_epochs", "early_stop_patience", "acc_min",
             "recall_min", "folds", "keep_checkpoints"});
    auto& t = cfg.train;
    s.get("lr0", t.lr0);
    s.get_list(std::string_view("decay_epochs"), t.decay_epochs);
    s.get("decay_factor", t.decay_factor);
    s.get("batch", t.batch);
    s.get("max_epochs", t.max_epochs);
    s.get("early_stop_patience", t.early_stop_patience);
    s.get("acc_min", t.acc_min);
    s.get("recall_min", t.recall_min);
    s.get("folds", t.folds);
    s.get("keep_checkpoints", t.keep_checkpoints);
    check("train", [&] { t.validate(); });
  }
  {
    const auto s = section("cascade");
    s.allow({"split"});
    std::string split(split_name(cfg.cascade.split));
    s.get("split", split);
    check("cascade", [&] { cfg.cascade.split = parse_split(split); });
  }
  {
    const auto s = section("report");
    s.allow({"smooth_sigma"});
    s.get("smooth_sigma", cfg.report.smooth_sigma);
    if (!(cfg.report.smooth_sigma >= 0)) throw ConfigError("[report] smooth_sigma must be >= 0");
  }
  apply_seed(cfg, cfg.seed);
  return cfg;
}

void apply_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.phantom.seed = derive_seed(seed, "phantom");
  cfg.model.init_seed = derive_seed(seed, "init");
  cfg.train.split_seed = derive_seed(seed, "split");
  cfg.train.shuffle_seed = derive_seed(seed, "shuffle");
}

ExperimentConfig load_config(const std::filesystem::path& path, std::initializer_list<std::string_view> required) {
  if (!std::filesystem::is_regular_file(path)) throw ConfigError("config file not found: " + path.string());
  return parse_config(read_text(path), required);
}

std::string default_config_text() {
  return R"(seed = 0

[phantom]
counts = [24, 24, 85, 56, 33, 22]
shape = [16, 64, 64]
radius = [[0, 0], [2.5, 5.5], [2.7, 5.7], [2.9, 5.9], [3.1, 6.1], [3.3, 6.3]]
contrast = [[0, 0], [0, 45], [20, 70], [45, 95], [70, 120], [95, 145]]
lesion_z_ratio = 0.5
asymmetric = true
noise_sigma = 56.0
texture_amplitude = 6.0

[preprocess]
target_width = 224
target_height = 224
k_max = 200.0
k_min = 50.0
block = 2

[feature_extract]
phi = 30.0
sd_floor = 0.1
sine_coeff = 0.55
channel_weights = [1.0, 2.0, 2.0]

[loss]
kind = "rfa"
m = 0.3
n1 = 1.0
n2 = 3.0
gamma = 2.0
alpha = 0.25

[feedback]
period = 5
r_floor = 0.05
a_ceiling = 0.999
mask = false

[model]
grid = [4, 8, 8]
hidden_width = 64
channels = ["T2W", "ADC", "DWI", "FE"]

[train]
lr0 = 0.0005
decay_epochs = [100, 200]
decay_factor = 0.1
batch = 16
max_epochs = 500
early_stop_patience = 100
acc_min = 0.7
recall_min = 0.6
folds = 0
keep_checkpoints = 5

[cascade]
split = "test"

[report]
smooth_sigma = 3.0
)";
}

}  // namespace mpgrade
