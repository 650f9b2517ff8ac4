#include <doctest.h>

#include <fstream>
#include <sstream>

#include "mpgrade/cli.hpp"
#include "mpgrade/config.hpp"
#include "mpgrade/io_util.hpp"
#include "mpgrade/manifest.hpp"
#include "mpgrade/volume.hpp"
#include "test_util.hpp"

using namespace mpgrade;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "mpgrade");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

void replace(std::string& text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, from.size(), to);
}

fs::path small_config(const fs::path& dir) {
  auto text = default_config_text();
  replace(text, "counts = [24, 24, 85, 56, 33, 22]", "counts = [10, 10, 10, 10, 10, 10]");
  replace(text, "shape = [16, 64, 64]", "shape = [12, 40, 40]");
  replace(text, "target_width = 224", "target_width = 24");
  replace(text, "target_height = 224", "target_height = 24");
  replace(text, "grid = [4, 8, 8]", "grid = [2, 4, 4]");
  replace(text, "hidden_width = 64", "hidden_width = 8");
  replace(text, "max_epochs = 500", "max_epochs = 12");
  const auto path = dir / "config.toml";
  write_if_changed(path, text);
  return path;
}

}  // namespace

TEST_CASE("config errors exit with code 2") {
  const auto dir = testutil::temp_dir("cli_config");
  write_if_changed(dir / "no_phantom.toml", std::string("seed = 1\n[preprocess]\nblock = 2\n"));
  auto r = run({"--config", (dir / "no_phantom.toml").string(), "phantom", "--out", (dir / "p").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("missing config section [phantom]") != std::string::npos);

  auto text = default_config_text();
  replace(text, "noise_sigma = 56.0", "noise_sigma = 56.0\nbogus = 1");
  write_if_changed(dir / "unknown.toml", text);
  r = run({"--config", (dir / "unknown.toml").string(), "phantom", "--out", (dir / "p").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("bogus") != std::string::npos);

  text = default_config_text();
  replace(text, "block = 2", "block = \"two\"");
  write_if_changed(dir / "type.toml", text);
  r = run({"--config", (dir / "type.toml").string(), "preprocess", "--manifest", "m.csv", "--out", "x"});
  CHECK(r.code == 2);

  CHECK(run({"--config", (dir / "absent.toml").string(), "phantom", "--out", "x"}).code == 2);
  CHECK(run({"phantom"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
}

TEST_CASE("phantom, preprocess and extract with idempotent reruns") {
  const auto dir = testutil::temp_dir("cli_pipeline");
  const auto cfg = small_config(dir).string();
  auto r = run({"--config", cfg, "phantom", "--out", (dir / "raw").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.starts_with("wrote "));
  r = run({"phantom", "--out", (dir / "raw").string(), "--config", cfg});
  CHECK(r.code == 0);
  CHECK(r.out.starts_with("up-to-date: "));

  const auto manifest = load_manifest(dir / "raw" / "manifest.csv");
  CHECK(manifest.entries.size() == 60);

  r = run({"--config", cfg, "--jobs", "3", "preprocess", "--manifest", (dir / "raw" / "manifest.csv").string(), "--out",
           (dir / "pre").string()});
  REQUIRE(r.code == 0);
  const auto pre = read_volume(resolve_entry(dir / "pre" / "manifest.csv", manifest.entries[0]));
  CHECK(pre.dims.rows == 24);
  CHECK(pre.dims.cols == 24);
  CHECK(pre.channels.size() == 3);

  r = run({"--config", cfg, "extract", "--manifest", (dir / "pre" / "manifest.csv").string(), "--out",
           (dir / "fe").string(), "--dump-maps", (dir / "maps").string(), "--slice", "2"});
  REQUIRE(r.code == 0);
  const auto fe = read_volume(resolve_entry(dir / "fe" / "manifest.csv", manifest.entries[0]));
  CHECK(fe.channels == std::vector<std::string>{"T2W", "ADC", "DWI", "FE"});
  const auto stem = fs::path(manifest.entries[0].path).stem().string();
  CHECK(fs::exists(dir / "maps" / (stem + "_adc_mix.pgm")));
  CHECK(fs::exists(dir / "maps" / (stem + "_fe.pgm")));
  r = run({"--config", cfg, "extract", "--manifest", (dir / "pre" / "manifest.csv").string(), "--out",
           (dir / "fe").string(), "--dump-maps", (dir / "maps").string(), "--slice", "2"});
  CHECK(r.out.starts_with("up-to-date: "));
}

TEST_CASE("extract reports volumes without DWI") {
  const auto dir = testutil::temp_dir("cli_missing_dwi");
  const auto cfg = small_config(dir).string();
  auto vol = testutil::random_volume(1, {"T2W", "ADC"}, {4, 16, 16});
  fs::create_directories(dir / "in");
  write_volume(vol, dir / "in" / "a");
  DatasetManifest m;
  m.entries.push_back({"a.json", 2, Split::Train});
  write_if_changed(dir / "in" / "manifest.csv", format_manifest(m));
  const auto r = run({"--config", cfg, "extract", "--manifest", (dir / "in" / "manifest.csv").string(), "--out",
                      (dir / "out").string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("a.json") != std::string::npos);
  CHECK(r.err.find("DWI") != std::string::npos);
}

TEST_CASE("train, eval, cascade and report") {
  const auto dir = testutil::temp_dir("cli_train");
  const auto cfg = small_config(dir).string();
  REQUIRE(run({"--config", cfg, "--seed", "4", "phantom", "--out", (dir / "raw").string()}).code == 0);
  REQUIRE(run({"--config", cfg, "preprocess", "--manifest", (dir / "raw" / "manifest.csv").string(), "--out",
               (dir / "pre").string()})
              .code == 0);
  REQUIRE(run({"--config", cfg, "extract", "--manifest", (dir / "pre" / "manifest.csv").string(), "--out",
               (dir / "fe").string()})
              .code == 0);
  const auto manifest = (dir / "fe" / "manifest.csv").string();
  for (const char* stage : {"1", "2", "3"}) {
    const auto r = run({"--config", cfg, "train", "--manifest", manifest, "--stage", stage, "--out",
                        (dir / ("c" + std::string(stage))).string()});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / ("c" + std::string(stage)) / "selected.json"));
  }
  const auto log = read_text(dir / "c1" / "train_log.csv");
  CHECK(log.starts_with("epoch,train_loss,val_acc,val_recall,A,lr\n"));

  CHECK(run({"--config", cfg, "train", "--manifest", manifest, "--stage", "6", "--out", (dir / "six").string()}).code ==
        2);
  CHECK(run({"--config", cfg, "train", "--manifest", manifest, "--stage", "6", "--loss", "ce", "--out",
             (dir / "six").string()})
            .code == 0);
  CHECK(run({"--config", cfg, "train", "--manifest", manifest, "--stage", "4", "--out", (dir / "x").string()}).code ==
        2);

  auto r = run({"--config", cfg, "eval", "--checkpoint", (dir / "c1" / "selected.json").string(), "--manifest",
                manifest, "--split", "test", "--out", (dir / "eval").string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "eval" / "eval_test.csv"));

  r = run({"--config", cfg, "cascade", "--manifest", manifest, "--c1", (dir / "c1" / "selected.json").string(), "--c2",
           (dir / "c2" / "selected.json").string(), "--c3", (dir / "c3" / "selected.json").string(), "--baseline",
           (dir / "six" / "selected.json").string(), "--out", (dir / "cascade").string()});
  REQUIRE(r.code == 0);
  for (const char* f : {"composed_recall.csv", "empirical_recall.csv", "routes.csv", "baseline_grouped_recall.csv",
                        "cascade_summary.json"})
    CHECK(fs::exists(dir / "cascade" / f));

  r = run({"--config", cfg, "report", "--log", (dir / "c1" / "train_log.csv").string(), "--cascade",
           (dir / "cascade").string(), "--out", (dir / "report").string()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "report" / "loss_curve.csv"));
  CHECK(read_text(dir / "report" / "loss_curve.pgm").starts_with("P5"));

  // Swapped stage checkpoints are rejected.
  r = run({"--config", cfg, "cascade", "--manifest", manifest, "--c1", (dir / "c2" / "selected.json").string(), "--c2",
           (dir / "c1" / "selected.json").string(), "--c3", (dir / "c3" / "selected.json").string(), "--out",
           (dir / "bad").string()});
  CHECK(r.code != 0);
}
