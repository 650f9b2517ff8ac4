#include <doctest.h>

#include <fstream>

#include "mpgrade/io_util.hpp"
#include "mpgrade/manifest.hpp"
#include "test_util.hpp"

using namespace mpgrade;
namespace fs = std::filesystem;

TEST_CASE("u8 volume round-trips byte-identically") {
  const auto dir = testutil::temp_dir("vs_u8");
  auto v = testutil::random_volume(1, {"T2W", "ADC", "DWI"}, {4, 8, 8});
  v.label = 3;
  v.spacing = std::array<double, 3>{3.0, 0.5, 0.5};
  write_volume(v, dir / "case.json");
  const auto back = read_volume(dir / "case.json");
  CHECK(back == v);
  const auto raw = read_file(dir / "case.raw");
  REQUIRE(raw.size() == v.data.size());
  for (std::size_t i = 0; i < raw.size(); ++i) CHECK(static_cast<unsigned char>(raw[i]) == v.data[i]);
}

TEST_CASE("mask is a second blob and round-trips") {
  const auto dir = testutil::temp_dir("vs_mask");
  const auto v = testutil::random_volume(2, {"ADC", "DWI"}, {3, 5, 7}, ElementType::F32, true);
  write_volume(v, dir / "m");
  CHECK(fs::exists(dir / "m.mask.raw"));
  CHECK(fs::file_size(dir / "m.raw") == v.data.size() * 4);
  CHECK(read_volume(dir / "m") == v);
}

TEST_CASE("f32 payload is little-endian IEEE") {
  const auto dir = testutil::temp_dir("vs_le");
  MpMriVolume v({"FE"}, {1, 1, 2}, ElementType::F32);
  v.data = {1.0f, 255.0f};
  write_volume(v, dir / "le");
  const auto raw = read_file(dir / "le.raw");
  const unsigned char expected[8] = {0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x7f, 0x43};
  REQUIRE(raw.size() == 8);
  for (int i = 0; i < 8; ++i) CHECK(static_cast<unsigned char>(raw[i]) == expected[i]);
}

TEST_CASE("round-trip holds for seeded random volumes") {
  const auto dir = testutil::temp_dir("vs_prop");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const Dims d{1 + rng.below(4), 1 + rng.below(9), 1 + rng.below(9)};
    const auto type = rng.below(2) ? ElementType::U8 : ElementType::F32;
    auto v = testutil::random_volume(seed, {"T2W", "DWI"}, d, type, rng.below(2) == 1);
    if (rng.below(2)) v.label = static_cast<int>(rng.below(6));
    write_volume(v, dir / ("v" + std::to_string(seed)));
    CHECK(read_volume(dir / ("v" + std::to_string(seed))) == v);
  }
}

TEST_CASE("rewriting an identical volume leaves files untouched") {
  const auto dir = testutil::temp_dir("vs_idem");
  const auto v = testutil::random_volume(3, {"DWI"}, {2, 3, 3});
  CHECK(write_volume(v, dir / "x"));
  CHECK_FALSE(write_volume(v, dir / "x"));
}

TEST_CASE("declared f32 with a u8-sized payload is rejected") {
  const auto dir = testutil::temp_dir("vs_dtype");
  const auto v = testutil::random_volume(4, {"T2W", "ADC", "DWI"}, {3, 4, 8});
  write_volume(v, dir / "c");
  std::string sidecar = read_text(dir / "c.json");
  const auto pos = sidecar.find("\"u8\"");
  REQUIRE(pos != std::string::npos);
  sidecar.replace(pos, 4, "\"f32\"");
  std::ofstream(dir / "c.json", std::ios::binary) << sidecar;
  CHECK_THROWS_WITH_AS(read_volume(dir / "c.json"), doctest::Contains("size mismatch"), std::runtime_error);
}

TEST_CASE("truncated payload is a size mismatch") {
  const auto dir = testutil::temp_dir("vs_trunc");
  write_volume(testutil::random_volume(5, {"ADC"}, {2, 4, 4}), dir / "t");
  fs::resize_file(dir / "t.raw", 10);
  CHECK_THROWS_WITH_AS(read_volume(dir / "t"), doctest::Contains("size mismatch"), std::runtime_error);
}

TEST_CASE("label outside 0..5 fails validation on load") {
  const auto dir = testutil::temp_dir("vs_label");
  auto v = testutil::random_volume(6, {"ADC"}, {1, 2, 2});
  v.label = 2;
  write_volume(v, dir / "l");
  std::string sidecar = read_text(dir / "l.json");
  const auto pos = sidecar.find("\"label\": 2");
  REQUIRE(pos != std::string::npos);
  sidecar.replace(pos, 10, "\"label\": 7");
  std::ofstream(dir / "l.json", std::ios::binary) << sidecar;
  CHECK_THROWS_AS(read_volume(dir / "l"), std::invalid_argument);
}

TEST_CASE("unknown channel and missing files are errors") {
  const auto dir = testutil::temp_dir("vs_chan");
  write_volume(testutil::random_volume(7, {"ADC"}, {1, 2, 2}), dir / "u");
  std::string sidecar = read_text(dir / "u.json");
  sidecar.replace(sidecar.find("\"ADC\""), 5, "\"PDW\"");
  std::ofstream(dir / "u.json", std::ios::binary) << sidecar;
  CHECK_THROWS_AS(read_volume(dir / "u"), std::invalid_argument);
  CHECK_THROWS_AS(read_volume(dir / "absent"), std::runtime_error);
  CHECK_THROWS_AS(write_volume(testutil::random_volume(7, {"ADC"}, {1, 2, 2}), dir / "no" / "such" / "x"),
                  std::runtime_error);
}

TEST_CASE("volume invariants") {
  auto v = testutil::random_volume(8, {"ADC", "DWI"}, {1, 2, 2});
  CHECK_NOTHROW(v.validate());
  auto dup = v;
  dup.channels = {"ADC", "ADC"};
  CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
  auto frac = v;
  frac.data[0] = 1.5f;
  CHECK_THROWS_AS(frac.validate(), std::invalid_argument);
  auto bad_mask = v;
  bad_mask.mask = std::vector<std::uint8_t>(3, 1);
  CHECK_THROWS_AS(bad_mask.validate(), std::invalid_argument);
}

TEST_CASE("manifest parsing") {
  const auto m = parse_manifest("path,label,split\na.json,0,train\nb.json,3,val\nc.json,5,test\n");
  REQUIRE(m.entries.size() == 3);
  CHECK(m.entries[1] == ManifestEntry{"b.json", 3, Split::Val});
  CHECK(m.with_split(Split::Test).size() == 1);
  CHECK(parse_manifest(format_manifest(m)).entries == m.entries);

  CHECK_THROWS(parse_manifest("path,label,split\na.json,0,train\na.json,1,val\n"));
  CHECK_THROWS(parse_manifest("path,label,split\na.json,-1,train\n"));
  CHECK_THROWS(parse_manifest("path,label,split\na.json,6,train\n"));
  CHECK_THROWS(parse_manifest("path,label,split\na.json,1,holdout\n"));
  CHECK_THROWS(parse_manifest("path,label,split\na.json,1\n"));
  CHECK_THROWS(parse_manifest("file,label,split\na.json,1,train\n"));
}

TEST_CASE("manifest entries resolve against the manifest directory") {
  const auto dir = testutil::temp_dir("vs_manifest");
  std::ofstream(dir / "manifest.csv") << "path,label,split\ncases/a.json,2,train\n";
  const auto m = load_manifest(dir / "manifest.csv");
  CHECK(resolve_entry(dir / "manifest.csv", m.entries[0]) == dir / "cases" / "a.json");
}
