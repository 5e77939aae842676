#include <catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>

#include "zvl/io.hpp"

using namespace zvl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("zvl_test_io_" + name);
  fs::remove_all(p);
  return p;
}

int parse_line(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

std::string invalid_field(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ValidationError& e) {
    return e.field();
  }
  return "";
}

ExperimentConfig soliton_config() {
  ExperimentConfig c;
  c.name = "io_soliton";
  c.scenario = Scenario::soliton_validation;
  c.half_length = 20.0;
  c.points = 256;
  c.stepper.t_final = 0.2;
  c.stepper.record_every = 20;
  c.data.kind = DataKind::wu;
  c.data.soliton = {1.0, 0.5, 0.0};
  return c;
}

}  // namespace

TEST_CASE("defaults", "[io]") {
  const auto c = parse_config_text("scenario: compact_decay_zak\n");
  CHECK(c.points == 2048);
  CHECK(c.half_length == 64 * std::numbers::pi);
  CHECK(c.stepper.dt == 1e-3);
  CHECK(c.model.system == System::zakharov);
  CHECK_FALSE(c.curve);
  const auto f = parse_config_text("scenario: farfield_kgz\nt_start: 2\ncurve:\nstepper: {t_final: 3}\n");
  REQUIRE(f.curve);
  CHECK(f.curve->delta == 0.5);
  CHECK(f.curve->f_mode == FMode::tracked);
  CHECK(f.model.system == System::kgz);
}

TEST_CASE("lengths in units of pi", "[io]") {
  auto L = [](const std::string& v) {
    return parse_config_text("scenario: coercivity\ngrid: {L: " + v + "}\n").half_length;
  };
  CHECK(L("64pi") == 64 * std::numbers::pi);
  CHECK(L("64*pi") == 64 * std::numbers::pi);
  CHECK(L("pi") == std::numbers::pi);
  CHECK(L("12.5") == 12.5);
  CHECK(invalid_field("scenario: coercivity\ngrid: {L: twopi}\n") == "L");
}

TEST_CASE("parse errors carry the line", "[io]") {
  CHECK(parse_line("scenario: compact_decay_zak\ngrid:\n  L: 10\n  M: 3\n") == 4);
  CHECK(parse_line("scenario: compact_decay_zak\nbogus: 1\n") == 2);
  CHECK(parse_line("scenario: compact_decay_zak\ngrid: [1, 2\n") > 0);
  CHECK(parse_line("") == 1);
}

TEST_CASE("invalid values name the field", "[io]") {
  CHECK(invalid_field("scenario: compact_decay_zak\nstepper: {dt: 0}\n") == "dt");
  CHECK(invalid_field("scenario: compact_decay_zak\nstepper: {dt: fast}\n") == "dt");
  CHECK(invalid_field("scenario: farfield_zak\nt_start: 2\nstepper: {t_final: 3}\n") == "curve");
  CHECK(invalid_field("scenario: warp\n") == "scenario");
  CHECK(invalid_field("name: x\n") == "scenario");
  CHECK(invalid_field("scenario: compact_decay_zak\ngrid: {N: 1000}\n") == "N");
  CHECK(invalid_field("scenario: compact_decay_zak\ninterval: [1]\n") == "interval");
  CHECK(invalid_field("scenario: compact_decay_zak\ndata: {kind: blob}\n") == "data.kind");
}

TEST_CASE("canonical config round-trips", "[io]") {
  ExperimentConfig c = soliton_config();
  c.model.system = System::kgz;
  c.model.c = 1.0 / 3.0;
  c.data.kind = DataKind::chen;
  c.data.soliton = {0.1, 0.2, 0.0};
  c.curve = CurveParams{0.25, FMode::constant, 2.0};
  c.dt_ladder = {0.1, 0.01};
  c.seed = 123456789012345ULL;
  c.thresholds.drift = 3e-9;
  const std::string text = canonical_config(c);
  const ExperimentConfig back = parse_config_text(text);
  CHECK(canonical_config(back) == text);
  CHECK(back.model.c == 1.0 / 3.0);
  CHECK(back.seed == 123456789012345ULL);
}

TEST_CASE("number formatting", "[io]") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 6.02214076e23, 0.0}) {
    const std::string s = format_double(x);
    CHECK(std::stod(s) == x);
  }
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("CSV text", "[io]") {
  TimeSeries s({"a", "b"});
  CHECK(csv_text(s) == "t,a,b\n");
  s.append({0.5, 1.0, -2.0});
  CHECK(csv_text(s) == "t,a,b\n0.5,1,-2\n");
}

TEST_CASE("sha256", "[io]") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("time series files carry a digest", "[io]") {
  const fs::path dir = scratch("ts");
  fs::create_directories(dir);
  TimeSeries s({"x"});
  s.append({0.0, 1.0});
  write_timeseries(s, dir / "s.csv");
  const auto m = nlohmann::json::parse(read_file(dir / "s.csv.manifest.json"));
  CHECK(m["files"][0]["sha256"] == sha256_hex(read_file(dir / "s.csv")));
  fs::remove_all(dir);
}

TEST_CASE("snapshot columns", "[io]") {
  const Grid g(10.0, 16);
  CHECK(snapshot_table(zero_kgz(g), g).columns() ==
        std::vector<std::string>{"x", "re_u", "im_u", "n", "v", "re_ut", "im_ut"});
  CHECK(snapshot_table(zero_nls(g), g).size() == 16);
}

TEST_CASE("run directories: manifest, reruns, tampering", "[io]") {
  const ExperimentConfig c = soliton_config();
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  const auto t0 = std::chrono::system_clock::now();
  write_run(run_experiment(c), c, a, t0, t0);
  write_run(run_experiment(c), c, b, t0 + std::chrono::seconds(5), t0 + std::chrono::seconds(9));

  const ManifestCheck ok = check_manifest(a / "manifest.json");
  CHECK(ok.digests_ok);
  CHECK(ok.status == "pass");
  CHECK(ok.name == "io_soliton");
  for (const char* f : {"manifest.json", "series.csv", "summary.json", "config.yaml"})
    CHECK(read_file(a / f) == read_file(b / f));
  CHECK(read_file(a / "timing.json") != read_file(b / "timing.json"));
  CHECK(parse_config(a / "config.yaml").name == "io_soliton");

  write_file(b / "series.csv", read_file(b / "series.csv") + "0,0,0\n");
  const ManifestCheck bad = check_manifest(b / "manifest.json");
  CHECK_FALSE(bad.digests_ok);
  REQUIRE(bad.problems.size() == 1);
  fs::remove(b / "summary.json");
  CHECK(check_manifest(b / "manifest.json").problems.size() == 2);
  fs::remove_all(a);
  fs::remove_all(b);
  CHECK_THROWS_AS(parse_config(a / "config.yaml"), Error);
}
