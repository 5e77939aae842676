#pragma once

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <nlohmann/json.hpp>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "zvl/error.hpp"
#include "zvl/experiments.hpp"
#include "zvl/timeseries.hpp"

namespace zvl {

inline constexpr const char* kVersion = "zvl 0.1.0";

namespace fs = std::filesystem;

/// Shortest decimal that round-trips to the same double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, end);
}

namespace detail {

inline int line_of(const YAML::Node& n) { return n.Mark().line + 1; }

inline void check_keys(const YAML::Node& map, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!map.IsMap()) throw ParseError(line_of(map), where + " must be a mapping");
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key))
      throw ParseError(line_of(kv.first), "unknown key '" + key + "'" +
                                              (where.empty() ? "" : " in " + where));
  }
}

template <class T>
T as(const YAML::Node& n, const std::string& field, const char* what) {
  try {
    return n.as<T>();
  } catch (const YAML::BadConversion&) {
    throw ValidationError(field, std::string("expected ") + what + " (line " +
                                     std::to_string(line_of(n)) + ")");
  }
}

inline double as_double(const YAML::Node& n, const std::string& field) {
  return as<double>(n, field, "a number");
}

/// Number, or a multiple of pi written as `64pi`, `64*pi` or `pi`.
inline double as_length(const YAML::Node& n, const std::string& field) {
  const std::string s = as<std::string>(n, field, "a length");
  static const std::regex re(R"(^\s*([0-9.eE+-]*)\s*\*?\s*pi\s*$)");
  std::smatch m;
  if (std::regex_match(s, m, re)) {
    if (m[1].str().empty()) return std::numbers::pi;
    try {
      std::size_t used = 0;
      const double k = std::stod(m[1].str(), &used);
      if (used == m[1].str().size()) return k * std::numbers::pi;
    } catch (const std::exception&) {
    }
    throw ValidationError(field, "cannot read '" + s + "'");
  }
  return as_double(n, field);
}

inline void read(const YAML::Node& n, const char* key, double& out, const std::string& field) {
  if (n[key]) out = as_double(n[key], field);
}
inline void read(const YAML::Node& n, const char* key, int& out, const std::string& field) {
  if (n[key]) out = as<int>(n[key], field, "an integer");
}
inline void read(const YAML::Node& n, const char* key, bool& out, const std::string& field) {
  if (n[key]) out = as<bool>(n[key], field, "true or false");
}

}  // namespace detail

/// Parses config text. Unknown keys are parse errors; bad values are
/// validation errors naming the field.
inline ExperimentConfig parse_config_text(const std::string& text) {
  using namespace detail;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.mark.line + 1, e.msg);
  }
  if (!root || root.IsNull()) throw ParseError(1, "empty config");
  check_keys(root,
             {"name", "scenario", "model", "grid", "stepper", "t_start", "data", "epsilon",
              "interval", "curve", "seed", "lambda", "samples", "reseeds", "expect_decay",
              "order_study", "reference_dt", "dt_ladder", "thresholds"},
             "");
  ExperimentConfig c;
  if (!root["scenario"]) throw ValidationError("scenario", "missing");
  {
    const std::string s = as<std::string>(root["scenario"], "scenario", "a scenario name");
    auto sc = scenario_from(s);
    if (!sc) throw ValidationError("scenario", "unknown scenario '" + s + "'");
    c.scenario = *sc;
    if (auto sys = scenario_system(*sc)) c.model.system = *sys;
  }
  if (root["name"]) c.name = as<std::string>(root["name"], "name", "a string");
  if (const auto m = root["model"]) {
    check_keys(m, {"system", "alpha", "c", "p", "sign", "dealias"}, "model");
    if (m["system"]) {
      const std::string s = as<std::string>(m["system"], "model.system", "a system name");
      if (s == "zakharov") c.model.system = System::zakharov;
      else if (s == "kgz") c.model.system = System::kgz;
      else if (s == "nls") c.model.system = System::nls;
      else throw ValidationError("model.system", "unknown system '" + s + "'");
    }
    read(m, "alpha", c.model.alpha, "model.alpha");
    read(m, "c", c.model.c, "model.c");
    read(m, "p", c.model.p, "model.p");
    read(m, "sign", c.model.sign, "model.sign");
    read(m, "dealias", c.model.dealias, "model.dealias");
  }
  if (const auto g = root["grid"]) {
    check_keys(g, {"L", "N"}, "grid");
    if (g["L"]) c.half_length = as_length(g["L"], "L");
    read(g, "N", c.points, "N");
  }
  if (const auto s = root["stepper"]) {
    check_keys(s, {"dt", "scheme", "record_every", "t_final", "force"}, "stepper");
    read(s, "dt", c.stepper.dt, "dt");
    read(s, "record_every", c.stepper.record_every, "record_every");
    read(s, "t_final", c.stepper.t_final, "t_final");
    read(s, "force", c.stepper.force, "force");
    if (s["scheme"]) {
      const std::string v = as<std::string>(s["scheme"], "scheme", "a scheme name");
      if (v == "rk4") c.stepper.scheme = Scheme::rk4;
      else if (v == "strang_nls") c.stepper.scheme = Scheme::strang_nls;
      else throw ValidationError("scheme", "unknown scheme '" + v + "'");
    }
  }
  read(root, "t_start", c.t_start, "t_start");
  if (const auto d = root["data"]) {
    check_keys(d, {"kind", "width", "amp_u", "amp_n", "center", "kick", "carrier", "omega", "speed"}, "data");
    if (d["kind"]) {
      const std::string v = as<std::string>(d["kind"], "data.kind", "a data kind");
      auto k = data_kind_from(v);
      if (!k) throw ValidationError("data.kind", "unknown data kind '" + v + "'");
      c.data.kind = *k;
    }
    read(d, "width", c.data.width, "data.width");
    read(d, "amp_u", c.data.amp_u, "data.amp_u");
    read(d, "amp_n", c.data.amp_n, "data.amp_n");
    read(d, "center", c.data.center, "data.center");
    read(d, "kick", c.data.kick, "data.kick");
    read(d, "carrier", c.data.carrier, "data.carrier");
    read(d, "omega", c.data.soliton.omega, "data.omega");
    read(d, "speed", c.data.soliton.speed, "data.speed");
  }
  read(root, "epsilon", c.epsilon, "epsilon");
  if (const auto i = root["interval"]) {
    if (!i.IsSequence() || i.size() != 2) throw ValidationError("interval", "expected [lo, hi]");
    c.interval = {as_double(i[0], "interval"), as_double(i[1], "interval")};
  }
  if (const auto cv = root["curve"]) {
    CurveParams cp;
    if (!cv.IsNull()) {
      check_keys(cv, {"delta", "f_mode", "f_const"}, "curve");
      read(cv, "delta", cp.delta, "curve.delta");
      read(cv, "f_const", cp.f_const, "curve.f_const");
      if (cv["f_mode"]) {
        const std::string v = as<std::string>(cv["f_mode"], "curve.f_mode", "tracked or constant");
        if (v == "tracked") cp.f_mode = FMode::tracked;
        else if (v == "constant") cp.f_mode = FMode::constant;
        else throw ValidationError("curve.f_mode", "expected tracked or constant");
      }
    }
    c.curve = cp;
  }
  if (root["seed"]) c.seed = as<std::uint64_t>(root["seed"], "seed", "a non-negative integer");
  read(root, "lambda", c.lambda, "lambda");
  read(root, "samples", c.samples, "samples");
  read(root, "reseeds", c.reseeds, "reseeds");
  read(root, "expect_decay", c.expect_decay, "expect_decay");
  read(root, "order_study", c.order_study, "order_study");
  read(root, "reference_dt", c.reference_dt, "reference_dt");
  if (const auto l = root["dt_ladder"]) {
    if (!l.IsSequence()) throw ValidationError("dt_ladder", "expected a list");
    c.dt_ladder.clear();
    for (const auto& x : l) c.dt_ladder.push_back(as_double(x, "dt_ladder"));
  }
  if (const auto t = root["thresholds"]) {
    check_keys(t,
               {"decay_ratio", "window", "farfield_ratio", "soliton_error", "drift", "order",
                "order_tolerance", "epsilon_max", "ut_bound", "parity", "virial", "c0_spread"},
               "thresholds");
    Thresholds& h = c.thresholds;
    read(t, "decay_ratio", h.decay_ratio, "thresholds.decay_ratio");
    read(t, "window", h.window, "thresholds.window");
    read(t, "farfield_ratio", h.farfield_ratio, "thresholds.farfield_ratio");
    read(t, "soliton_error", h.soliton_error, "thresholds.soliton_error");
    read(t, "drift", h.drift, "thresholds.drift");
    read(t, "order", h.order, "thresholds.order");
    read(t, "order_tolerance", h.order_tolerance, "thresholds.order_tolerance");
    read(t, "epsilon_max", h.epsilon_max, "thresholds.epsilon_max");
    read(t, "ut_bound", h.ut_bound, "thresholds.ut_bound");
    read(t, "parity", h.parity, "thresholds.parity");
    read(t, "virial", h.virial, "thresholds.virial");
    read(t, "c0_spread", h.c0_spread, "thresholds.c0_spread");
  }
  c.validate();
  return c;
}

inline ExperimentConfig parse_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Every field, fixed order, shortest round-trip numbers. Parsing this text
/// gives back the same config.
inline std::string canonical_config(const ExperimentConfig& c) {
  const auto d = format_double;
  std::ostringstream os;
  os << "name: " << std::quoted(c.name) << "\n";
  os << "scenario: " << scenario_name(c.scenario) << "\n";
  os << "model:\n  system: " << system_name(c.model.system) << "\n  alpha: " << d(c.model.alpha)
     << "\n  c: " << d(c.model.c) << "\n  p: " << d(c.model.p) << "\n  sign: " << c.model.sign
     << "\n  dealias: " << (c.model.dealias ? "true" : "false") << "\n";
  os << "grid:\n  L: " << d(c.half_length) << "\n  N: " << c.points << "\n";
  os << "stepper:\n  dt: " << d(c.stepper.dt) << "\n  scheme: "
     << (c.stepper.scheme == Scheme::rk4 ? "rk4" : "strang_nls")
     << "\n  record_every: " << c.stepper.record_every << "\n  t_final: " << d(c.stepper.t_final)
     << "\n  force: " << (c.stepper.force ? "true" : "false") << "\n";
  os << "t_start: " << d(c.t_start) << "\n";
  os << "data:\n  kind: " << data_kind_name(c.data.kind) << "\n  width: " << d(c.data.width)
     << "\n  amp_u: " << d(c.data.amp_u) << "\n  amp_n: " << d(c.data.amp_n)
     << "\n  center: " << d(c.data.center) << "\n  kick: " << d(c.data.kick) << "\n  carrier: " << d(c.data.carrier)
     << "\n  omega: " << d(c.data.soliton.omega) << "\n  speed: " << d(c.data.soliton.speed)
     << "\n";
  os << "epsilon: " << d(c.epsilon) << "\n";
  os << "interval: [" << d(c.interval.lo) << ", " << d(c.interval.hi) << "]\n";
  if (c.curve)
    os << "curve:\n  delta: " << d(c.curve->delta) << "\n  f_mode: "
       << (c.curve->f_mode == FMode::tracked ? "tracked" : "constant")
       << "\n  f_const: " << d(c.curve->f_const) << "\n";
  os << "seed: " << c.seed << "\n";
  os << "lambda: " << d(c.lambda) << "\n";
  os << "samples: " << c.samples << "\n";
  os << "reseeds: " << c.reseeds << "\n";
  os << "expect_decay: " << (c.expect_decay ? "true" : "false") << "\n";
  os << "order_study: " << (c.order_study ? "true" : "false") << "\n";
  os << "reference_dt: " << d(c.reference_dt) << "\n";
  os << "dt_ladder: [";
  for (std::size_t i = 0; i < c.dt_ladder.size(); ++i) os << (i ? ", " : "") << d(c.dt_ladder[i]);
  os << "]\n";
  const Thresholds& t = c.thresholds;
  os << "thresholds:\n  decay_ratio: " << d(t.decay_ratio) << "\n  window: " << d(t.window)
     << "\n  farfield_ratio: " << d(t.farfield_ratio) << "\n  soliton_error: "
     << d(t.soliton_error) << "\n  drift: " << d(t.drift) << "\n  order: " << d(t.order)
     << "\n  order_tolerance: " << d(t.order_tolerance) << "\n  epsilon_max: "
     << d(t.epsilon_max) << "\n  ut_bound: " << d(t.ut_bound) << "\n  parity: " << d(t.parity)
     << "\n  virial: " << d(t.virial) << "\n  c0_spread: " << d(t.c0_spread) << "\n";
  return os.str();
}

inline std::string csv_text(const TimeSeries& s) {
  std::string out;
  const auto& cols = s.columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  out += '\n';
  for (const auto& row : s.rows()) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

inline void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw Error(Errc::io_error, "sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

inline nlohmann::json file_entry(const fs::path& path) {
  const std::string bytes = read_file(path);
  return {{"file", path.filename().string()}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}};
}

/// CSV plus a sibling `<file>.manifest.json` holding its digest.
inline void write_timeseries(const TimeSeries& s, const fs::path& path) {
  write_file(path, csv_text(s));
  nlohmann::json m{{"version", kVersion}, {"files", {file_entry(path)}}};
  write_file(path.string() + ".manifest.json", m.dump(2) + "\n");
}

/// Columnar snapshot: x, Re u, Im u[, n, v][, Re u_t, Im u_t].
template <class S>
TimeSeries snapshot_table(const S& s, const Grid& g) {
  std::vector<std::string> cols{"re_u", "im_u"};
  if constexpr (!std::is_same_v<S, NLSState>) cols.insert(cols.end(), {"n", "v"});
  if constexpr (std::is_same_v<S, KGZState>) cols.insert(cols.end(), {"re_ut", "im_ut"});
  TimeSeries out = TimeSeries::keyed("x", cols);
  for (int j = 0; j < g.size(); ++j) {
    std::vector<double> row{g.node(j), s.u[j].real(), s.u[j].imag()};
    if constexpr (!std::is_same_v<S, NLSState>) row.insert(row.end(), {s.n[j], s.v[j]});
    if constexpr (std::is_same_v<S, KGZState>) row.insert(row.end(), {s.ut[j].real(), s.ut[j].imag()});
    out.append(std::move(row));
  }
  return out;
}

inline nlohmann::json summary_json(const Report& r) {
  nlohmann::json flags = nlohmann::json::object(), numbers = nlohmann::json::object();
  for (const auto& [k, v] : r.flags) flags[k] = v;
  for (const auto& [k, v] : r.numbers) {
    if (std::isfinite(v)) numbers[k] = v;
    else numbers[k] = format_double(v);
  }
  return {{"name", r.name},
          {"scenario", r.scenario},
          {"status", r.status()},
          {"pass", r.pass()},
          {"hypothesis_required", r.hypothesis_required},
          {"hypothesis_ok", r.hypothesis_ok},
          {"hypothesis_failures", r.hypothesis_failures},
          {"flags", flags},
          {"numbers", numbers},
          {"warnings", r.warnings}};
}

/// Writes tables, summary.json, config.yaml and manifest.json into `dir`.
/// Wall-clock times go to timing.json, which the manifest does not cover.
inline void write_run(const Report& r, const ExperimentConfig& cfg, const fs::path& dir,
                      std::chrono::system_clock::time_point start,
                      std::chrono::system_clock::time_point end) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + dir.string() + ": " + ec.message());
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [name, table] : r.tables) {
    const fs::path p = dir / (name + ".csv");
    write_file(p, csv_text(table));
    files.push_back(file_entry(p));
  }
  write_file(dir / "summary.json", summary_json(r).dump(2) + "\n");
  files.push_back(file_entry(dir / "summary.json"));
  const std::string canon = canonical_config(cfg);
  write_file(dir / "config.yaml", canon);
  files.push_back(file_entry(dir / "config.yaml"));
  nlohmann::json m{{"version", kVersion},
                   {"name", r.name},
                   {"scenario", r.scenario},
                   {"config", canon},
                   {"grid", {{"L", cfg.half_length}, {"N", cfg.points}}},
                   {"stepper",
                    {{"dt", cfg.stepper.dt},
                     {"record_every", cfg.stepper.record_every},
                     {"t_final", cfg.stepper.t_final},
                     {"scheme", cfg.stepper.scheme == Scheme::rk4 ? "rk4" : "strang_nls"}}},
                   {"seed", cfg.seed},
                   {"files", files}};
  write_file(dir / "manifest.json", m.dump(2) + "\n");
  auto stamp = [](std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
  };
  nlohmann::json timing{
      {"start", stamp(start)},
      {"end", stamp(end)},
      {"seconds", std::chrono::duration<double>(end - start).count()}};
  write_file(dir / "timing.json", timing.dump(2) + "\n");
}

struct ManifestCheck {
  fs::path dir;
  std::string name, scenario, status;
  bool digests_ok = true;
  std::vector<std::string> problems;
};

/// Re-hashes every file a manifest lists.
inline ManifestCheck check_manifest(const fs::path& manifest) {
  ManifestCheck c;
  c.dir = manifest.parent_path();
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(read_file(manifest));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, manifest.string() + ": " + e.what());
  }
  c.name = m.value("name", "");
  c.scenario = m.value("scenario", "");
  for (const auto& f : m.at("files")) {
    const fs::path p = c.dir / f.at("file").get<std::string>();
    if (!fs::exists(p)) {
      c.digests_ok = false;
      c.problems.push_back("missing " + p.string());
      continue;
    }
    if (sha256_hex(read_file(p)) != f.at("sha256").get<std::string>()) {
      c.digests_ok = false;
      c.problems.push_back("digest mismatch for " + p.string());
    }
  }
  const fs::path summary = c.dir / "summary.json";
  if (fs::exists(summary)) c.status = nlohmann::json::parse(read_file(summary)).value("status", "");
  return c;
}

}  // namespace zvl
