// zvl: run scenarios, soliton checks, virial residuals, coercivity sampling,
// conservation audits; summarize output directories.
//
// Exit codes: 0 all flags pass, 1 a check failed, 2 usage or config error.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "zvl/experiments.hpp"
#include "zvl/io.hpp"

namespace {

using namespace zvl;
namespace fs = std::filesystem;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

std::optional<fs::path> output_root(const std::string& flag) {
  if (!flag.empty()) return fs::path(flag);
  if (const char* env = std::getenv("ZVL_OUT_DIR"); env && *env) return fs::path(env);
  return std::nullopt;
}

int finish(const Report& r, const ExperimentConfig& cfg, const std::string& out,
           std::chrono::system_clock::time_point start) {
  const auto end = std::chrono::system_clock::now();
  std::cout << r.summary_line() << "\n";
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& h : r.hypothesis_failures) std::cerr << "hypothesis: " << h << "\n";
  if (auto root = output_root(out)) {
    const fs::path dir = *root / r.name;
    write_run(r, cfg, dir, start, end);
    std::cerr << "wrote " << dir.string() << "\n";
  }
  return r.pass() ? kPass : kFail;
}

int report_dir(const std::string& out) {
  const auto root = output_root(out);
  if (!root || !fs::is_directory(*root)) {
    std::cerr << "report: no output directory (use --out or ZVL_OUT_DIR)\n";
    return kUsage;
  }
  std::vector<fs::path> manifests;
  for (const auto& e : fs::recursive_directory_iterator(*root))
    if (e.is_regular_file() && e.path().filename() == "manifest.json") manifests.push_back(e.path());
  std::sort(manifests.begin(), manifests.end());
  if (manifests.empty()) {
    std::cerr << "report: no manifests under " << root->string() << "\n";
    return kUsage;
  }
  bool all = true;
  for (const auto& m : manifests) {
    const ManifestCheck c = check_manifest(m);
    const bool ok = c.digests_ok && c.status == "pass";
    all = all && ok;
    std::cout << c.name << " " << c.scenario << " " << (c.status.empty() ? "?" : c.status)
              << " digests=" << (c.digests_ok ? "ok" : "bad") << "\n";
    for (const auto& p : c.problems) std::cerr << "  " << p << "\n";
  }
  return all ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zakharov / Klein-Gordon-Zakharov decay experiments"};
  app.require_subcommand(1);

  std::string config, out;
  std::string system = "zakharov";
  double omega = 1.0, speed = 0.0, center = 0.0, t_final = 10.0, dt = 1e-3;
  int samples = 10000, reseeds = 0, points = 1024;
  std::uint64_t seed = 42;
  double lambda = 1.0, half_length = 20.0;

  auto* sim = app.add_subcommand("simulate", "run the scenario a config describes");
  sim->add_option("--config", config, "YAML config")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out, "output root (default $ZVL_OUT_DIR)");

  auto* sol = app.add_subcommand("soliton-check", "propagate an exact solitary wave");
  sol->add_option("--system", system, "zakharov or kgz")
      ->check(CLI::IsMember({"zakharov", "kgz"}));
  sol->add_option("--omega", omega)->required();
  sol->add_option("--speed", speed)->required();
  sol->add_option("--center", center);
  sol->add_option("--t-final", t_final);
  sol->add_option("--dt", dt);
  sol->add_option("--out", out);

  auto* vir = app.add_subcommand("virial-check", "residual tables for every applicable functional");
  vir->add_option("--config", config)->required()->check(CLI::ExistingFile);
  vir->add_option("--out", out);

  auto* coe = app.add_subcommand("coercivity", "sample the bilinear forms on random odd fields");
  coe->add_option("--samples", samples)->check(CLI::PositiveNumber);
  coe->add_option("--seed", seed);
  coe->add_option("--lambda", lambda)->check(CLI::PositiveNumber);
  coe->add_option("--reseeds", reseeds, "extra seeds for the c0 stability check");
  coe->add_option("--L", half_length)->check(CLI::PositiveNumber);
  coe->add_option("--N", points);
  coe->add_option("--out", out);

  auto* aud = app.add_subcommand("audit", "conservation drift at dt, dt/2, dt/4");
  aud->add_option("--config", config)->required()->check(CLI::ExistingFile);
  aud->add_option("--out", out);

  auto* rep = app.add_subcommand("report", "summarize the manifests under a directory");
  rep->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  const auto start = std::chrono::system_clock::now();
  try {
    if (*rep) return report_dir(out);
    ExperimentConfig cfg;
    if (*sim || *vir || *aud) cfg = parse_config(config);
    if (*sim) return finish(run_experiment(cfg), cfg, out, start);
    if (*vir) {
      Report r = run_virial_check(cfg);
      r.name += "_virial";
      return finish(r, cfg, out, start);
    }
    if (*aud) {
      cfg.scenario = Scenario::conservation_audit;
      Report r = run_conservation_audit(cfg);
      r.name += "_audit";
      return finish(r, cfg, out, start);
    }
    if (*sol) {
      cfg.name = "soliton_" + system;
      cfg.scenario = Scenario::soliton_validation;
      cfg.model.system = system == "kgz" ? System::kgz : System::zakharov;
      cfg.data.kind = system == "kgz" ? DataKind::chen : DataKind::wu;
      cfg.data.soliton = {omega, speed, 0.0};
      cfg.data.center = center;
      cfg.stepper.dt = dt;
      cfg.stepper.t_final = t_final;
      cfg.stepper.record_every = std::max(1, static_cast<int>(std::lround(0.1 / dt)));
      return finish(run_soliton_validation(cfg), cfg, out, start);
    }
    if (*coe) {
      cfg.name = "coercivity";
      cfg.scenario = Scenario::coercivity;
      cfg.half_length = half_length;
      cfg.points = points;
      cfg.samples = samples;
      cfg.seed = seed;
      cfg.lambda = lambda;
      cfg.reseeds = reseeds;
      return finish(run_coercivity(cfg), cfg, out, start);
    }
  } catch (const ParseError& e) {
    std::cerr << config << ":" << e.line() << ": " << e.what() << "\n";
    return kUsage;
  } catch (const ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const UnstableStep& e) {
    std::cerr << e.what() << "\n";
    return kFail;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    switch (e.code()) {
      case Errc::invalid_parameter:
      case Errc::incompatible_spec:
      case Errc::io_error:
      case Errc::parse_error: return kUsage;
      default: return kFail;
    }
  }
  return kUsage;
}
