// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.
// Configs are read from ZVL_CONFIG_DIR.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "zvl/io.hpp"

namespace {

using namespace zvl;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

ExperimentConfig load(const std::string& name) {
  return parse_config(fs::path(ZVL_CONFIG_DIR) / (name + ".yaml"));
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Timed {
  Report report;
  double seconds = 0.0;
};

Timed run(const std::string& name) {
  const auto t0 = Clock::now();
  Report r = run_experiment(load(name));
  return {std::move(r), seconds_since(t0)};
}

Timed run_virial(const std::string& name) {
  const auto t0 = Clock::now();
  Report r = run_virial_check(load(name));
  return {std::move(r), seconds_since(t0)};
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

class Criterion {
 public:
  void require(bool ok, const std::string& what) {
    ok_ = ok_ && ok;
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool ok() const { return ok_; }

  std::string text() const {
    std::string out;
    for (const auto& n : notes_) out += (out.empty() ? "" : "; ") + n;
    for (const auto& f : failures_) out += (out.empty() ? "" : "; ") + ("FAILED " + f);
    return out;
  }

 private:
  bool ok_ = true;
  std::vector<std::string> notes_, failures_;
};

// Fourth-order central difference in t minus the rhs, over u, n, v.
template <class Make>
double pde_residual(Make make, const Grid& g, const ModelParams& prm, double t) {
  const double h = 1e-3;
  const auto a = make(t - 2 * h), b = make(t - h), c = make(t + h), d = make(t + 2 * h);
  const auto r = rhs(make(t), g, prm);
  auto fd = [&](auto pa, auto pb, auto pc, auto pd) {
    return (pa - 8.0 * pb + 8.0 * pc - pd) / (12.0 * h);
  };
  double worst = 0.0;
  for (int j = 0; j < g.size(); ++j) {
    worst = std::max(worst, std::abs(fd(a.u[j], b.u[j], c.u[j], d.u[j]) - r.u[j]));
    worst = std::max(worst, std::abs(fd(a.n[j], b.n[j], c.n[j], d.n[j]) - r.n[j]));
    worst = std::max(worst, std::abs(fd(a.v[j], b.v[j], c.v[j], d.v[j]) - r.v[j]));
  }
  return worst;
}

// max |u_t carried by the state - d/dt u| by central difference.
template <class Make>
double ut_mismatch(Make make, const Grid& g, double t) {
  const double h = 1e-4;
  const auto a = make(t - h), b = make(t + h), s = make(t);
  double worst = 0.0;
  for (int j = 0; j < g.size(); ++j)
    worst = std::max(worst, std::abs((b.u[j] - a.u[j]) / (2 * h) - s.ut[j]));
  return worst;
}

Criterion solitons(const Timed& wu, const Timed& chen) {
  Criterion c;
  for (const Timed* t : {&wu, &chen}) {
    const Report& r = t->report;
    c.require(r.flag("error"), r.name + " error " + fmt(r.number("max_error_l2")));
    c.require(r.flag("order"), r.name + " order " + fmt(r.number("order")));
    c.require(t->seconds < 120, r.name + " runtime");
    c.note(r.name + " err=" + fmt(r.number("max_error_l2")) + " ratios " +
           fmt(r.number("ratio_1")) + "," + fmt(r.number("ratio_2")) + " order=" +
           fmt(r.number("order")) + " " + fmt(t->seconds) + "s");
  }
  return c;
}

Criterion sign_oracle() {
  Criterion c;
  const Grid g(40.0, 1024);
  const double t = 0.7;
  const SolitonParams wp{1.0, 0.5, 0.0};
  const ModelParams zp;
  auto wu = [&](double s) { return wu_soliton(wp, s, g); };
  // Printed: n = +(2w + c^2/2) sech^2, v = c n.
  auto wu_printed = [&](double s) {
    auto st = wu_soliton(wp, s, g);
    for (int j = 0; j < g.size(); ++j) {
      st.n[j] = -st.n[j];
      st.v[j] = -st.v[j];
    }
    return st;
  };
  const SolitonParams cp{0.3, 0.4, 0.0};
  ModelParams kp;
  kp.system = System::kgz;
  auto chen = [&](double s) { return chen_soliton(cp, s, g); };
  // Printed: v = -c n.
  auto chen_printed_v = [&](double s) {
    auto st = chen_soliton(cp, s, g);
    for (int j = 0; j < g.size(); ++j) st.v[j] = -st.v[j];
    return st;
  };
  // Printed: u_t = +(i w + c d/dx) u.
  auto chen_printed_ut = [&](double s) {
    auto st = chen_soliton(cp, s, g);
    for (auto& z : st.ut) z = -z;
    return st;
  };
  const double r_wu = pde_residual(wu, g, zp, t);
  const double r_wu_p = pde_residual(wu_printed, g, zp, t);
  const double r_ch = pde_residual(chen, g, kp, t);
  const double r_ch_p = pde_residual(chen_printed_v, g, kp, t);
  const double m_ch = ut_mismatch(chen, g, t);
  const double m_ch_p = ut_mismatch(chen_printed_ut, g, t);
  c.require(r_wu < 1e-8, "Wu residual " + fmt(r_wu));
  c.require(r_ch < 1e-8, "Chen residual " + fmt(r_ch));
  c.require(m_ch < 1e-6, "Chen u_t " + fmt(m_ch));
  c.require(r_wu_p > 0.1, "printed Wu n residual " + fmt(r_wu_p));
  c.require(r_ch_p > 0.1, "printed Chen v residual " + fmt(r_ch_p));
  c.require(m_ch_p > 0.1, "printed Chen u_t mismatch " + fmt(m_ch_p));
  c.note("implemented Wu " + fmt(r_wu) + " Chen " + fmt(r_ch) + " u_t " + fmt(m_ch) +
         "; printed Wu n " + fmt(r_wu_p) + " Chen v " + fmt(r_ch_p) + " Chen u_t " + fmt(m_ch_p));
  return c;
}

Criterion conservation_criterion(const std::vector<const Report*>& runs,
                                 const std::vector<Report>& audits) {
  Criterion c;
  double worst = 0.0;
  for (const Report* r : runs) {
    c.require(r->flag("conservation"), r->name + " conservation");
    for (const auto& [k, v] : r->numbers)
      if (k.rfind("max_", 0) == 0 && k.find("drift") != std::string::npos) worst = std::max(worst, v);
  }
  c.note(std::to_string(runs.size()) + " trajectories, worst drift " + fmt(worst));
  for (const Report& a : audits) {
    std::string orders;
    for (const char* q : {"mass", "energy", "momentum"}) {
      const std::string k = std::string(q);
      if (!a.has_flag(k + "_drift")) continue;
      c.require(a.flag(k + "_drift"), a.name + " " + k + " drift");
      if (a.has_flag(k + "_order")) {
        c.require(a.flag(k + "_order"), a.name + " " + k + " order " + fmt(a.number(k + "_order")));
        orders += " " + k + "=" + fmt(a.number(k + "_order"));
      } else {
        orders += " " + k + "=roundoff";
      }
    }
    c.note(a.name + orders);
  }
  return c;
}

Criterion virial_criterion(const std::map<std::string, Timed>& v, double seconds) {
  Criterion c;
  const std::vector<std::pair<std::string, std::string>> kinds{
      {"virial_zak", "I_zak"},          {"virial_zak", "local_mass_zak"},
      {"virial_kgz", "I_kgz"},          {"virial_kgz", "local_energy_kgz"},
      {"virial_zak_far", "K_mass"},     {"virial_zak_far", "J_energy_zak"},
      {"virial_kgz_far", "J_energy_kgz"}, {"virial_nls_far", "K_mass"}};
  for (const auto& [run, kind] : kinds) {
    const Report& r = v.at(run).report;
    const double rel = r.number(kind + "_residual_rel");
    const double scale = r.number(kind + "_rhs_scale");
    const double ratio = r.number(kind + "_spacing_ratio");
    c.require(scale > 1e-3, run + " " + kind + " rhs does not vanish");
    c.require(rel < 1e-6, run + " " + kind + " relative residual " + fmt(rel));
    c.require(std::abs(ratio - 4.0) < 0.5, run + " " + kind + " spacing ratio " + fmt(ratio));
    c.note(kind + "(" + run.substr(7) + ") " + fmt(rel) + " x" + fmt(ratio));
  }
  for (const char* run : {"virial_zak_stationary", "virial_kgz_stationary"}) {
    const Report& r = v.at(run).report;
    double worst = 0.0;
    for (const auto& [k, val] : r.numbers)
      if (k.ends_with("_residual_abs") || k.ends_with("_rhs_scale")) {
        worst = std::max(worst, val);
        c.require(val < 1e-8, std::string(run) + " " + k + " " + fmt(val));
      }
    c.note(std::string(run) + " max " + fmt(worst));
  }
  c.require(seconds < 300, "runtime");
  c.note(fmt(seconds) + "s");
  return c;
}

Criterion coercivity_criterion(const Timed& t) {
  Criterion c;
  const Report& r = t.report;
  c.require(load("coercivity").samples >= 10000, "sample count");
  c.require(r.flag("coercive"), "coercive");
  c.require(r.flag("c0_in_unit_interval"), "c0 in (0,1)");
  c.require(r.has_flag("c0_stable") && r.flag("c0_stable"), "c0 stable");
  c.require(t.seconds < 60, "runtime");
  c.note("seeds " + std::to_string(r.table("coercivity").size()) + ", margin " +
         fmt(r.number("min_margin_ratio")) + ", c0 " + fmt(r.number("c0")) + ", spread " +
         fmt(r.number("c0_spread")) + ", " + fmt(t.seconds) + "s");
  return c;
}

Criterion gn_criterion() {
  Criterion c;
  const Grid g(40.0, 1024);
  const auto q = gn_quartic_check(nls_soliton(0.0, g).u, g);
  const double gap = std::abs(q.lhs / q.rhs - 1.0);
  c.require(gap < 1e-10, "equality at Q: " + fmt(gap));
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd;
  int strict = 0;
  double closest = 0.0;
  const int fields = 1000;
  for (int s = 0; s < fields; ++s) {
    ComplexField u(g.size());
    const int bumps = 1 + s % 6;
    for (int m = 0; m < bumps; ++m) {
      const Complex a(nd(rng), nd(rng));
      const double x0 = 5 * nd(rng), w = 0.3 + std::abs(nd(rng)), k = nd(rng);
      for (int j = 0; j < g.size(); ++j) {
        const double y = (g.node(j) - x0) / w;
        u[j] += a * std::exp(-y * y) * std::polar(1.0, k * g.node(j));
      }
    }
    const auto r = gn_quartic_check(u, g);
    if (r.lhs < r.rhs) ++strict;
    closest = std::max(closest, r.lhs / r.rhs);
  }
  c.require(strict == fields, std::to_string(fields - strict) + " random fields not strict");
  c.note("|lhs/rhs-1| at Q " + fmt(gap) + "; " + std::to_string(strict) + "/" +
         std::to_string(fields) + " strict, max ratio " + fmt(closest));
  return c;
}

Criterion e4_criterion(const Report& zak, const Report& kgz) {
  Criterion c;
  int records = 0;
  for (const Report* r : {&zak, &kgz}) {
    c.require(r->hypothesis_ok, r->name + " is not hypothesis-compliant");
    const TimeSeries& ts = r->table("series");
    const bool is_kgz = ts.has("kgz_bound");
    const auto lhs = ts.column(is_kgz ? "kgz_bound_lhs" : "e4_lhs");
    const auto bound = ts.column(is_kgz ? "kgz_bound" : "e4_bound");
    double worst = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      c.require(lhs[i] <= bound[i], r->name + " record " + std::to_string(i));
      worst = std::max(worst, lhs[i] / bound[i]);
    }
    records += static_cast<int>(lhs.size());
    c.note(r->name + " max lhs/bound " + fmt(worst));
  }
  c.note(std::to_string(records) + " records");
  return c;
}

Criterion decay_criterion(const Timed& zak, const Timed& kgz, const Timed& control) {
  Criterion c;
  for (const Timed* t : {&zak, &kgz}) {
    const Report& r = t->report;
    c.require(r.hypothesis_ok, r.name + " hypotheses");
    std::string ratios;
    for (const auto& [k, v] : r.flags)
      if (k.rfind("decay_", 0) == 0) {
        c.require(v, r.name + " " + k);
        ratios += " " + k.substr(6) + "=" + fmt(r.number("ratio_" + k.substr(6)));
      }
    c.note(r.name + ratios);
  }
  const Report& ctl = control.report;
  c.require(ctl.flag("no_decay_flag"), "control raised a decay flag");
  c.note("control no_decay_flag=" + std::to_string(ctl.flag("no_decay_flag")));
  const double total = zak.seconds + kgz.seconds + control.seconds;
  c.require(total < 600, "runtime");
  c.note(fmt(total) + "s");
  return c;
}

Criterion farfield_criterion(const Timed& zak, const Timed& kgz, const Timed& nls) {
  Criterion c;
  for (const Timed* t : {&zak, &kgz, &nls}) {
    const Report& r = t->report;
    c.require(r.has_flag("farfield_u_l2") && r.flag("farfield_u_l2"), r.name + " u L2");
    c.require(r.flag("region_geometry"), r.name + " region geometry");
    c.note(r.name + " u_l2_R/u0 " + fmt(r.number("u_l2_R_final") / r.number("u0_l2")));
  }
  for (const char* f : {"farfield_u_h1", "farfield_n_l2", "farfield_v_l2"})
    c.require(zak.report.flag(f), std::string("zakharov ") + f);
  c.note("zakharov h2 growth " + fmt(zak.report.number("h2_growth")));
  const double total = zak.seconds + kgz.seconds + nls.seconds;
  c.require(total < 900, "runtime");
  c.note(fmt(total) + "s");
  return c;
}

Criterion integral_criterion(const Report& zak, const Report& kgz) {
  Criterion c;
  for (const Report* r : {&zak, &kgz}) {
    c.require(r->flag("integral_nondecreasing"), r->name + " nondecreasing");
    c.require(r->flag("increments_shrinking"), r->name + " increments");
    c.note(r->name + " [0,T] " + fmt(r->number("integral_first_half")) + " [T,2T] " +
           fmt(r->number("integral_second_half")));
  }
  return c;
}

Criterion determinism_criterion() {
  Criterion c;
  const fs::path root = fs::temp_directory_path() / "zvl_acceptance_determinism";
  fs::remove_all(root);
  for (const char* name : {"audit_zak", "virial_zak", "coercivity"}) {
    ExperimentConfig cfg = load(name);
    if (cfg.scenario == Scenario::coercivity) cfg.samples = 1000;
    const bool virial = std::string(name).rfind("virial", 0) == 0;
    for (const char* pass : {"a", "b"}) {
      const Report r = virial ? run_virial_check(cfg) : run_experiment(cfg);
      const auto now = std::chrono::system_clock::now();
      write_run(r, cfg, root / pass / name, now, now);
    }
    int files = 0;
    for (const auto& e : fs::directory_iterator(root / "a" / name)) {
      const std::string fn = e.path().filename().string();
      if (fn == "timing.json") continue;
      const fs::path other = root / "b" / name / fn;
      c.require(fs::exists(other) && read_file(e.path()) == read_file(other),
                std::string(name) + "/" + fn + " differs");
      ++files;
    }
    c.require(check_manifest(root / "a" / name / "manifest.json").digests_ok,
              std::string(name) + " manifest digests");
    c.note(std::string(name) + " " + std::to_string(files) + " files identical");
  }
  fs::remove_all(root);
  return c;
}

}  // namespace

int main() {
  int failed = 0;
  auto emit = [&](int id, const char* title, const std::function<Criterion()>& f) {
    Criterion c;
    try {
      c = f();
    } catch (const std::exception& e) {
      c.require(false, e.what());
    }
    if (!c.ok()) ++failed;
    std::cout << (c.ok() ? "PASS " : "FAIL ") << id << " " << title << ": " << c.text()
              << std::endl;
  };

  std::map<std::string, Timed> runs;
  auto get = [&](const std::string& name) -> const Timed& {
    auto it = runs.find(name);
    if (it == runs.end()) it = runs.emplace(name, run(name)).first;
    return it->second;
  };

  emit(1, "exact-solution oracles", [&] { return solitons(get("soliton_wu"), get("soliton_chen")); });
  emit(2, "sign-correction oracle", sign_oracle);
  emit(3, "conservation", [&] {
    std::vector<const Report*> traj;
    for (const char* n : {"soliton_wu", "soliton_chen", "compact_decay_zak", "compact_decay_kgz",
                          "control_wu", "farfield_zak", "farfield_kgz", "farfield_nls"})
      traj.push_back(&get(n).report);
    std::vector<Report> audits;
    for (const char* n : {"audit_zak", "audit_kgz", "audit_nls"}) audits.push_back(get(n).report);
    return conservation_criterion(traj, audits);
  });
  emit(4, "virial identities", [&] {
    std::map<std::string, Timed> v;
    const auto t0 = Clock::now();
    for (const char* n : {"virial_zak", "virial_kgz", "virial_zak_far", "virial_kgz_far",
                          "virial_nls_far", "virial_zak_stationary", "virial_kgz_stationary"})
      v.emplace(n, run_virial(n));
    return virial_criterion(v, seconds_since(t0));
  });
  emit(5, "coercivity", [&] { return coercivity_criterion(get("coercivity")); });
  emit(6, "Gagliardo-Nirenberg", gn_criterion);
  emit(7, "energy-norm bound", [&] {
    return e4_criterion(get("compact_decay_zak").report, get("compact_decay_kgz").report);
  });
  emit(8, "compact-interval decay", [&] {
    return decay_criterion(get("compact_decay_zak"), get("compact_decay_kgz"), get("control_wu"));
  });
  emit(9, "far-field decay", [&] {
    return farfield_criterion(get("farfield_zak"), get("farfield_kgz"), get("farfield_nls"));
  });
  emit(10, "running integrals", [&] {
    return integral_criterion(get("compact_decay_zak").report, get("compact_decay_kgz").report);
  });
  emit(11, "determinism", determinism_criterion);
  return failed == 0 ? 0 : 1;
}
