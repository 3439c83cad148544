#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "anderson/parallel.hpp"
#include "anderson/studies.hpp"

using namespace anderson;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kVersion = "1.0.0";

const char* kColumns = R"(Output tables (CSV, one header line):
  renorm          renorm.csv, renorm_control.csv: seed,eps,eps_next,xi_diff,xi2_diff
                    (consecutive ladder differences of xi and Xi2 in the alpha / 2 alpha + 2
                    Besov norms; the control uses no renormalization)
                  renorm_center.csv: eps,log_inv_eps,c_center,stderr,method
  resolvent       resolvent.csv: seed,probe,eps,resolvent_diff,sqrt_diff
                    (||A_eps^{-1} g - A^{-1} g||_{H^gamma}, ||(-A_eps)^{-1/2} g - (-A)^{-1/2} g||)
  nls             nls.csv: seed,eps,eps_next,dist,dist_weighted (sup over t of L^2 and <x>^delta L^2)
                  nls_runs.csv: seed,eps,mass_drift,energy_drift
  nlw             nlw.csv: seed,eps,eps_next,dist,dist_weighted
                  nlw_initial.csv: seed,eps,sqrt_dist,energy_gap,energy_drift
  inequalities    inequalities.csv: seed,lp4,lp6,lp8,sup,brezis_gallouet,h2_over_Au,Au_over_h2,h1_over_D,D_over_h1
  faris-lavine    faris_lavine.csv: seed,c,c_prime,max_q,worst_bound_gap,bound_holds
Every run also writes manifest.json (configuration echo, versions, wall clock, summary).
Exit status: 0 finished, 2 invalid configuration, 3 numerical abort (ledger dumped), 4 other failure.)";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string study = "renorm";
  double L = 8.0;
  int M = 64;
  double eps2 = 1.0;
  std::vector<double> ladder = dyadic_ladder(6);
  std::vector<std::uint64_t> seeds = {0};
  long mc_samples = 100;
  double eps0 = 0.0;
  int probes = 10;
  double dt = 1e-4;
  double T = 1.0;
  double R = 1.5;
  int power = 2;
  double delta = 0.25;
  std::string out = "out";
  int threads = 1;

  json to_json() const {
    return json{{"study", study},
                {"grid", {{"L", L}, {"M", M}}},
                {"noise", {{"eps2", eps2}, {"ladder", ladder}, {"seeds", seeds}, {"mc_samples", mc_samples}}},
                {"operator", {{"eps0", eps0}, {"probes", probes}}},
                {"solver", {{"dt", dt}, {"T", T}, {"R", R}, {"power", power}, {"delta", delta}}},
                {"out", out},
                {"threads", threads}};
  }
};

// 1-based line of the first occurrence of "key" in the config text
int line_of(const std::string& text, const std::string& key) {
  auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 1;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

class ConfigReader {
 public:
  ConfigReader(std::string path, std::string text) : path_(std::move(path)), text_(std::move(text)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(path_ + ":" + std::to_string(line_of(text_, key)) + ": " + msg);
  }

  void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(where, "'" + where + "' must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) fail(it.key(), "unknown key '" + it.key() + "' in " + where);
  }

  template <class T>
  void get(const json& obj, const std::string& key, T& dst) const {
    if (!obj.contains(key)) return;
    try {
      dst = obj.at(key).get<T>();
    } catch (const json::exception&) {
      fail(key, "wrong type for '" + key + "'");
    }
  }

 private:
  std::string path_, text_;
};

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ":1: cannot open configuration file");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(std::min(e.byte, text.size())), '\n'));
    throw ConfigError(path + ":" + std::to_string(line) + ": JSON syntax error: " + e.what());
  }
  ConfigReader r(path, text);
  RunConfig c;
  r.check_keys(j, "config", {"study", "grid", "noise", "operator", "solver", "out", "threads"});
  r.get(j, "study", c.study);
  r.get(j, "out", c.out);
  r.get(j, "threads", c.threads);
  if (j.contains("grid")) {
    r.check_keys(j["grid"], "grid", {"L", "M"});
    r.get(j["grid"], "L", c.L);
    r.get(j["grid"], "M", c.M);
  }
  if (j.contains("noise")) {
    r.check_keys(j["noise"], "noise", {"eps2", "ladder", "seeds", "mc_samples"});
    r.get(j["noise"], "eps2", c.eps2);
    r.get(j["noise"], "ladder", c.ladder);
    r.get(j["noise"], "seeds", c.seeds);
    r.get(j["noise"], "mc_samples", c.mc_samples);
  }
  if (j.contains("operator")) {
    r.check_keys(j["operator"], "operator", {"eps0", "probes"});
    r.get(j["operator"], "eps0", c.eps0);
    r.get(j["operator"], "probes", c.probes);
  }
  if (j.contains("solver")) {
    r.check_keys(j["solver"], "solver", {"dt", "T", "R", "power", "delta"});
    r.get(j["solver"], "dt", c.dt);
    r.get(j["solver"], "T", c.T);
    r.get(j["solver"], "R", c.R);
    r.get(j["solver"], "power", c.power);
    r.get(j["solver"], "delta", c.delta);
  }
  return c;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

// "50" means seeds 0..49; "3,7,11" lists them
std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  if (s.empty()) throw ConfigError("--seeds: empty seed list");
  std::vector<std::uint64_t> v;
  try {
    if (s.find(',') == std::string::npos) {
      long n = std::stol(s);
      if (n < 1) throw ConfigError("--seeds: need at least one seed");
      for (long i = 0; i < n; ++i) v.push_back(static_cast<std::uint64_t>(i));
    } else {
      for (const auto& t : split(s, ','))
        if (!t.empty()) v.push_back(std::stoull(t));
    }
  } catch (const std::logic_error&) {
    throw ConfigError("--seeds: expected a count or a comma-separated list, got '" + s + "'");
  }
  return v;
}

// "6" means 2^-1 .. 2^-6; "0.5,0.25,0.125" lists the entries
std::vector<double> parse_ladder(const std::string& s) {
  try {
    if (s.find(',') == std::string::npos) return dyadic_ladder(std::stoi(s));
    std::vector<double> v;
    for (const auto& t : split(s, ','))
      if (!t.empty()) v.push_back(std::stod(t));
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError("--ladder: expected a count or a comma-separated list, got '" + s + "'");
  }
}

void parse_grid(const std::string& s, RunConfig& c) {
  auto x = s.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument("no separator");
    c.L = std::stod(s.substr(0, x));
    c.M = std::stoi(s.substr(x + 1));
  } catch (const std::logic_error&) {
    throw ConfigError("--grid: expected LxM such as 16x256, got '" + s + "'");
  }
}

void validate(const RunConfig& c, const std::string& src) {
  static const std::set<std::string> studies = {"renorm", "resolvent", "nls", "nlw", "inequalities", "faris-lavine"};
  auto bad = [&](const std::string& key, const std::string& msg) {
    // config-sourced problems are anchored at the offending key
    if (!src.empty()) {
      std::ifstream in(src);
      std::stringstream ss;
      ss << in.rdbuf();
      throw ConfigError(src + ":" + std::to_string(line_of(ss.str(), key)) + ": " + msg);
    }
    throw ConfigError("--" + key + ": " + msg);
  };
  if (!studies.count(c.study)) bad("study", "unknown study '" + c.study + "'");
  if (!(c.L > 0.0)) bad("grid", "box length must be positive");
  if (c.M < 16 || c.M % 2 != 0) bad("grid", "M must be even and at least 16");
  if (!(c.eps2 > 0.0)) bad("eps2", "eps2 must be positive");
  if (c.seeds.empty()) bad("seeds", "empty seed list");
  std::set<std::uint64_t> uniq(c.seeds.begin(), c.seeds.end());
  if (uniq.size() != c.seeds.size()) bad("seeds", "seeds must be distinct");
  const std::size_t min_ladder = c.study == "renorm" ? 3 : 2;
  bool ladder_study = c.study != "inequalities" && c.study != "faris-lavine";
  if (ladder_study && c.ladder.size() < min_ladder)
    bad("ladder", "ladder needs at least " + std::to_string(min_ladder) + " entries");
  for (std::size_t i = 0; i < c.ladder.size(); ++i) {
    if (!(c.ladder[i] > 0.0)) bad("ladder", "ladder entries must be positive");
    if (i && !(c.ladder[i] < c.ladder[i - 1])) bad("ladder", "ladder must be sorted in descending order");
  }
  if (c.mc_samples < 2) bad("mc_samples", "mc_samples must be at least 2");
  if (c.eps0 < 0.0) bad("eps0", "eps0 must be nonnegative");
  if (c.probes < 1) bad("probes", "probes must be positive");
  if (!(c.dt > 0.0)) bad("dt", "dt must be positive");
  if (!(c.T > 0.0)) bad("T", "T must be positive");
  if (c.power < 2 || c.power % 2) bad("power", "power must be even and at least 2");
  if (c.study == "nlw" && !(c.R > 0.0 && c.R + c.T < c.L / 4)) bad("R", "NLW needs 0 < R and R + T < L/4");
  if (c.threads < 1) bad("threads", "threads must be positive");
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class Csv {
 public:
  Csv(const fs::path& p, const std::string& header) : f_(p), path_(p) {
    if (!f_) throw std::runtime_error("cannot write " + p.string());
    f_ << header << '\n';
  }
  template <class... A>
  void row(const A&... a) {
    std::string sep;
    ((f_ << sep << cell(a), sep = ","), ...);
    f_ << '\n';
  }
  std::string name() const { return path_.filename().string(); }

 private:
  static std::string cell(double v) { return num(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(std::uint64_t v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& v) { return v; }
  std::ofstream f_;
  fs::path path_;
};

struct Outcome {
  json summary = json::object();
  std::vector<std::string> files;
};

double fraction(int k, std::size_t n) { return n ? static_cast<double>(k) / static_cast<double>(n) : 0.0; }

Outcome run_renorm(const RunConfig& c, const fs::path& out) {
  GridSpec g(c.L, c.M);
  ParaEngine e(g);
  DecompositionParams params(c.eps2);
  std::vector<RenormFunction> ren, zero;
  for (double eps : c.ladder) {
    ren.push_back(renorm_for(eps, e, c.mc_samples, 0x5eedULL, c.threads, params));
    zero.push_back(zero_renorm(g, eps));
  }
  ConvergenceOptions opt;
  opt.params = params;
  opt.window = c.L / 4;
  std::vector<std::vector<ConvergenceRow>> a(c.seeds.size()), b(c.seeds.size());
  parallel_for(c.seeds.size(), c.threads, [&](std::size_t i) {
    a[i] = convergence_study(c.seeds[i], c.ladder, ren, e, opt);
    b[i] = convergence_study(c.seeds[i], c.ladder, zero, e, opt);
  });
  Outcome o;
  Csv ra(out / "renorm.csv", "seed,eps,eps_next,xi_diff,xi2_diff");
  Csv rb(out / "renorm_control.csv", "seed,eps,eps_next,xi_diff,xi2_diff");
  int dec = 0, ctrl_fail = 0;
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    for (const auto& r : a[i]) ra.row(r.seed, r.eps, r.eps_next, r.xi_diff, r.xi2_diff);
    for (const auto& r : b[i]) rb.row(r.seed, r.eps, r.eps_next, r.xi_diff, r.xi2_diff);
    dec += cauchy_decrease(a[i]);
    ctrl_fail += !cauchy_decrease(b[i]);
  }
  Csv rc(out / "renorm_center.csv", "eps,log_inv_eps,c_center,stderr,method");
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < c.ladder.size(); ++k) {
    double eps = c.ladder[k];
    double center = c.M <= 64 ? ren[k].at_center() : renorm_exact_point(eps, e, c.M / 2, c.M / 2, params, {}, false, c.threads);
    double se = ren[k].stderr_c.empty() ? 0.0 : ren[k].stderr_c.at(c.M / 2, c.M / 2).real();
    rc.row(eps, std::log(1.0 / eps), center, se, std::string("exact"));
    xs.push_back(std::log(1.0 / eps));
    ys.push_back(center);
  }
  double r2 = linear_fit_r2(xs, ys);
  o.files = {ra.name(), rb.name(), rc.name()};
  o.summary = {{"renormalized_decrease_fraction", fraction(dec, c.seeds.size())},
               {"control_fail_fraction", fraction(ctrl_fail, c.seeds.size())},
               {"center_log_fit_r2", r2},
               {"pass", fraction(dec, c.seeds.size()) >= 0.8 && fraction(ctrl_fail, c.seeds.size()) >= 0.8 && r2 >= 0.98}};
  return o;
}

std::vector<RenormFunction> ladder_renorms(const RunConfig& c, const ParaEngine& e) {
  std::vector<RenormFunction> r;
  for (double eps : c.ladder) r.push_back(renorm_for(eps, e, c.mc_samples, 0x5eedULL, c.threads, DecompositionParams(c.eps2)));
  return r;
}

Outcome run_resolvent(const RunConfig& c, const fs::path& out) {
  GridSpec g(c.L, c.M);
  auto e = std::make_shared<const ParaEngine>(g);
  auto ren = ladder_renorms(c, *e);
  auto lim = renorm_for(0.0, *e, c.mc_samples, 0x5eedULL, c.threads, DecompositionParams(c.eps2));
  std::vector<std::vector<NormResolventRow>> rows(c.seeds.size());
  parallel_for(c.seeds.size(), c.threads, [&](std::size_t i) {
    auto lc = build_ladder(sample_white_noise(g, c.seeds[i]), c.ladder, ren, &lim, e, {}, DecompositionParams(c.eps2));
    std::vector<Field> probes;
    for (int p = 0; p < c.probes; ++p) probes.push_back(weighted_probe(g, mix64(c.seeds[i] * 1000 + p), 3.0));
    rows[i] = norm_resolvent_study(probes, lc.pointers(), lc.limit_context());
  });
  Csv f(out / "resolvent.csv", "seed,probe,eps,resolvent_diff,sqrt_diff");
  int series = 0, dec_r = 0, dec_s = 0;
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    std::map<int, std::pair<std::vector<double>, std::vector<double>>> by_probe;
    for (const auto& r : rows[i]) {
      f.row(c.seeds[i], r.probe, r.eps, r.resolvent_diff, r.sqrt_diff);
      by_probe[r.probe].first.push_back(r.resolvent_diff);
      by_probe[r.probe].second.push_back(r.sqrt_diff);
    }
    for (const auto& [p, v] : by_probe) {
      ++series;
      dec_r += strictly_decreasing(v.first);
      dec_s += strictly_decreasing(v.second);
    }
  }
  Outcome o;
  o.files = {f.name()};
  o.summary = {{"resolvent_decrease_fraction", fraction(dec_r, series)},
               {"sqrt_decrease_fraction", fraction(dec_s, series)},
               {"pass", fraction(dec_r, series) >= 0.8}};
  return o;
}

SolverConfig solver_config(const RunConfig& c) {
  SolverConfig s;
  s.dt = c.dt;
  s.T = c.T;
  s.power = c.power;
  s.output_every = std::max(1, static_cast<int>(std::lround(0.05 / c.dt)));
  return s;
}

Outcome run_nls(const RunConfig& c, const fs::path& out) {
  GridSpec g(c.L, c.M);
  auto e = std::make_shared<const ParaEngine>(g);
  auto ren = ladder_renorms(c, *e);
  std::vector<NLSStudy> st(c.seeds.size());
  parallel_for(c.seeds.size(), c.threads, [&](std::size_t i) {
    auto lc = build_ladder(sample_white_noise(g, c.seeds[i]), c.ladder, ren, nullptr, e, {}, DecompositionParams(c.eps2));
    st[i] = nls_eps_study(weighted_probe(g, mix64(c.seeds[i]), 3.0, true), lc.pointers(), solver_config(c), c.delta);
  });
  Csv f(out / "nls.csv", "seed,eps,eps_next,dist,dist_weighted");
  Csv r(out / "nls_runs.csv", "seed,eps,mass_drift,energy_drift");
  int dec = 0, dec_w = 0;
  double max_mass = 0, max_energy = 0;
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    std::vector<double> d, dw;
    for (const auto& row : st[i].rows) {
      f.row(c.seeds[i], row.eps, row.eps_next, row.dist, row.dist_weighted);
      d.push_back(row.dist);
      dw.push_back(row.dist_weighted);
    }
    for (std::size_t k = 0; k < c.ladder.size(); ++k) {
      r.row(c.seeds[i], c.ladder[k], st[i].mass_drift[k], st[i].energy_drift[k]);
      max_mass = std::max(max_mass, st[i].mass_drift[k]);
      max_energy = std::max(max_energy, st[i].energy_drift[k] / c.T);
    }
    dec += strictly_decreasing(d);
    dec_w += strictly_decreasing(dw);
  }
  Outcome o;
  o.files = {f.name(), r.name()};
  o.summary = {{"decrease_fraction", fraction(dec, c.seeds.size())},
               {"weighted_decrease_fraction", fraction(dec_w, c.seeds.size())},
               {"max_mass_drift", max_mass},
               {"max_energy_drift_per_unit_time", max_energy},
               {"pass", fraction(dec, c.seeds.size()) >= 0.8 && max_mass <= 1e-8 && max_energy <= 1e-5}};
  return o;
}

Outcome run_nlw(const RunConfig& c, const fs::path& out) {
  GridSpec g(c.L, c.M);
  auto e = std::make_shared<const ParaEngine>(g);
  auto ren = ladder_renorms(c, *e);
  auto lim = renorm_for(0.0, *e, c.mc_samples, 0x5eedULL, c.threads, DecompositionParams(c.eps2));
  std::vector<NLWStudy> st(c.seeds.size());
  parallel_for(c.seeds.size(), c.threads, [&](std::size_t i) {
    auto lc = build_ladder(sample_white_noise(g, c.seeds[i]), c.ladder, ren, &lim, e, {}, DecompositionParams(c.eps2));
    st[i] = nlw_eps_study(weighted_probe(g, mix64(c.seeds[i] + 50), 3.0), weighted_probe(g, mix64(c.seeds[i] + 90), 3.0),
                          c.R, lc.pointers(), lc.limit_context(), solver_config(c), c.delta);
  });
  Csv f(out / "nlw.csv", "seed,eps,eps_next,dist,dist_weighted");
  Csv r(out / "nlw_initial.csv", "seed,eps,sqrt_dist,energy_gap,energy_drift");
  int dec = 0, dec_sqrt = 0, dec_energy = 0;
  double max_energy = 0;
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    std::vector<double> d;
    for (const auto& row : st[i].rows) {
      f.row(c.seeds[i], row.eps, row.eps_next, row.dist, row.dist_weighted);
      d.push_back(row.dist);
    }
    for (std::size_t k = 0; k < c.ladder.size(); ++k) {
      r.row(c.seeds[i], c.ladder[k], st[i].sqrt_dist[k], st[i].energy_gap[k], st[i].energy_drift[k]);
      max_energy = std::max(max_energy, st[i].energy_drift[k] / c.T);
    }
    dec += strictly_decreasing(d);
    dec_sqrt += strictly_decreasing(st[i].sqrt_dist);
    dec_energy += strictly_decreasing(st[i].energy_gap);
  }
  Outcome o;
  o.files = {f.name(), r.name()};
  o.summary = {{"decrease_fraction", fraction(dec, c.seeds.size())},
               {"initial_sqrt_decrease_fraction", fraction(dec_sqrt, c.seeds.size())},
               {"initial_energy_decrease_fraction", fraction(dec_energy, c.seeds.size())},
               {"max_energy_drift_per_unit_time", max_energy},
               {"pass", fraction(dec, c.seeds.size()) >= 0.8 && fraction(dec_sqrt, c.seeds.size()) >= 0.8 &&
                            fraction(dec_energy, c.seeds.size()) >= 0.8 && max_energy <= 1e-5}};
  return o;
}

OperatorContext single_context(const RunConfig& c, std::uint64_t seed, std::shared_ptr<const ParaEngine> e,
                               const RenormFunction& ren) {
  return make_context(build_enhanced(sample_white_noise(e->grid(), seed), c.eps0, ren, *e, DecompositionParams(c.eps2)), e);
}

Outcome run_inequalities(const RunConfig& c, const fs::path& out) {
  GridSpec g(c.L, c.M);
  auto e = std::make_shared<const ParaEngine>(g);
  auto ren = renorm_for(c.eps0, *e, c.mc_samples, 0x5eedULL, c.threads, DecompositionParams(c.eps2));
  std::vector<EmbeddingReport> rep(c.seeds.size());
  parallel_for(c.seeds.size(), c.threads, [&](std::size_t i) {
    rep[i] = embedding_checks(single_context(c, c.seeds[i], e, ren), c.probes, mix64(c.seeds[i] + 3));
  });
  Csv f(out / "inequalities.csv", "seed,lp4,lp6,lp8,sup,brezis_gallouet,h2_over_Au,Au_over_h2,h1_over_D,D_over_h1");
  bool finite = true;
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    const auto& r = rep[i];
    f.row(c.seeds[i], r.lp_ratio[0], r.lp_ratio[1], r.lp_ratio[2], r.sup_ratio, r.brezis_gallouet, r.h2_over_Au,
          r.Au_over_h2, r.h1_over_D, r.D_over_h1);
    for (double v : {r.lp_ratio[2], r.sup_ratio, r.brezis_gallouet, r.h2_over_Au, r.Au_over_h2, r.h1_over_D, r.D_over_h1})
      finite = finite && std::isfinite(v);
  }
  Outcome o;
  o.files = {f.name()};
  o.summary = {{"all_constants_finite", finite}, {"pass", finite}};
  return o;
}

Outcome run_faris_lavine(const RunConfig& c, const fs::path& out) {
  GridSpec g(c.L, c.M);
  auto e = std::make_shared<const ParaEngine>(g);
  auto ren = renorm_for(c.eps0, *e, c.mc_samples, 0x5eedULL, c.threads, DecompositionParams(c.eps2));
  std::vector<FarisLavineReport> rep(c.seeds.size());
  parallel_for(c.seeds.size(), c.threads, [&](std::size_t i) {
    rep[i] = faris_lavine_check(single_context(c, c.seeds[i], e, ren), 0.0, c.probes, mix64(c.seeds[i] + 5));
  });
  Csv f(out / "faris_lavine.csv", "seed,c,c_prime,max_q,worst_bound_gap,bound_holds");
  bool ok = true;
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    const auto& r = rep[i];
    f.row(c.seeds[i], r.c, r.c_prime, r.max_q, r.worst_bound_gap, r.bound_holds);
    ok = ok && r.bound_holds && std::isfinite(r.max_q);
  }
  Outcome o;
  o.files = {f.name()};
  o.summary = {{"bound_holds_all", ok}, {"pass", ok}};
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anderson Hamiltonian experiment runner"};
  app.footer(kColumns);
  std::string study, config, seeds, ladder, grid, out;
  int threads = 0;
  app.add_option("--study", study, "renorm | resolvent | nls | nlw | inequalities | faris-lavine");
  app.add_option("--config", config, "JSON configuration; flags override its fields");
  app.add_option("--seeds", seeds, "seed count N (seeds 0..N-1) or comma-separated list");
  app.add_option("--ladder", ladder, "ladder length N (2^-1..2^-N) or comma-separated eps values, descending");
  app.add_option("--grid", grid, "box and resolution as LxM, e.g. 16x256");
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "worker threads");
  CLI11_PARSE(app, argc, argv);

  RunConfig c;
  try {
    if (!config.empty()) c = load_config(config);
    if (app.count("--study")) c.study = study;
    if (app.count("--seeds")) c.seeds = parse_seeds(seeds);
    if (app.count("--ladder")) c.ladder = parse_ladder(ladder);
    if (app.count("--grid")) parse_grid(grid, c);
    if (app.count("--out")) c.out = out;
    if (app.count("--threads")) c.threads = threads;
    bool from_flags = app.count("--study") || app.count("--seeds") || app.count("--ladder") || app.count("--grid") ||
                      app.count("--threads");
    validate(c, from_flags ? std::string() : config);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  const fs::path dir(c.out);
  fs::create_directories(dir);
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    if (c.study == "renorm") o = run_renorm(c, dir);
    else if (c.study == "resolvent") o = run_resolvent(c, dir);
    else if (c.study == "nls") o = run_nls(c, dir);
    else if (c.study == "nlw") o = run_nlw(c, dir);
    else if (c.study == "inequalities") o = run_inequalities(c, dir);
    else o = run_faris_lavine(c, dir);
  } catch (const NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << '\n' << format_ledger(e.ledger());
    std::ofstream(dir / "abort_ledger.csv") << format_ledger(e.ledger());
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json versions;
  versions["runner"] = kVersion;
  versions["fftw"] = std::string(fftw_version);
  versions["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION);
  versions["compiler"] = std::string(__VERSION__);
  json manifest;
  manifest["config"] = c.to_json();
  manifest["versions"] = versions;
  manifest["wall_clock_seconds"] = wall;
  manifest["outputs"] = o.files;
  manifest["summary"] = o.summary;
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
  std::cout << c.study << ": " << (o.summary.value("pass", false) ? "PASS" : "FAIL") << ' ' << o.summary.dump() << '\n';
  return 0;
}
