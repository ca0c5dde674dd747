// Copyright 2026 The crossrate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// crossrate: command-line front end. See README.md for the subcommands and
// the file formats.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "crossrate/crossrate.hpp"

namespace fs = std::filesystem;
using namespace crossrate;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerics = 3;
constexpr int kExitIo = 4;

struct CommonOptions {
  std::string config_path;
  std::string preset_name;
  std::string out_dir = ".";
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> n_traj;
  bool terminate_on_entry = false;
};

void add_common(CLI::App* sub, CommonOptions& o) {
  auto* cfg = sub->add_option("-c,--config", o.config_path,
                              "scenario JSON (or a manifest.json from an earlier run)");
  auto* pre = sub->add_option("-p,--preset", o.preset_name, "built-in scenario: front, front-right");
  cfg->excludes(pre);
  sub->add_option("-o,--out", o.out_dir, "output directory")->capture_default_str();
  sub->add_option("-j,--threads", o.threads, "worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--seed", o.seed, "RNG seed (overrides config and CROSSRATE_SEED)");
  sub->add_option("--n-traj", o.n_traj, "number of Monte-Carlo trajectories");
  sub->add_flag("--terminate-on-entry", o.terminate_on_entry,
                "stop each trajectory at its first entry");
}

std::uint64_t parse_env_seed(const char* text) {
  const std::string s(text);
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("$CROSSRATE_SEED", "expected a non-negative integer");
  }
  return v;
}

ScenarioConfig load_config(const CommonOptions& o) {
  ParsedConfig pc;
  if (!o.config_path.empty()) {
    pc = parse_config_text(read_text_file(o.config_path));
  } else if (!o.preset_name.empty()) {
    Json j;
    j["preset"] = o.preset_name;
    pc = parse_config(j);
  } else {
    throw ConfigError("/", "one of --config or --preset is required");
  }
  ScenarioConfig& c = pc.config;
  if (o.n_traj) c.n_traj = *o.n_traj;
  if (o.terminate_on_entry) c.terminate_on_entry = true;
  if (o.seed) {
    c.seed = *o.seed;
  } else if (!pc.seed_given) {
    if (const char* env = std::getenv("CROSSRATE_SEED")) c.seed = parse_env_seed(env);
  }
  c.validate();
  return c;
}

/// Collects outputs of one invocation and writes them with the manifest.
class Run {
 public:
  Run(std::string command, const CommonOptions& o, const ScenarioConfig& c)
      : start_(std::chrono::steady_clock::now()), dir_(o.out_dir) {
    manifest_.command = std::move(command);
    manifest_.config = to_json(c);
    manifest_.seed = c.seed;
    manifest_.threads = o.threads;
    manifest_.options = Json::object();
  }

  Json& options() { return manifest_.options; }
  Json& extra() { return manifest_.extra; }

  void csv(const std::string& name, const CsvTable& table) {
    write_text_file(dir_ / name, table.render(kManifestName));
    manifest_.outputs.push_back(name);
  }

  void json(const std::string& name, Json doc) {
    doc["manifest"] = kManifestName;
    write_text_file(dir_ / name, render_json(doc));
    manifest_.outputs.push_back(name);
  }

  void finish() {
    manifest_.duration_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_text_file(dir_ / kManifestName, render_json(manifest_.to_json()));
  }

 private:
  std::chrono::steady_clock::time_point start_;
  fs::path dir_;
  RunManifest manifest_;
};

const char* side_name(int i) { return to_string(kAllSegments[i]).data(); }

Json segment_counts(const std::array<std::int64_t, 4>& v) {
  Json j;
  for (int s = 0; s < 4; ++s) j[side_name(s)] = v[s];
  return j;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const CommonOptions& o) {
  const ScenarioConfig c = load_config(o);
  Run run("simulate", o, c);
  const CampaignResult r = run_campaign(c, o.threads);
  const RateHistogram& h = r.histogram;

  std::vector<std::string> cols = {"bin_start_s", "bin_mid_s", "first_entry_rate_total"};
  for (int s = 0; s < 4; ++s) cols.push_back(std::string("first_entry_rate_") + side_name(s));
  cols.push_back("all_entry_rate_total");
  for (int s = 0; s < 4; ++s) cols.push_back(std::string("all_entry_rate_") + side_name(s));
  cols.push_back("integrated_probability");
  CsvTable table(cols);
  const std::vector<std::int64_t> all = h.all_total();
  for (std::size_t i = 0; i < h.n_bins(); ++i) {
    auto& row = table.row();
    row.num(h.bin_start(i)).num(h.bin_mid(i)).num(h.rate(h.first_total[i]));
    for (int s = 0; s < 4; ++s) row.num(h.rate(h.first_by_segment[s][i]));
    row.num(h.rate(all[i]));
    for (int s = 0; s < 4; ++s) row.num(h.rate(h.all_by_segment[s][i]));
    row.num(r.integrated_probability[i]);
  }
  run.csv("simulate_rate.csv", table);

  const EntryStatistics& st = r.stats;
  Json stats;
  stats["n_traj"] = st.n_traj;
  stats["seed"] = c.seed;
  stats["horizon_s"] = c.horizon;
  Json mult = Json::array();
  for (std::size_t k = 0; k < st.multiplicity.size(); ++k) {
    mult.push_back({{"entries", k},
                    {"count", st.count(k)},
                    {"relative_frequency", st.probability(k)}});
  }
  stats["multiplicity"] = mult;
  stats["at_least_one"] = st.at_least_one();
  stats["p_at_least_one"] = st.p_at_least_one();
  stats["two_given_at_least_one"] =
      st.at_least_one() > 0
          ? static_cast<double>(st.count(2)) / static_cast<double>(st.at_least_one())
          : 0.0;
  stats["first_entries_by_segment"] = segment_counts(st.first_entries_by_segment);
  stats["all_entries_by_segment"] = segment_counts(st.all_entries_by_segment);
  stats["segment_first_entries"] = segment_counts(st.segment_first_entries);
  stats["integrated_probability"] =
      r.integrated_probability.empty() ? 0.0 : r.integrated_probability.back();
  run.json("simulate_stats.json", stats);
  run.finish();
  return kExitOk;
}

// --------------------------------------------------------------- intensity

struct SamplingOptions {
  std::string method = "quadrature";
  bool adaptive = false;
  double dt = 0.05;
  double dt1 = 0.5;
  double dt2 = 0.2;
  double rate_floor = 0.01;
};

void add_sampling(CLI::App* sub, SamplingOptions& s) {
  sub->add_option("-m,--method", s.method, "quadrature, taylor0, taylor1_inv, taylor1_cov")
      ->capture_default_str();
  sub->add_flag("--adaptive", s.adaptive, "sparse sampling seeded by deterministic TTCs");
  sub->add_option("--dt", s.dt, "dense grid step (s)")->capture_default_str();
  sub->add_option("--dt1", s.dt1, "adaptive march step (s)")->capture_default_str();
  sub->add_option("--dt2", s.dt2, "adaptive refinement step (s)")->capture_default_str();
  sub->add_option("--floor", s.rate_floor, "adaptive stop level (1/s)")->capture_default_str();
}

Json sampling_json(const SamplingOptions& s) {
  Json j;
  j["method"] = s.method;
  j["sampling"] = s.adaptive ? "adaptive" : "dense";
  if (s.adaptive) {
    j["dt1"] = s.dt1;
    j["dt2"] = s.dt2;
    j["floor"] = s.rate_floor;
  } else {
    j["dt"] = s.dt;
  }
  return j;
}

struct SampledCurve {
  RateCurve curve;
  int evaluations = 0;
  bool empty_warning = false;
};

SampledCurve sample_curve(const ScenarioPredictor& pred, const SamplingOptions& s,
                          IntensityMethod method, double t_start, double t_end) {
  auto eval = [&](double t) { return pred.intensity(t, method); };
  SampledCurve out;
  if (s.adaptive) {
    AdaptiveOptions opt;
    opt.dt1 = s.dt1;
    opt.dt2 = s.dt2;
    opt.rate_floor = s.rate_floor;
    opt.t_start = t_start;
    opt.t_end = t_end;
    const auto seeds = deterministic_ttc_seeds(pred.config().initial_mean, pred.config().rect);
    AdaptiveResult r = adaptive_sample(eval, seeds, opt);
    out.curve = std::move(r.curve);
    out.evaluations = r.evaluations;
    out.empty_warning = r.empty_warning;
  } else {
    out.curve = sample_grid(eval, t_start, t_end, s.dt);
    out.evaluations = static_cast<int>(out.curve.samples.size());
  }
  return out;
}

int cmd_intensity(const CommonOptions& o, const SamplingOptions& s, std::optional<double> horizon) {
  ScenarioConfig c = load_config(o);
  if (horizon) c.horizon = *horizon;
  c.validate();
  const IntensityMethod method = parse_method(s.method);
  Run run("intensity", o, c);
  run.options() = sampling_json(s);
  const ScenarioPredictor pred(c);
  const SampledCurve sc = sample_curve(pred, s, method, 0.0, c.horizon);
  if (s.adaptive) {
    run.extra()["evaluations_used"] = sc.evaluations;
    if (sc.empty_warning) {
      run.extra()["warning"] = "no positive intensity found at the start points";
      std::cerr << "warning: no positive intensity found at the start points\n";
    }
  }

  std::vector<std::string> cols = {"t_s", "mu_total"};
  for (int i = 0; i < 4; ++i) cols.push_back(std::string("mu_") + side_name(i));
  cols.push_back("method");
  const bool with_reference = method != IntensityMethod::quadrature;
  if (with_reference) {
    cols.push_back("mu_quadrature");
    cols.push_back("diff_vs_quadrature");
  }
  CsvTable table(cols);
  for (const RateSample& r : sc.curve.samples) {
    auto& row = table.row();
    row.num(r.t).num(r.mu_plus);
    for (double v : r.per_segment) row.num(v);
    row.text(std::string(to_string(method)));
    if (with_reference) {
      const double ref = pred.intensity(r.t, IntensityMethod::quadrature).mu_plus;
      row.num(ref).num(r.mu_plus - ref);
    }
  }
  run.csv("intensity.csv", table);
  run.finish();
  return kExitOk;
}

// ------------------------------------------------------------- probability

int cmd_probability(const CommonOptions& o, const SamplingOptions& s, double t1,
                    std::optional<double> t2_opt) {
  const ScenarioConfig c = load_config(o);
  const double t2 = t2_opt.value_or(c.horizon);
  if (!(t1 >= 0.0)) throw ArgumentError("--t1 must be >= 0");
  if (!(t1 <= t2)) throw ArgumentError("--t1 must not exceed --t2");
  const IntensityMethod method = parse_method(s.method);
  Run run("probability", o, c);
  run.options() = sampling_json(s);
  run.options()["t1"] = t1;
  run.options()["t2"] = t2;

  ProbabilityBound b{t1, t2, 0.0, 0};
  if (t2 > t1) {
    const ScenarioPredictor pred(c);
    const SampledCurve sc = sample_curve(pred, s, method, t1, t2);
    b = integrate_intensity(sc.curve, t1, t2,
                            s.adaptive ? OutsideSamples::zero : OutsideSamples::reject);
    b.evaluations_used = sc.evaluations;
  }
  if (s.adaptive) run.extra()["evaluations_used"] = b.evaluations_used;
  Json doc = sampling_json(s);
  doc["t1"] = b.t1;
  doc["t2"] = b.t2;
  doc["p_upper"] = b.p_upper;
  doc["p_upper_capped"] = b.capped();
  doc["evaluations_used"] = b.evaluations_used;
  run.json("probability.json", doc);
  run.finish();
  return kExitOk;
}

// --------------------------------------------------------------------- ttc

int cmd_ttc(const CommonOptions& o) {
  const ScenarioConfig c = load_config(o);
  Run run("ttc", o, c);
  const TtcHistogram h = ttc_monte_carlo(c, o.threads);
  const ScenarioPredictor pred(c);
  std::vector<std::string> cols = {"t_s", "ttc_rate_front", "ttc_rate_right", "ttc_rate_left",
                                   "ttc_rate_total", "mu_total"};
  for (int i = 0; i < 4; ++i) cols.push_back(std::string("mu_") + side_name(i));
  CsvTable table(cols);
  for (std::size_t i = 0; i < h.n_bins(); ++i) {
    const double t = h.bin_mid(i);
    const RateSample mu = pred.intensity(t, IntensityMethod::quadrature);
    auto& row = table.row();
    row.num(t);
    for (SegmentId id : {SegmentId::front, SegmentId::right, SegmentId::left}) {
      row.num(h.rate(h.by_segment[index_of(id)][i]));
    }
    row.num(h.rate(h.total(i))).num(mu.mu_plus);
    for (double v : mu.per_segment) row.num(v);
  }
  run.csv("ttc.csv", table);

  Json seeds = Json::array();
  for (const TtcSeed& s : deterministic_ttc_seeds(c.initial_mean, c.rect)) {
    seeds.push_back({{"segment", to_string(s.segment)}, {"time_s", s.time}});
  }
  Json doc;
  doc["seeds"] = seeds;
  run.json("ttc_seeds.json", doc);
  run.finish();
  return kExitOk;
}

// ----------------------------------------------------------------- salient

struct NamedOffset {
  std::string name;
  SalientOffset offset;
};

struct SalientOptions {
  double length = 4.5;
  double width = 1.8;
  double rear_overhang = 1.0;
  std::vector<std::string> offsets;  // name:dx,dy
  bool mc = false;
  double dt = 0.05;
};

std::vector<NamedOffset> salient_points(const SalientOptions& s) {
  std::vector<NamedOffset> pts;
  if (!s.offsets.empty()) {
    for (const std::string& arg : s.offsets) {
      const auto colon = arg.find(':');
      const auto comma = arg.find(',', colon == std::string::npos ? 0 : colon);
      if (colon == std::string::npos || comma == std::string::npos || colon == 0) {
        throw ArgumentError("--offset expects name:dx,dy, got '" + arg + "'");
      }
      NamedOffset p;
      p.name = arg.substr(0, colon);
      try {
        p.offset.dx_body = std::stod(arg.substr(colon + 1, comma - colon - 1));
        p.offset.dy_body = std::stod(arg.substr(comma + 1));
      } catch (const std::exception&) {
        throw ArgumentError("--offset expects name:dx,dy, got '" + arg + "'");
      }
      pts.push_back(p);
    }
    return pts;
  }
  if (!(s.length > 0.0) || !(s.width > 0.0)) {
    throw ArgumentError("--length and --width must be > 0");
  }
  // Reference point on the rear axle; y grows to the right.
  const double front = s.length - s.rear_overhang;
  const double rear = -s.rear_overhang;
  const double half = 0.5 * s.width;
  pts.push_back({"front_left", {front, -half}});
  pts.push_back({"front_right", {front, half}});
  pts.push_back({"rear_left", {rear, -half}});
  pts.push_back({"rear_right", {rear, half}});
  return pts;
}

int cmd_salient(const CommonOptions& o, const SalientOptions& s) {
  const ScenarioConfig base = load_config(o);
  const std::vector<NamedOffset> pts = salient_points(s);
  Run run("salient", o, base);
  run.options()["dt"] = s.dt;
  run.options()["mc"] = s.mc;
  Json offs = Json::array();
  for (const NamedOffset& p : pts) {
    offs.push_back({{"name", p.name}, {"dx_body", p.offset.dx_body}, {"dy_body", p.offset.dy_body}});
  }
  run.options()["offsets"] = offs;

  for (const NamedOffset& p : pts) {
    ScenarioConfig c = base;
    c.salient = p.offset;
    const ScenarioPredictor pred(c);
    std::vector<std::string> cols = {"t_s"};
    for (IntensityMethod m : kAllMethods) cols.push_back("mu_" + std::string(to_string(m)));
    std::optional<CampaignResult> mc;
    std::vector<double> ts;
    if (s.mc) {
      mc = run_campaign(c, o.threads);
      cols.push_back("mc_first_entry_rate");
      cols.push_back("mc_all_entry_rate");
      for (std::size_t i = 0; i < mc->histogram.n_bins(); ++i) ts.push_back(mc->histogram.bin_mid(i));
    } else {
      ts = uniform_grid(0.0, c.horizon, s.dt);
    }
    CsvTable table(cols);
    std::vector<std::int64_t> all;
    if (mc) all = mc->histogram.all_total();
    for (std::size_t i = 0; i < ts.size(); ++i) {
      auto& row = table.row();
      row.num(ts[i]);
      for (IntensityMethod m : kAllMethods) row.num(pred.intensity(ts[i], m).mu_plus);
      if (mc) row.num(mc->histogram.rate(mc->histogram.first_total[i])).num(mc->histogram.rate(all[i]));
    }
    run.csv("salient_" + p.name + ".csv", table);
  }
  run.finish();
  return kExitOk;
}

// ----------------------------------------------------------------- compare

std::optional<double> peak_time(const std::vector<double>& ts, const std::vector<double>& v) {
  std::optional<double> t;
  double best = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > best) {
      best = v[i];
      t = ts[i];
    }
  }
  return t;
}

int cmd_compare(const CommonOptions& o) {
  const ScenarioConfig c = load_config(o);
  Run run("compare", o, c);
  const CampaignResult mc = run_campaign(c, o.threads);
  const TtcHistogram ttc = ttc_monte_carlo(c, o.threads);
  const ScenarioPredictor pred(c);
  const RateHistogram& h = mc.histogram;
  const std::vector<std::int64_t> all = h.all_total();

  std::vector<std::string> names = {"mc_first_entry_rate", "mc_all_entry_rate",
                                    "mc_integrated_probability"};
  for (IntensityMethod m : kAllMethods) names.push_back("mu_" + std::string(to_string(m)));
  names.insert(names.end(), {"spatial_overlap", "ttc_rate_front", "ttc_rate_right",
                             "ttc_rate_left", "ttc_rate_total"});
  std::vector<std::vector<double>> cols(names.size());
  std::vector<double> ts;
  for (std::size_t i = 0; i < h.n_bins(); ++i) {
    const double t = h.bin_mid(i);
    ts.push_back(t);
    std::size_t k = 0;
    cols[k++].push_back(h.rate(h.first_total[i]));
    cols[k++].push_back(h.rate(all[i]));
    cols[k++].push_back(mc.integrated_probability[i]);
    for (IntensityMethod m : kAllMethods) cols[k++].push_back(pred.intensity(t, m).mu_plus);
    const GaussianDensity g = c.salient ? pred.salient_at(t, *c.salient) : pred.at(t);
    cols[k++].push_back(spatial_overlap_probability(g, c.rect));
    for (SegmentId id : {SegmentId::front, SegmentId::right, SegmentId::left}) {
      cols[k++].push_back(ttc.rate(ttc.by_segment[index_of(id)][i]));
    }
    cols[k++].push_back(ttc.rate(ttc.total(i)));
  }
  std::vector<std::string> header = {"t_s"};
  header.insert(header.end(), names.begin(), names.end());
  CsvTable table(header);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    auto& row = table.row();
    row.num(ts[i]);
    for (const auto& col : cols) row.num(col[i]);
  }
  run.csv("compare.csv", table);

  Json peaks;
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (names[k] == "mc_integrated_probability") continue;
    const auto t = peak_time(ts, cols[k]);
    peaks[names[k]] = t ? Json(*t) : Json(nullptr);
  }
  Json seeds = Json::array();
  for (const TtcSeed& s : deterministic_ttc_seeds(c.initial_mean, c.rect)) {
    seeds.push_back({{"segment", to_string(s.segment)}, {"time_s", s.time}});
  }
  Json doc;
  doc["peak_time_s"] = peaks;
  doc["deterministic_ttc"] = seeds;
  run.json("compare_summary.json", doc);
  run.finish();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crossrate: collision probability rates for a rectangular host boundary"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  CommonOptions common;
  SamplingOptions sampling;
  SalientOptions salient;
  std::optional<double> horizon;
  double t1 = 0.0;
  std::optional<double> t2;

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo entry-rate histogram and entry statistics");
  add_common(sim, common);

  auto* inten = app.add_subcommand("intensity", "entry intensity curve");
  add_common(inten, common);
  add_sampling(inten, sampling);
  inten->add_option("--horizon", horizon, "curve end time (s), default from config");

  auto* prob = app.add_subcommand("probability", "upper bound on the collision probability");
  add_common(prob, common);
  add_sampling(prob, sampling);
  prob->add_option("--t1", t1, "interval start (s)")->capture_default_str();
  prob->add_option("--t2", t2, "interval end (s), default the horizon");

  auto* ttc = app.add_subcommand("ttc", "initial-condition TTC histogram and deterministic TTCs");
  add_common(ttc, common);

  auto* sal = app.add_subcommand("salient", "entry intensities of body-fixed points");
  add_common(sal, common);
  sal->add_option("--length", salient.length, "body length (m)")->capture_default_str();
  sal->add_option("--width", salient.width, "body width (m)")->capture_default_str();
  sal->add_option("--rear-overhang", salient.rear_overhang,
                  "distance from reference point to rear bumper (m)")
      ->capture_default_str();
  sal->add_option("--offset", salient.offsets, "custom point name:dx,dy (body frame, m)");
  sal->add_flag("--mc", salient.mc, "add Monte-Carlo columns (grid = histogram bin centres)");
  sal->add_option("--dt", salient.dt, "grid step without --mc (s)")->capture_default_str();

  auto* cmp = app.add_subcommand("compare", "MC rate, intensities, spatial overlap and TTC on one grid");
  add_common(cmp, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*sim) return cmd_simulate(common);
    if (*inten) return cmd_intensity(common, sampling, horizon);
    if (*prob) return cmd_probability(common, sampling, t1, t2);
    if (*ttc) return cmd_ttc(common);
    if (*sal) return cmd_salient(common, salient);
    if (*cmp) return cmd_compare(common);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerics;
  } catch (const DomainError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerics;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
