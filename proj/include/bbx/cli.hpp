#pragma once

// `bbx run | replay | observability`. Exit codes: 0 success, 2 usage or
// configuration error, 3 runtime error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bbx/config.hpp"
#include "bbx/io.hpp"
#include "bbx/observability.hpp"
#include "bbx/scenarios.hpp"

namespace bbx::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Raised for anything the user can fix on the command line or in a config.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScenarioSource {
  std::string name;
  std::string file;
};

struct RunOptions {
  ScenarioSource source;
  std::vector<std::string> estimators;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::optional<double> dt;
  std::optional<double> duration;
  std::optional<double> sigma_tbar;
  std::optional<double> sigma_h;
  std::optional<double> sigma_bearing;
  std::optional<double> sigma_angle;
  std::string noise_mode;
  std::string depth;
  bool export_detections = false;
};

struct ReplayOptions {
  ScenarioSource source;
  std::string detections;
  std::string camera;
  std::vector<std::string> estimators;
  std::string out = ".";
  std::string depth;
};

struct ObservabilityOptions {
  ScenarioSource source;
  int order = 2;
  int window = 5;
  int spacing = 25;
  int stride = 50;
  bool no_attitude = false;
  std::string out;
};

inline Scenario load_scenario(const ScenarioSource& src, bool required) {
  if (!src.name.empty() && !src.file.empty()) throw ConfigError("--scenario and --scenario-file are exclusive");
  if (!src.file.empty()) {
    std::ifstream in(src.file);
    if (!in) throw ConfigError("cannot open scenario file " + src.file);
    try {
      return parse_scenario_config(in, src.file);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  if (!src.name.empty()) {
    auto sc = builtin_scenario(src.name);
    if (!sc) throw ConfigError("unknown scenario '" + src.name + "'");
    return *sc;
  }
  if (required) throw ConfigError("one of --scenario or --scenario-file is required");
  Scenario sc;
  sc.name = "replay";
  return sc;
}

inline std::vector<EstimatorKind> parse_estimators(const std::vector<std::string>& names,
                                                   const std::vector<EstimatorKind>& fallback) {
  if (names.empty()) return fallback;
  std::vector<EstimatorKind> out;
  for (const auto& n : names) {
    const auto k = parse_estimator(n);
    if (!k) throw ConfigError("unknown estimator '" + n + "'");
    out.push_back(*k);
  }
  return out;
}

inline std::uint64_t seed_from_env(std::uint64_t fallback) {
  const char* env = std::getenv("BBX_SEED");
  if (!env || !*env) return fallback;
  std::uint64_t v = 0;
  const std::string_view s(env);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("BBX_SEED is not an unsigned integer");
  return v;
}

inline DepthKind parse_depth(const std::string& s, DepthKind fallback) {
  if (s.empty()) return fallback;
  if (s == "optical_axis") return DepthKind::OpticalAxis;
  if (s == "range") return DepthKind::Range;
  throw ConfigError("--depth must be optical_axis or range");
}

inline std::filesystem::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw ConfigError("cannot create output directory " + dir);
  return dir;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw ConfigError("cannot write " + p.string());
  return f;
}

inline void write_outputs(const std::filesystem::path& dir, const std::vector<EstimateTrace>& traces) {
  std::vector<RunSummary> summaries;
  for (const auto& tr : traces) {
    auto f = open_out(dir / ("trace_" + tr.estimator + ".csv"));
    write_trace_csv(f, tr);
    summaries.push_back(summarize(tr));
  }
  auto s = open_out(dir / "summary.json");
  write_summary_json(s, summaries);
}

inline int cmd_run(const RunOptions& o, std::ostream& log) {
  Scenario sc = load_scenario(o.source, true);
  sc.seed = o.seed ? *o.seed : seed_from_env(sc.seed);
  if (o.dt) sc.dt = *o.dt;
  if (o.duration) sc.duration = *o.duration;
  if (o.sigma_tbar) sc.noise.sigma_tbar = *o.sigma_tbar;
  if (o.sigma_h) sc.noise.sigma_h = *o.sigma_h;
  if (o.sigma_bearing) sc.noise.sigma_bearing = *o.sigma_bearing;
  if (o.sigma_angle) sc.noise.sigma_angle = *o.sigma_angle;
  if (o.noise_mode == "A") sc.noise_mode = NoiseMode::A;
  else if (o.noise_mode == "B") sc.noise_mode = NoiseMode::B;
  else if (!o.noise_mode.empty()) throw ConfigError("--noise-mode must be A or B");
  sc.depth = parse_depth(o.depth, sc.depth);
  try {
    sc.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const auto kinds = parse_estimators(o.estimators, default_estimators(sc));
  const auto dir = prepare_out_dir(o.out);

  const ScenarioRun run = run_scenario(sc, kinds, o.export_detections);
  write_outputs(dir, run.traces);
  if (o.export_detections) {
    std::vector<DetectionLogRow> dets;
    std::vector<CameraLogRow> cams;
    for (const auto& f : run.frames) {
      cams.push_back(CameraLogRow{f.t, f.observer.translation, f.observer.rotation});
      if (f.observation.detected && f.noisy) dets.push_back(DetectionLogRow{f.t, *f.noisy});
    }
    auto d = open_out(dir / "detections.csv");
    write_detection_log(d, dets);
    auto c = open_out(dir / "camera.csv");
    write_camera_log(c, cams);
  }
  log << "wrote " << run.traces.size() << " trace(s) for " << sc.name << " (seed " << sc.seed << ") to "
      << dir.string() << '\n';
  return kExitOk;
}

inline int cmd_replay(const ReplayOptions& o, std::ostream& log) {
  const Scenario sc = load_scenario(o.source, false);
  const DepthKind depth = parse_depth(o.depth, sc.depth);
  std::ifstream din(o.detections);
  if (!din) throw ConfigError("cannot open " + o.detections);
  std::ifstream cam_in(o.camera);
  if (!cam_in) throw ConfigError("cannot open " + o.camera);
  std::vector<DetectionLogRow> dets;
  std::vector<CameraLogRow> cams;
  try {
    dets = read_detection_log(din, o.detections);
    cams = read_camera_log(cam_in, o.camera);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (cams.empty()) throw ConfigError(o.camera + ": no camera poses");
  const auto kinds = parse_estimators(o.estimators, {EstimatorKind::BearingBox});
  const auto dir = prepare_out_dir(o.out);

  std::vector<std::unique_ptr<Estimator>> ests;
  std::vector<EstimateTrace> traces;
  for (auto k : kinds) {
    ests.push_back(make_estimator(k, sc.init, sc.noise));
    traces.push_back(EstimateTrace{sc.name, to_string(k), sc.seed, {}});
  }
  std::size_t di = 0;
  for (const auto& cam : cams) {
    FrameObservation f;
    f.t = cam.t;
    f.p_cw = cam.p;
    f.r_cw = cam.r_cw;
    if (di < dets.size() && dets[di].t < cam.t) {
      throw ConfigError(o.detections + ": detection at t=" + format_exact(dets[di].t) + " has no camera pose");
    }
    if (di < dets.size() && dets[di].t == cam.t) {
      try {
        f.meas = measurements_from_detection(dets[di].detection, cam.r_cw, cam.t);
        f.detected = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularSystem) throw;
      }
      ++di;
    }
    const Pose camera{cam.r_cw, cam.p, Frame::Camera, Frame::World};
    for (std::size_t i = 0; i < ests.size(); ++i) {
      ests[i]->step(f);
      traces[i].records.push_back(make_record(*ests[i], f, camera, std::nullopt, f.detected, depth));
    }
  }
  if (di < dets.size()) {
    throw ConfigError(o.detections + ": detection at t=" + format_exact(dets[di].t) + " has no camera pose");
  }
  write_outputs(dir, traces);
  log << "replayed " << dets.size() << " detection(s) over " << cams.size() << " frame(s) to " << dir.string()
      << '\n';
  return kExitOk;
}

/// Verdicts over windows of `window` observations `spacing` frames apart.
/// The target is replaced by its Taylor expansion of order min(n, 2) at the
/// window start, so the stack is exactly consistent with the polynomial model.
inline std::vector<nlohmann::ordered_json> observability_windows(const Scenario& sc, const ObservabilityOptions& o) {
  if (o.order < 1) throw ConfigError("--order must be at least 1");
  if (o.window < o.order + 1) throw ConfigError("--window must be at least order + 1");
  if (o.spacing < 1 || o.stride < 1) throw ConfigError("--spacing and --stride must be positive");
  const bool attitude = sc.target_is_mav && !o.no_attitude;
  const int taylor = std::min(o.order, 2);
  const std::size_t frames = sc.frame_count();
  const std::size_t span = static_cast<std::size_t>(o.spacing) * static_cast<std::size_t>(o.window - 1);

  TrajectorySampler observer(sc.observer);
  TrajectorySampler target(sc.target);
  std::vector<nlohmann::ordered_json> lines;
  for (std::size_t start = 0; start + span < frames; start += static_cast<std::size_t>(o.stride)) {
    const double t0 = sc.frame_time(start);
    const TrajectorySample tg = target(t0);
    const Vec3 a0 = taylor >= 2 ? tg.a : Vec3::Zero();
    std::optional<Vec3> h;
    if (sc.target_is_mav) {
      const Vec3 f = a0 - sc.noise.g * kE3;
      h = f.normalized();
    }
    std::vector<KinematicSample> samples;
    for (int k = 0; k < o.window; ++k) {
      const double t = sc.frame_time(start + static_cast<std::size_t>(k * o.spacing));
      const double tau = t - t0;
      const TrajectorySample ob = observer(t);
      KinematicSample s;
      s.t = t;
      s.p_o = tg.p + tau * tg.v + 0.5 * tau * tau * a0;
      s.v_o = tg.v + tau * a0;
      s.a_o = a0;
      s.p_c = ob.p;
      s.v_c = ob.v;
      s.a_c = ob.a;
      s.alpha = sc.target_cuboid.alpha();
      s.h = h;
      samples.push_back(s);
    }
    auto obs = to_stack_observations(samples);
    if (!attitude) {
      for (auto& x : obs) x.h.reset();
    }
    const double scale = std::max(samples.back().t - samples.front().t, 1e-12);
    const ObservationStack st = build_polynomial_stack(obs, o.order, attitude, scale, sc.noise.g);
    const RankInfo ri = rank_info(st.matrix);

    nlohmann::ordered_json j;
    j["scenario"] = sc.name;
    j["t"] = t0;
    j["N"] = o.window;
    j["n"] = o.order;
    j["rank"] = ri.rank;
    j["cols"] = ri.cols;
    j["sigma_min"] = ri.sigma_min;
    j["sigma_max"] = ri.sigma_max;
    j["cond_a"] = observer_higher_order(samples, o.order);
    j["cond_b"] = attitude && thrust_orthogonal_accel(samples);
    j["observable"] = ri.full();
    lines.push_back(std::move(j));
  }
  if (lines.empty()) throw ConfigError("scenario is too short for one observation window");
  return lines;
}

inline int cmd_observability(const ObservabilityOptions& o, std::ostream& out, std::ostream& log) {
  const Scenario sc = load_scenario(o.source, true);
  const auto lines = observability_windows(sc, o);
  std::ofstream file;
  std::ostream* os = &out;
  if (!o.out.empty()) {
    const std::filesystem::path p(o.out);
    if (p.has_parent_path()) prepare_out_dir(p.parent_path().string());
    file = open_out(p);
    os = &file;
  }
  std::size_t observable = 0;
  for (const auto& j : lines) {
    *os << j.dump() << '\n';
    observable += j["observable"].get<bool>() ? 1 : 0;
  }
  log << observable << "/" << lines.size() << " window(s) observable\n";
  return kExitOk;
}

inline void add_source(CLI::App* app, ScenarioSource& src) {
  auto* name = app->add_option("--scenario", src.name, "built-in scenario name");
  auto* file = app->add_option("--scenario-file", src.file, "scenario config file");
  name->excludes(file);
}

inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Target motion estimation from monocular 3D bounding boxes"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "simulate a scenario and write traces");
  add_source(run_cmd, run.source);
  run_cmd->add_option("--estimator", run.estimators, "comma-separated estimator list")->delimiter(',');
  run_cmd->add_option("--seed", run.seed, "RNG seed (default: BBX_SEED, then the scenario's)");
  run_cmd->add_option("--out", run.out, "output directory");
  run_cmd->add_option("--dt", run.dt);
  run_cmd->add_option("--duration", run.duration);
  run_cmd->add_option("--sigma-tbar", run.sigma_tbar);
  run_cmd->add_option("--sigma-h", run.sigma_h);
  run_cmd->add_option("--sigma-bearing", run.sigma_bearing);
  run_cmd->add_option("--sigma-angle", run.sigma_angle);
  run_cmd->add_option("--noise-mode", run.noise_mode, "A or B");
  run_cmd->add_option("--depth", run.depth, "optical_axis or range");
  run_cmd->add_flag("--export-detections", run.export_detections, "also write detections.csv and camera.csv");

  ReplayOptions replay;
  auto* replay_cmd = app.add_subcommand("replay", "run estimators over recorded detections");
  add_source(replay_cmd, replay.source);
  replay_cmd->add_option("--detections", replay.detections)->required();
  replay_cmd->add_option("--camera", replay.camera)->required();
  replay_cmd->add_option("--estimator", replay.estimators)->delimiter(',');
  replay_cmd->add_option("--out", replay.out);
  replay_cmd->add_option("--depth", replay.depth);

  ObservabilityOptions obs;
  auto* obs_cmd = app.add_subcommand("observability", "rank verdicts over sliding windows");
  add_source(obs_cmd, obs.source);
  obs_cmd->add_option("--order", obs.order, "target polynomial order n");
  obs_cmd->add_option("--window", obs.window, "observations per window");
  obs_cmd->add_option("--spacing", obs.spacing, "frames between observations in a window");
  obs_cmd->add_option("--stride", obs.stride, "frames between window starts");
  obs_cmd->add_flag("--no-attitude", obs.no_attitude, "drop the attitude rows");
  obs_cmd->add_option("--out", obs.out, "JSON-lines file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run, err);
    if (*replay_cmd) return cmd_replay(replay, err);
    return cmd_observability(obs, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace bbx::cli
