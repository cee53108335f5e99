#pragma once

// Scenario files: `key = value` lines grouped under [section] headers.
// '#' starts a comment. Vectors are written "x, y, z"; lists of vectors are
// separated by ';'. Every key must be known and applicable, otherwise the
// parse fails naming the key.

#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "bbx/io.hpp"
#include "bbx/scenarios.hpp"

namespace bbx {

namespace detail {

struct ConfigEntry {
  std::string value;
  std::size_t line = 0;
  bool used = false;
};

class ConfigSection {
 public:
  ConfigSection(std::string name, std::string source) : name_(std::move(name)), source_(std::move(source)) {}

  void add(const std::string& key, std::string value, std::size_t line) {
    if (entries_.count(key)) throw error(key, line, "duplicate key");
    entries_[key] = ConfigEntry{std::move(value), line, false};
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  const ConfigEntry* find(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  double number(const std::string& key, double fallback) {
    const ConfigEntry* e = find(key);
    if (!e) return fallback;
    const auto v = to_double(e->value);
    if (!v) throw error(key, e->line, "expected a number");
    return *v;
  }

  Vec3 vec3(const std::string& key, const Vec3& fallback) {
    const ConfigEntry* e = find(key);
    if (!e) return fallback;
    return parse_vec3(key, e->value, e->line);
  }

  std::vector<double> numbers(const std::string& key) {
    const ConfigEntry* e = find(key);
    if (!e) return {};
    std::vector<double> out;
    for (auto f : split_csv(e->value)) {
      const auto v = to_double(f);
      if (!v) throw error(key, e->line, "expected comma-separated numbers");
      out.push_back(*v);
    }
    return out;
  }

  std::vector<Vec3> vec3_list(const std::string& key) {
    const ConfigEntry* e = find(key);
    if (!e) return {};
    std::vector<Vec3> out;
    std::string_view rest = e->value;
    while (true) {
      const std::size_t semi = rest.find(';');
      out.push_back(parse_vec3(key, std::string(rest.substr(0, semi)), e->line));
      if (semi == std::string_view::npos) break;
      rest.remove_prefix(semi + 1);
    }
    return out;
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const ConfigEntry* e = find(key);
    return e ? e->value : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    const ConfigEntry* e = find(key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1") return true;
    if (e->value == "false" || e->value == "0") return false;
    throw error(key, e->line, "expected true or false");
  }

  /// Fails on the first key that nothing consumed.
  void check_all_used(const std::string& why) const {
    for (const auto& [key, e] : entries_) {
      if (!e.used) throw error(key, e.line, why);
    }
  }

  Error error(const std::string& key, std::size_t line, const std::string& what) const {
    return Error(ErrorCode::Parse, source_ + ":" + std::to_string(line) + ": [" + name_ + "] " + key + ": " + what);
  }

  std::size_t line_of(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

 private:
  Vec3 parse_vec3(const std::string& key, const std::string& value, std::size_t line) const {
    const auto parts = split_csv(value);
    if (parts.size() != 3) throw error(key, line, "expected three comma-separated numbers");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
      const auto v = to_double(parts[static_cast<std::size_t>(i)]);
      if (!v) throw error(key, line, "expected three comma-separated numbers");
      out(i) = *v;
    }
    return out;
  }

  std::string name_;
  std::string source_;
  std::map<std::string, ConfigEntry> entries_;
};

inline TrajectoryProgram parse_trajectory(ConfigSection& s, const TrajectoryProgram& fallback,
                                          const std::shared_ptr<const TrajectoryProgram>& pursued, bool allow_guidance) {
  using namespace traj;
  const ConfigEntry* kind_entry = s.find("kind");
  if (!kind_entry) {
    s.check_all_used("trajectory parameters need an explicit kind");
    return fallback;
  }
  const std::string kind = kind_entry->value;
  TrajectoryProgram out;
  if (kind == "stationary") {
    out = Stationary{s.vec3("position", Vec3::Zero())};
  } else if (kind == "constant_velocity") {
    out = ConstantVelocity{s.vec3("origin", Vec3::Zero()), s.vec3("velocity", Vec3::Zero())};
  } else if (kind == "straight_lines") {
    out = StraightLines{s.vec3_list("waypoints"), s.number("speed", 1.0)};
  } else if (kind == "circle") {
    out = Circle{s.vec3("center", Vec3::Zero()), s.number("radius", 1.0), s.number("speed", 1.0),
                 s.number("phase", 0.0)};
  } else if (kind == "spiral") {
    out = Spiral{s.vec3("center", Vec3::Zero()), s.number("radius", 1.0), s.number("speed", 1.0),
                 s.number("phase", 0.0), s.vec3("drift", Vec3::Zero())};
  } else if (kind == "zigzag") {
    out = Zigzag{s.vec3("origin", Vec3::Zero()), s.vec3("velocity", Vec3::UnitX()), s.vec3("lateral", Vec3::UnitY()),
                 s.number("amplitude", 1.0), s.number("period", 4.0)};
  } else if (kind == "polynomial") {
    out = Polynomial{s.vec3_list("coeffs")};
  } else if (kind == "guidance" && allow_guidance) {
    Guidance g;
    g.target = pursued;
    g.origin = s.vec3("origin", g.origin);
    g.initial_velocity = s.vec3("initial_velocity", g.initial_velocity);
    g.standoff = s.number("standoff", g.standoff);
    g.gain = s.number("gain", g.gain);
    g.max_speed = s.number("max_speed", g.max_speed);
    g.lag = s.number("lag", g.lag);
    out = g;
  } else {
    throw s.error("kind", kind_entry->line, "unknown trajectory kind '" + kind + "'");
  }
  s.check_all_used("not a parameter of kind '" + kind + "'");
  try {
    out.validate();
  } catch (const Error& e) {
    throw s.error("kind", kind_entry->line, e.what());
  }
  return out;
}

}  // namespace detail

/// Parses a scenario file. `[scenario] base = <built-in name>` starts from
/// a built-in scenario; everything else overrides it.
inline Scenario parse_scenario_config(std::istream& is, const std::string& source = "config") {
  static const std::set<std::string> kSections = {"scenario", "noise", "init", "camera", "target", "observer"};
  std::map<std::string, detail::ConfigSection> sections;
  for (const auto& name : kSections) sections.emplace(name, detail::ConfigSection(name, source));

  std::string line;
  std::size_t lineno = 0;
  std::string current;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view l = line;
    if (const auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
    l = detail::trim(l);
    if (l.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    if (l.front() == '[') {
      if (l.back() != ']') throw Error(ErrorCode::Parse, where + ": malformed section header");
      current = std::string(detail::trim(l.substr(1, l.size() - 2)));
      if (!kSections.count(current)) throw Error(ErrorCode::Parse, where + ": unknown section [" + current + "]");
      continue;
    }
    const auto eq = l.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::Parse, where + ": expected key = value");
    const std::string key(detail::trim(l.substr(0, eq)));
    const std::string value(detail::trim(l.substr(eq + 1)));
    if (key.empty()) throw Error(ErrorCode::Parse, where + ": empty key");
    if (current.empty()) throw Error(ErrorCode::Parse, where + ": key '" + key + "' outside of a section");
    sections.at(current).add(key, value, lineno);
  }

  auto& sc_sec = sections.at("scenario");
  Scenario sc;
  if (const auto* base = sc_sec.find("base")) {
    const auto b = builtin_scenario(base->value);
    if (!b) throw sc_sec.error("base", base->line, "unknown built-in scenario '" + base->value + "'");
    sc = *b;
  }
  sc.name = sc_sec.text("name", sc.name);
  sc.dt = sc_sec.number("dt", sc.dt);
  sc.duration = sc_sec.number("duration", sc.duration);
  if (const auto* e = sc_sec.find("seed")) {
    const auto v = detail::to_double(e->value);
    if (!v || *v < 0.0 || *v != std::floor(*v)) throw sc_sec.error("seed", e->line, "expected a non-negative integer");
    sc.seed = static_cast<std::uint64_t>(*v);
  }
  if (const auto* e = sc_sec.find("noise_mode")) {
    if (e->value == "A") sc.noise_mode = NoiseMode::A;
    else if (e->value == "B") sc.noise_mode = NoiseMode::B;
    else throw sc_sec.error("noise_mode", e->line, "expected A or B");
  }
  if (const auto* e = sc_sec.find("depth")) {
    if (e->value == "optical_axis") sc.depth = DepthKind::OpticalAxis;
    else if (e->value == "range") sc.depth = DepthKind::Range;
    else throw sc_sec.error("depth", e->line, "expected optical_axis or range");
  }
  if (const auto* e = sc_sec.find("pointing")) {
    if (e->value == "track") sc.pointing = CameraPointing::TrackTarget;
    else if (e->value == "fixed") sc.pointing = CameraPointing::Fixed;
    else throw sc_sec.error("pointing", e->line, "expected track or fixed");
  }
  sc.look_at_point = sc_sec.vec3("look_at", sc.look_at_point);
  if (sc_sec.has("look_at") && sc.pointing != CameraPointing::Fixed) {
    throw sc_sec.error("look_at", sc_sec.line_of("look_at"), "only applies with pointing = fixed");
  }
  sc.sigma_vertex = sc_sec.number("sigma_vertex", sc.sigma_vertex);
  sc.sigma_rotation = sc_sec.number("sigma_rotation", sc.sigma_rotation);
  sc_sec.check_all_used("unknown key");

  auto& n = sections.at("noise");
  sc.noise.sigma_tbar = n.number("sigma_tbar", sc.noise.sigma_tbar);
  sc.noise.sigma_h = n.number("sigma_h", sc.noise.sigma_h);
  sc.noise.sigma_bearing = n.number("sigma_bearing", sc.noise.sigma_bearing);
  sc.noise.sigma_angle = n.number("sigma_angle", sc.noise.sigma_angle);
  sc.noise.sigma_p = n.number("sigma_p", sc.noise.sigma_p);
  sc.noise.sigma_v = n.number("sigma_v", sc.noise.sigma_v);
  sc.noise.sigma_a = n.number("sigma_a", sc.noise.sigma_a);
  sc.noise.sigma_alpha = n.number("sigma_alpha", sc.noise.sigma_alpha);
  sc.noise.g = n.number("g", sc.noise.g);
  n.check_all_used("unknown key");

  auto& in = sections.at("init");
  sc.init.p = in.vec3("p", sc.init.p);
  sc.init.v = in.vec3("v", sc.init.v);
  sc.init.a = in.vec3("a", sc.init.a);
  sc.init.alpha = in.number("alpha", sc.init.alpha);
  sc.init.cov_scale = in.number("cov_scale", sc.init.cov_scale);
  if (in.has("cov_diag")) {
    const auto d = in.numbers("cov_diag");
    sc.init.cov_diag = Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
  }
  in.check_all_used("unknown key");

  auto& cam = sections.at("camera");
  sc.camera.fx = cam.number("fx", sc.camera.fx);
  sc.camera.fy = cam.number("fy", sc.camera.fy);
  sc.camera.cx = cam.number("cx", sc.camera.cx);
  sc.camera.cy = cam.number("cy", sc.camera.cy);
  sc.camera.width = cam.number("width", sc.camera.width);
  sc.camera.height = cam.number("height", sc.camera.height);
  cam.check_all_used("unknown key");

  auto& tgt = sections.at("target");
  if (tgt.has("dims")) {
    const Vec3 d = tgt.vec3("dims", sc.target_cuboid.dims);
    if (!(d.minCoeff() > 0.0)) throw tgt.error("dims", tgt.line_of("dims"), "dimensions must be positive");
    sc.target_cuboid = Cuboid(d);
  }
  sc.target_is_mav = tgt.boolean("mav", sc.target_is_mav);
  sc.target = detail::parse_trajectory(tgt, sc.target, nullptr, false);

  auto& obs = sections.at("observer");
  const auto pursued = std::make_shared<const TrajectoryProgram>(sc.target);
  sc.observer = detail::parse_trajectory(obs, sc.observer, pursued, true);
  // A built-in guidance observer keeps chasing the (possibly replaced) target.
  if (auto* g = std::get_if<traj::Guidance>(&sc.observer.kind)) g->target = pursued;

  try {
    sc.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Parse, source + ": " + e.what());
  }
  return sc;
}

inline Scenario parse_scenario_config(const std::string& text, const std::string& source) {
  std::istringstream is(text);
  return parse_scenario_config(is, source);
}

}  // namespace bbx
