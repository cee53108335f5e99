#pragma once

// CSV traces, detection/camera logs and the JSON run summary.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "bbx/box3d.hpp"
#include "bbx/metrics.hpp"

namespace bbx {

/// Shortest round-trip digits cut (not rounded) to `digits` significant
/// digits, printed like %g.
inline std::string format_float(double x, int digits = 9) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return std::signbit(x) ? "-0" : "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::scientific);
  const std::string_view s(buf, static_cast<std::size_t>(res.ptr - buf));
  const std::size_t e_pos = s.find('e');
  const bool neg = s.front() == '-';
  std::string mant;
  for (char c : s.substr(neg ? 1 : 0, e_pos - (neg ? 1 : 0))) {
    if (c != '.') mant.push_back(c);
  }
  int exp = 0;
  std::from_chars(s.data() + e_pos + (s[e_pos + 1] == '+' ? 2 : 1), s.data() + s.size(), exp);
  if (static_cast<int>(mant.size()) > digits) mant.resize(static_cast<std::size_t>(digits));
  while (mant.size() > 1 && mant.back() == '0') mant.pop_back();

  std::string out = neg ? "-" : "";
  if (exp < -5 || exp >= digits) {
    out += mant.substr(0, 1);
    if (mant.size() > 1) out += "." + mant.substr(1);
    char e[16];
    std::snprintf(e, sizeof(e), "e%c%02d", exp < 0 ? '-' : '+', std::abs(exp));
    out += e;
  } else if (exp < 0) {
    out += "0." + std::string(static_cast<std::size_t>(-exp - 1), '0') + mant;
  } else {
    const auto int_len = static_cast<std::size_t>(exp + 1);
    if (mant.size() <= int_len) {
      out += mant + std::string(int_len - mant.size(), '0');
    } else {
      out += mant.substr(0, int_len) + "." + mant.substr(int_len);
    }
  }
  return out;
}

/// Exact round trip, used for logs that must replay bit-identically.
inline std::string format_exact(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Trace CSV

inline constexpr std::string_view kTraceHeader =
    "t,px,py,pz,vx,vy,vz,ax,ay,az,alpha,px_true,py_true,pz_true,depth_true,depth_est,nees,in_fov";

inline void write_trace_csv(std::ostream& os, const EstimateTrace& trace) {
  os << kTraceHeader << '\n';
  const auto opt = [](const std::optional<double>& v) { return v ? format_float(*v) : std::string(); };
  for (const auto& r : trace.records) {
    os << format_float(r.t);
    for (int i = 0; i < 3; ++i) os << ',' << format_float(r.p(i));
    for (int i = 0; i < 3; ++i) os << ',' << format_float(r.v(i));
    for (int i = 0; i < 3; ++i) os << ',' << (r.a ? format_float((*r.a)(i)) : std::string());
    os << ',' << opt(r.alpha);
    for (int i = 0; i < 3; ++i) os << ',' << (r.truth ? format_float(r.truth->p(i)) : std::string());
    os << ',' << opt(r.depth_true) << ',' << format_float(r.depth_est) << ',' << opt(r.nees) << ','
       << (r.in_fov ? 1 : 0) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Line-oriented CSV parsing

namespace detail {

inline std::string parse_context(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line);
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

/// Reads every data line (after the header) as `expected` doubles.
inline std::vector<std::pair<std::size_t, std::vector<double>>> read_numeric_csv(std::istream& is,
                                                                                std::string_view header,
                                                                                std::size_t expected,
                                                                                const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::vector<std::pair<std::size_t, std::vector<double>>> rows;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string_view l = trim(line);
    if (l.empty()) continue;
    if (!have_header) {
      if (l != header) throw Error(ErrorCode::Parse, parse_context(source, lineno) + ": unexpected header");
      have_header = true;
      continue;
    }
    const auto fields = split_csv(l);
    if (fields.size() != expected) {
      throw Error(ErrorCode::Parse, parse_context(source, lineno) + ": expected " + std::to_string(expected) +
                                        " fields, got " + std::to_string(fields.size()));
    }
    std::vector<double> values;
    values.reserve(expected);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto v = to_double(fields[i]);
      if (!v) {
        throw Error(ErrorCode::Parse, parse_context(source, lineno) + ": field " + std::to_string(i + 1) +
                                          " is not a finite number");
      }
      values.push_back(*v);
    }
    rows.emplace_back(lineno, std::move(values));
  }
  if (!have_header) throw Error(ErrorCode::Parse, source + ": empty file");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].second[0] > rows[i - 1].second[0])) {
      throw Error(ErrorCode::Parse, parse_context(source, rows[i].first) + ": timestamps must increase");
    }
  }
  return rows;
}

inline Rotation rotation_from_row(const std::vector<double>& v, std::size_t offset, const std::string& where) {
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = v[offset + static_cast<std::size_t>(3 * r + c)];
  }
  if (!Rotation::is_rotation(m, 1e-6)) throw Error(ErrorCode::Parse, where + ": matrix is not a proper rotation");
  return Rotation::from_matrix(m, 1e-6);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Detection log: t, R_o^c (row-major), lbar2, lbar3, 8 vertices (x,y), centre (x,y)

struct DetectionLogRow {
  double t = 0.0;
  Box3DDetection detection;
};

inline std::string detection_log_header() {
  std::string h = "t,r00,r01,r02,r10,r11,r12,r20,r21,r22,lbar2,lbar3";
  for (int i = 0; i < 8; ++i) h += ",q" + std::to_string(i) + "x,q" + std::to_string(i) + "y";
  h += ",cx,cy";
  return h;
}

inline constexpr std::size_t kDetectionLogFields = 1 + 9 + 2 + 16 + 2;

inline void write_detection_log(std::ostream& os, const std::vector<DetectionLogRow>& rows) {
  os << detection_log_header() << '\n';
  for (const auto& row : rows) {
    const auto& d = row.detection;
    os << format_exact(row.t);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) os << ',' << format_exact(d.r_oc.matrix()(r, c));
    }
    os << ',' << format_exact(d.ldims(1)) << ',' << format_exact(d.ldims(2));
    for (const auto& q : d.vertices) os << ',' << format_exact(q.x()) << ',' << format_exact(q.y());
    os << ',' << format_exact(d.center.x()) << ',' << format_exact(d.center.y()) << '\n';
  }
}

inline std::vector<DetectionLogRow> read_detection_log(std::istream& is, const std::string& source = "detections") {
  std::vector<DetectionLogRow> out;
  for (const auto& [lineno, v] : detail::read_numeric_csv(is, detection_log_header(), kDetectionLogFields, source)) {
    const std::string where = detail::parse_context(source, lineno);
    DetectionLogRow row;
    row.t = v[0];
    row.detection.r_oc = detail::rotation_from_row(v, 1, where);
    row.detection.ldims = Vec3(1.0, v[10], v[11]);
    if (!(v[10] > 0.0 && v[11] > 0.0)) throw Error(ErrorCode::Parse, where + ": normalized dims must be positive");
    for (std::size_t i = 0; i < 8; ++i) row.detection.vertices[i] = UnitPlanePoint(v[12 + 2 * i], v[13 + 2 * i]);
    row.detection.center = UnitPlanePoint(v[28], v[29]);
    out.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Camera log: t, p_c^w, R_c^w (row-major)

struct CameraLogRow {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Rotation r_cw;
};

inline constexpr std::string_view kCameraLogHeader = "t,px,py,pz,r00,r01,r02,r10,r11,r12,r20,r21,r22";

inline void write_camera_log(std::ostream& os, const std::vector<CameraLogRow>& rows) {
  os << kCameraLogHeader << '\n';
  for (const auto& row : rows) {
    os << format_exact(row.t);
    for (int i = 0; i < 3; ++i) os << ',' << format_exact(row.p(i));
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) os << ',' << format_exact(row.r_cw.matrix()(r, c));
    }
    os << '\n';
  }
}

inline std::vector<CameraLogRow> read_camera_log(std::istream& is, const std::string& source = "camera") {
  std::vector<CameraLogRow> out;
  for (const auto& [lineno, v] : detail::read_numeric_csv(is, kCameraLogHeader, 13, source)) {
    out.push_back(CameraLogRow{v[0], Vec3(v[1], v[2], v[3]),
                               detail::rotation_from_row(v, 4, detail::parse_context(source, lineno))});
  }
  return out;
}

// ---------------------------------------------------------------------------
// summary.json

struct RunSummary {
  std::string scenario;
  std::string estimator;
  std::optional<double> nide;
  std::optional<double> mean_nees;
  std::optional<Vec3> rmse;
  std::size_t frames = 0;
  std::uint64_t seed = 0;
};

inline RunSummary summarize(const EstimateTrace& trace) {
  RunSummary s;
  s.scenario = trace.scenario;
  s.estimator = trace.estimator;
  s.frames = trace.records.size();
  s.seed = trace.seed;
  try {
    s.nide = nide(trace);
  } catch (const Error&) {
  }
  const double mn = mean_nees(trace);
  if (!std::isnan(mn)) s.mean_nees = mn;
  try {
    s.rmse = axis_errors(trace);
  } catch (const Error&) {
  }
  return s;
}

inline nlohmann::ordered_json to_json(const RunSummary& s) {
  const auto num = [](const std::optional<double>& v) -> nlohmann::ordered_json {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json j;
  j["scenario"] = s.scenario;
  j["estimator"] = s.estimator;
  j["nide"] = num(s.nide);
  j["mean_nees"] = num(s.mean_nees);
  j["rmse_x"] = num(s.rmse ? std::optional<double>((*s.rmse)(0)) : std::nullopt);
  j["rmse_y"] = num(s.rmse ? std::optional<double>((*s.rmse)(1)) : std::nullopt);
  j["rmse_z"] = num(s.rmse ? std::optional<double>((*s.rmse)(2)) : std::nullopt);
  j["frames"] = s.frames;
  j["seed"] = s.seed;
  return j;
}

inline void write_summary_json(std::ostream& os, const std::vector<RunSummary>& runs) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : runs) arr.push_back(to_json(r));
  os << arr.dump(2) << '\n';
}

}  // namespace bbx
