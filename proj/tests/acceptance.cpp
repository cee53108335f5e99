// Acceptance checks. Usage: acceptance <criterion 1..10>. Prints one
// PASS/FAIL line per criterion; exit status 0 on pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "bbx/bbx.hpp"

using namespace bbx;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  bool flagged = false;
};

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

Rotation random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return Rotation::nearest(q.toRotationMatrix());
}

Vec3 random_unit(Rng& rng) {
  Vec3 v;
  do v = rng.normal3(1.0);
  while (v.norm() < 1e-6);
  return v.normalized();
}

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

// 1
Outcome box_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  int done = 0, skipped = 0, bad = 0;
  double worst = 0.0;
  while (done < 1000) {
    const double depth = uniform(rng, 2.0, 50.0);
    const Vec3 p(uniform(rng, -0.5, 0.5) * depth, uniform(rng, -0.5, 0.5) * depth, depth);
    const Cuboid c(uniform(rng, 0.1, 3.0), uniform(rng, 0.1, 3.0), uniform(rng, 0.1, 3.0));
    const Pose pose{random_rotation(rng), p, Frame::Object, Frame::Camera};
    Box3DDetection d;
    try {
      d = make_detection(pose, c);
    } catch (const Error&) {
      ++skipped;  // a corner behind the camera
      continue;
    }
    const Vec3 expected = p / c.alpha();
    const double err = (normalized_rel_pos(d).pbar - expected).norm() / expected.norm();
    worst = std::max(worst, err);
    if (!(err <= 1e-9)) ++bad;
    ++done;
  }
  const double secs = elapsed_s(t0);
  return {bad == 0 && secs < 5.0, "worst rel err " + fmt("%.3g", worst) + ", " + std::to_string(bad) +
                                      " violations, " + std::to_string(skipped) + " poses redrawn, " +
                                      fmt("%.2f s", secs)};
}

// 2
Outcome projector_algebra() {
  Rng rng(202);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 h = random_unit(rng);
    const Mat3 p = projector(h);
    worst = std::max({worst, (p * p - p).cwiseAbs().maxCoeff(), (p.transpose() - p).cwiseAbs().maxCoeff(),
                      (p * h).cwiseAbs().maxCoeff()});
  }
  const Vec3 hover = projector(-kE3) * (9.81 * kE3);
  const bool exact = hover.x() == 0.0 && hover.y() == 0.0 && hover.z() == 0.0;
  return {worst <= 1e-12 && exact,
          "worst residual " + fmt("%.3g", worst) + ", hover product exactly zero: " + (exact ? "yes" : "no")};
}

// 3
Outcome rank_identity() {
  Rng rng(303);
  int violations = 0, parallel = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 h = random_unit(rng);
    Vec3 u = rng.normal3(2.0);
    if (i % 5 == 0) {
      u = uniform(rng, -3.0, 3.0) * h;  // P_h u = 0
      ++parallel;
    }
    if (i % 97 == 0) u.setZero();
    const auto [left, right] = appendix_a_transform(h, u);
    const int lhs = numeric_rank(left);
    const Vec3 phu = projector(h) * u;
    // rank of a single vector: nonzero relative to the block scale
    const int rhs = 3 + (phu.norm() > 1e-12 * std::max(1.0, u.norm()) ? 1 : 0);
    if (lhs != rhs || numeric_rank(right) != rhs) ++violations;
  }
  return {violations == 0, std::to_string(violations) + " violations (" + std::to_string(parallel) + " with u along h)"};
}

// 4
std::vector<KinematicSample> grid_samples(int observer_kind, int target_kind) {
  std::vector<KinematicSample> out;
  const double g = 9.81;
  for (int k = 0; k < 6; ++k) {
    const double t = 0.5 * k;
    KinematicSample s;
    s.t = t;
    s.alpha = 0.9;
    // target
    const Vec3 p0(10.0, 2.0, -1.0);
    if (target_kind == 0) {
      const Vec3 v(1.0, 0.5, 0.0);
      s.p_o = p0 + t * v;
      s.v_o = v;
    } else if (target_kind == 1) {
      const Vec3 v(1.0, 0.0, 0.0), a(0.8, -0.6, 0.0);
      s.p_o = p0 + t * v + 0.5 * t * t * a;
      s.v_o = v + t * a;
      s.a_o = a;
      s.h = (a - g * kE3).normalized();
    } else {
      s.p_o = p0;
      s.h = -kE3;
    }
    // observer
    if (observer_kind == 0) {
      s.p_c = Vec3(-2.0, 1.0, 0.5);
    } else if (observer_kind == 1) {
      const Vec3 v(0.5, 1.0, 0.0), a(0.3, 0.7, 0.2);
      s.p_c = t * v + 0.5 * t * t * a;
      s.v_c = v + t * a;
      s.a_c = a;
    } else {
      const Vec3 j(0.2, -0.3, 0.1), a(0.3, 0.7, 0.2);
      s.p_c = 0.5 * t * t * a + t * t * t / 6.0 * j;
      s.v_c = t * a + 0.5 * t * t * j;
      s.a_c = a + t * j;
    }
    out.push_back(s);
  }
  return out;
}

Outcome rank_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const char* obs_names[] = {"stationary", "const-accel", "jerking"};
  const char* tgt_names[] = {"cv-common", "const-accel-mav", "hover-mav"};
  // Expected verdicts worked out by hand from the conditions: common target
  // needs a nonzero observer acceleration; a MAV needs observer jerk or a
  // relative acceleration off the thrust axis.
  const bool expected[3][3] = {
      {false, true, false},  // stationary observer
      {true, true, true},    // constant acceleration (0.3, 0.7, 0.2) is off the hover axis
      {true, true, true},    // jerking
  };
  int mismatches = 0;
  std::string cells;
  for (int o = 0; o < 3; ++o) {
    for (int tk = 0; tk < 3; ++tk) {
      const auto v = check_theorem_conditions(grid_samples(o, tk));
      const bool ok = v.observable == expected[o][tk] && !v.disagreement;
      if (!ok) {
        ++mismatches;
        cells += std::string(" [") + obs_names[o] + "/" + tgt_names[tk] + "]";
      }
    }
  }
  const double secs = elapsed_s(t0);
  return {mismatches == 0 && secs < 10.0,
          std::to_string(mismatches) + "/9 cells disagree" + cells + ", " + fmt("%.2f s", secs)};
}

// 5
std::vector<StackObservation> polynomial_observations(int n, int count, bool mav) {
  const double g = 9.81;
  std::vector<Vec3> b = {Vec3(8.0, 1.0, -2.0), Vec3(0.7, -0.4, 0.2), Vec3(0.3, 0.25, -0.1), Vec3(0.05, -0.04, 0.02)};
  b.resize(static_cast<std::size_t>(n + 1));
  std::vector<StackObservation> out;
  for (int k = 0; k < count; ++k) {
    const double t = 0.4 * k;
    Vec3 p = Vec3::Zero(), a = Vec3::Zero();
    for (int i = 0; i <= n; ++i) {
      p += std::pow(t, i) * b[static_cast<std::size_t>(i)];
      if (i >= 2) a += i * (i - 1) * std::pow(t, i - 2) * b[static_cast<std::size_t>(i)];
    }
    // observer with motion of every order
    const Vec3 pc(3.0 * std::sin(0.9 * t), 2.0 * std::cos(0.6 * t), 0.8 * std::sin(1.3 * t));
    StackObservation o;
    o.t = t;
    o.p_c = pc;
    o.tbar = (p - pc) / 0.92;
    if (mav) o.h = (a - g * kE3).normalized();
    out.push_back(o);
  }
  return out;
}

int first_full_rank(int n, bool attitude) {
  for (int count = n + 1; count <= n + 8; ++count) {
    const auto st = build_polynomial_stack(polynomial_observations(n, count, attitude), n, attitude);
    if (rank_info(st.matrix).full()) return count;
  }
  return -1;
}

Outcome minimum_observations() {
  bool all = true;
  std::string detail;
  for (int n = 1; n <= 3; ++n) {
    const int without = first_full_rank(n, false);
    const int with = first_full_rank(n, true);
    const bool ok_without = without == n + 2;
    const bool ok_with = with == n + 1;
    all = all && ok_without && ok_with;
    detail += "n=" + std::to_string(n) + ": N=" + std::to_string(without) + " (want " + std::to_string(n + 2) +
              (ok_without ? ")" : ", MISMATCH)") + " / attitude N=" + std::to_string(with) + " (want " +
              std::to_string(n + 1) + (ok_with ? ")" : ", MISMATCH)") + (n < 3 ? "; " : "");
  }
  return {all, detail};
}

// 6
Outcome stationary_observer() {
  const auto t0 = std::chrono::steady_clock::now();
  int mav_ok = 0, bo_ok = 0;
  double worst_tail = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Scenario sc = *builtin_scenario("case4", seed);
    const auto run = run_scenario(sc, {EstimatorKind::BearingBoxMav, EstimatorKind::BearingOnly});
    double tail = 0.0;
    int count = 0;
    for (const auto& r : run.traces[0].records) {
      if (r.t >= sc.duration - 5.0 - 1e-9 && r.depth_true) {
        tail += std::abs(r.depth_est - *r.depth_true) / *r.depth_true;
        ++count;
      }
    }
    tail /= count;
    worst_tail = std::max(worst_tail, tail);
    mav_ok += tail < 0.10 ? 1 : 0;
    const Vec3 cam = sample_trajectory(sc.observer, sc.duration).p;
    bo_ok += (run.traces[1].records.back().p - cam).norm() <= 0.5 ? 1 : 0;
  }
  const double secs = elapsed_s(t0);
  return {mav_ok == 20 && bo_ok >= 18 && secs < 30.0,
          "bearing-box-mav tail depth error < 10% in " + std::to_string(mav_ok) + "/20 (worst " +
              fmt("%.3f", worst_tail) + "), bearing-only at camera in " + std::to_string(bo_ok) + "/20, " +
              fmt("%.2f s", secs)};
}

// 7
Outcome nide_ordering() {
  bool all = true;
  std::string detail;
  for (const char* name : {"case1", "case2", "case3", "case4"}) {
    double ours = 0.0, bo = 0.0, ba = 0.0;
    const int seeds = 10;
    for (int seed = 0; seed < seeds; ++seed) {
      const Scenario sc = *builtin_scenario(name, static_cast<std::uint64_t>(seed));
      const auto run = run_scenario(sc, default_estimators(sc));
      ours += nide(run.traces[0]) / seeds;
      bo += nide(run.traces[1]) / seeds;
      ba += nide(run.traces[2]) / seeds;
    }
    const bool strict = std::string(name) == "case3" || std::string(name) == "case4";
    const bool ok = strict ? (ours < bo && ours < ba) : (ours <= bo && ours <= ba);
    all = all && ok;
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%s %.4f/%.4f/%.4f%s", name, ours, bo, ba, ok ? "" : " (order violated)");
    detail += std::string(detail.empty() ? "" : "; ") + buf;
  }
  return {all, "NIDE box/bearing-only/bearing-angle: " + detail};
}

// 8
Outcome filter_consistency() {
  const int runs = 50;
  const int nx = 7;
  double mean = 0.0;
  for (int seed = 0; seed < runs; ++seed) {
    Scenario sc = *builtin_scenario("case1", static_cast<std::uint64_t>(seed));
    sc.name = "cv-spiral";
    sc.target = traj::ConstantVelocity{Vec3::Zero(), Vec3(1.0, 0.0, 0.0)};
    sc.noise_mode = NoiseMode::A;
    sc.noise.sigma_v = 1e-4;
    const double p0 = 0.1;
    Rng init_rng(1000 + static_cast<std::uint64_t>(seed));
    sc.init.cov_scale = p0;
    sc.init.p = init_rng.normal3(std::sqrt(p0));
    sc.init.v = Vec3(1.0, 0.0, 0.0) + init_rng.normal3(std::sqrt(p0));
    sc.init.alpha = sc.target_cuboid.alpha() + init_rng.normal(std::sqrt(p0));
    const auto run = run_scenario(sc, {EstimatorKind::BearingBox});
    mean += *run.traces[0].records.back().nees / runs;
  }
  const boost::math::chi_squared chi(runs * nx);
  const double dof = runs * nx;
  const double lo95 = boost::math::quantile(chi, 0.025) / dof, hi95 = boost::math::quantile(chi, 0.975) / dof;
  const double lo99 = boost::math::quantile(chi, 0.005) / dof, hi99 = boost::math::quantile(chi, 0.995) / dof;
  const bool in95 = mean >= lo95 && mean <= hi95;
  const bool in99 = mean >= lo99 && mean <= hi99;
  char buf[200];
  std::snprintf(buf, sizeof(buf), "mean NEES %.4f, 95%% band [%.4f, %.4f], 99%% band [%.4f, %.4f]", mean, lo95, hi95,
                lo99, hi99);
  return {in95 || in99, buf, !in95 && in99};
}

// 9
Outcome determinism() {
  int differing = 0;
  for (const auto& name : builtin_scenario_names()) {
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
      const Scenario sc = *builtin_scenario(name, 7);
      const auto run = run_scenario(sc, default_estimators(sc));
      std::ostringstream os;
      for (const auto& tr : run.traces) write_trace_csv(os, tr);
      if (rep == 0) first = os.str();
      else if (os.str() != first) ++differing;
    }
  }
  return {differing == 0, std::to_string(differing) + "/" + std::to_string(builtin_scenario_names().size()) +
                              " built-in scenarios produced different bytes"};
}

// 10
Outcome size_recovery() {
  int ok = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Scenario sc = *builtin_scenario("case1", seed);
    sc.noise.sigma_tbar = 0.2;
    sc.noise.sigma_h = 0.02;
    const auto run = run_scenario(sc, {EstimatorKind::BearingBox});
    const double err = std::abs(*run.traces[0].records.back().alpha - sc.target_cuboid.alpha()) / sc.target_cuboid.alpha();
    worst = std::max(worst, err);
    ok += err <= 0.05 ? 1 : 0;
  }
  return {ok >= 18, "alpha within 5% in " + std::to_string(ok) + "/20 seeds (worst " + fmt("%.3f", worst) + ")"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::pair<const char*, std::function<Outcome()>>> checks = {
      {"1", {"box round trip", box_round_trip}},
      {"2", {"projector algebra", projector_algebra}},
      {"3", {"rank identity", rank_identity}},
      {"4", {"rank oracle grid", rank_oracle}},
      {"5", {"minimum observation counts", minimum_observations}},
      {"6", {"stationary observer convergence", stationary_observer}},
      {"7", {"NIDE ordering", nide_ordering}},
      {"8", {"filter consistency", filter_consistency}},
      {"9", {"determinism", determinism}},
      {"10", {"size recovery", size_recovery}},
  };
  std::vector<std::string> which;
  for (int i = 1; i < argc; ++i) which.emplace_back(argv[i]);
  if (which.empty()) {
    for (int i = 1; i <= 10; ++i) which.push_back(std::to_string(i));
  }
  int failed = 0;
  for (const auto& id : which) {
    const auto it = checks.find(id);
    if (it == checks.end()) {
      std::fprintf(stderr, "unknown criterion %s\n", id.c_str());
      return 2;
    }
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const char* status = o.pass ? (o.flagged ? "PASS (flagged: outside 95% band, inside 99%)" : "PASS") : "FAIL";
    std::printf("criterion %s [%s]: %s - %s\n", id.c_str(), it->second.first, status, o.detail.c_str());
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
