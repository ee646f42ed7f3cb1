#include <cmath>
#include <numbers>
#include <sstream>

#include <doctest.h>

#include "fhr/error.hpp"
#include "fhr/sections.hpp"

using namespace fhr;

namespace {

Trajectory circle(double dt, double t_end) {
  Trajectory tr;
  tr.t0 = 0.0;
  tr.sample_dt = dt;
  const auto n = static_cast<std::size_t>(std::lround(t_end / dt)) + 1;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    tr.samples.push_back({std::cos(t), std::sin(t), 0.25});
  }
  return tr;
}

std::vector<Crossing> from_values(const std::vector<double>& c) {
  std::vector<Crossing> out;
  for (std::size_t i = 0; i < c.size(); ++i)
    out.push_back(Crossing{static_cast<double>(i), {c[i], 0.0, 0.0}, 1});
  return out;
}

}  // namespace

TEST_CASE("plane normal is normalised without moving the plane") {
  const PlaneSection s({0.0, 2.0, 0.0}, 2.0, CrossingDirection::Positive);
  CHECK(s.normal()[1] == doctest::Approx(1.0));
  CHECK(s.offset() == doctest::Approx(1.0));
  CHECK(s.eval({5.0, 1.0, -3.0}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(PlaneSection({0, 0, 0}, 1.0, CrossingDirection::Both), Error);
}

TEST_CASE("circle crossings of x = 0") {
  const double pi = std::numbers::pi;
  const Trajectory tr = circle(0.01, 20.0);
  SUBCASE("both directions at pi/2 + k pi") {
    const auto cr = detect_crossings(tr, PlaneSection({1, 0, 0}, 0.0, CrossingDirection::Both));
    REQUIRE(cr.size() == 6);
    for (std::size_t k = 0; k < cr.size(); ++k) {
      CHECK(cr[k].t == doctest::Approx(pi / 2 + static_cast<double>(k) * pi).epsilon(1e-8));
      CHECK(cr[k].direction == (k % 2 == 0 ? -1 : +1));
      CHECK(std::abs(cr[k].state[0]) < kCrossingTolerance);
      CHECK(cr[k].state[2] == doctest::Approx(0.25));
    }
  }
  SUBCASE("direction filter") {
    const auto pos = detect_crossings(tr, PlaneSection({1, 0, 0}, 0.0, CrossingDirection::Positive));
    const auto neg = detect_crossings(tr, PlaneSection({1, 0, 0}, 0.0, CrossingDirection::Negative));
    REQUIRE(pos.size() == 3);
    REQUIRE(neg.size() == 3);
    for (const auto& c : pos) CHECK(c.direction == 1);
    CHECK(pos[0].t == doctest::Approx(1.5 * pi).epsilon(1e-8));
  }
}

TEST_CASE("crossings lie between samples of opposite sign") {
  const Trajectory tr = circle(0.05, 40.0);
  const PlaneSection sec({1.0, 1.0, 0.0}, 0.3, CrossingDirection::Both);
  for (const auto& c : detect_crossings(tr, sec)) {
    CHECK(std::abs(sec.eval(c.state)) < kCrossingTolerance);
    const auto k = static_cast<std::size_t>(std::floor(c.t / tr.sample_dt));
    REQUIRE(k + 1 < tr.size());
    CHECK(sec.eval(tr.samples[k]) * sec.eval(tr.samples[k + 1]) <= 0.0);
  }
}

TEST_CASE("return map pairs successive coordinates") {
  const auto cr = from_values({1.0, 2.0, 3.0});
  const auto m = return_map(cr, 0);
  REQUIRE(m.size() == 2);
  CHECK(m[0] == std::pair<double, double>{1.0, 2.0});
  CHECK(m[1] == std::pair<double, double>{2.0, 3.0});
  try {
    return_map(from_values({1.0}), 0);
    FAIL("expected TooFewCrossings");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooFewCrossings);
  }
}

TEST_CASE("periodicity classification") {
  SUBCASE("fixed point is period 1") {
    const auto v = classify_periodicity(from_values(std::vector<double>(30, 0.4)), 1e-6, 4);
    CHECK(v.kind == PeriodicityVerdict::Kind::Periodic);
    CHECK(v.period == 1);
    CHECK(v.describe() == "periodic(1)");
  }
  SUBCASE("alternating values are period 2") {
    std::vector<double> c;
    for (int i = 0; i < 30; ++i) c.push_back(i % 2 ? 0.2 : 0.7);
    const auto v = classify_periodicity(from_values(c), 1e-6, 4);
    CHECK(v.kind == PeriodicityVerdict::Kind::Periodic);
    CHECK(v.period == 2);
  }
  SUBCASE("period 3 with jitter below tolerance") {
    std::vector<double> c;
    for (int i = 0; i < 40; ++i) c.push_back(0.1 * (i % 3) + 1e-8 * ((i * 7) % 5));
    const auto v = classify_periodicity(from_values(c), 1e-6, 5);
    CHECK(v.period == 3);
  }
  SUBCASE("chaotic logistic sequence is aperiodic") {
    std::vector<double> c{0.123};
    for (int i = 0; i < 200; ++i) c.push_back(4.0 * c.back() * (1.0 - c.back()));
    const auto v = classify_periodicity(from_values(c), 1e-4, 8);
    CHECK(v.kind == PeriodicityVerdict::Kind::Aperiodic);
    CHECK(v.residual > 1e-4);
  }
  SUBCASE("too few crossings") {
    try {
      classify_periodicity(from_values(std::vector<double>(11, 0.0)), 1e-6, 4);
      FAIL("expected TooFewCrossings");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::TooFewCrossings);
    }
  }
}

TEST_CASE("bifurcation scan keeps grid order and per-row failures") {
  IntegratorConfig cfg;
  cfg.t_transient = 2000.0;
  cfg.t_record = 500.0;
  const PlaneSection sec({0, 1, 0}, -0.588, CrossingDirection::Positive);
  const std::vector<double> grid{0.7138, 0.716, 0.7178};
  const auto serial = bifurcation_scan(grid, DelNegroParams{}, sec, 2, cfg, 1);
  const auto threaded = bifurcation_scan(grid, DelNegroParams{}, sec, 2, cfg, 3);
  REQUIRE(serial.size() == 3);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(serial[i].a == grid[i]);
    CHECK_FALSE(serial[i].error.has_value());
    CHECK(serial[i].coords == threaded[i].coords);
    CHECK(serial[i].coords.size() > 5);
  }
  std::ostringstream os;
  write_bifurcation_csv(os, serial);
  CHECK(os.str().rfind("a,coord\n", 0) == 0);

  IntegratorConfig bad = cfg;
  bad.divergence_bound = 1e-3;
  const auto failed = bifurcation_scan({0.7138}, DelNegroParams{}, sec, 2, bad, 1);
  REQUIRE(failed[0].error.has_value());
  CHECK(failed[0].error->find("Divergence") != std::string::npos);
}
