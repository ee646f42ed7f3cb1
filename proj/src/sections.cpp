#include "fhr/sections.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "fhr/parallel.hpp"

namespace fhr {

PlaneSection::PlaneSection(State3 normal, double offset, CrossingDirection direction)
    : normal_(normal), offset_(offset), direction_(direction) {
  const double n = norm(normal_);
  if (!(n > 0.0) || !std::isfinite(n) || !std::isfinite(offset))
    throw Error(ErrorKind::Config, "section normal must be nonzero and finite");
  for (auto& c : normal_) c /= n;
  offset_ /= n;
}

namespace {

// Cubic Lagrange interpolation through samples i0..i0+3 at fractional
// position s measured from sample i0.
State3 lagrange4(const Trajectory& traj, std::size_t i0, double s) {
  const double l0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
  const double l1 = s * (s - 2.0) * (s - 3.0) / 2.0;
  const double l2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
  const double l3 = s * (s - 1.0) * (s - 2.0) / 6.0;
  const auto& p0 = traj.samples[i0];
  const auto& p1 = traj.samples[i0 + 1];
  const auto& p2 = traj.samples[i0 + 2];
  const auto& p3 = traj.samples[i0 + 3];
  State3 out{};
  for (int d = 0; d < 3; ++d) out[d] = l0 * p0[d] + l1 * p1[d] + l2 * p2[d] + l3 * p3[d];
  return out;
}

// Interpolated state at fraction u in [0,1] of the interval [k, k+1].
State3 interpolate(const Trajectory& traj, std::size_t k, double u) {
  const std::size_t n = traj.size();
  if (n < 4) {
    State3 out{};
    for (int d = 0; d < 3; ++d)
      out[d] = (1.0 - u) * traj.samples[k][d] + u * traj.samples[k + 1][d];
    return out;
  }
  std::size_t i0 = k == 0 ? 0 : k - 1;
  if (i0 + 3 >= n) i0 = n - 4;
  return lagrange4(traj, i0, static_cast<double>(k - i0) + u);
}

}  // namespace

std::vector<Crossing> detect_crossings(const Trajectory& traj, const PlaneSection& sec) {
  std::vector<Crossing> out;
  if (traj.size() < 2) return out;
  const bool want_pos = sec.direction() != CrossingDirection::Negative;
  const bool want_neg = sec.direction() != CrossingDirection::Positive;
  double g_prev = sec.eval(traj.samples[0]);
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double g_next = sec.eval(traj.samples[k + 1]);
    int dir = 0;
    if (g_prev < 0.0 && g_next >= 0.0) dir = +1;
    else if (g_prev > 0.0 && g_next <= 0.0) dir = -1;
    if ((dir == +1 && want_pos) || (dir == -1 && want_neg)) {
      // Bisection keeps the bracket [lo, hi] with sign(g(lo)) == sign(g_prev).
      double lo = 0.0, hi = 1.0;
      double u = 1.0;
      State3 x = traj.samples[k + 1];
      double g = g_next;
      for (int it = 0; it < 60 && std::abs(g) >= kCrossingTolerance; ++it) {
        u = 0.5 * (lo + hi);
        x = interpolate(traj, k, u);
        g = sec.eval(x);
        if ((g < 0.0) == (dir == +1)) lo = u;
        else hi = u;
      }
      out.push_back(Crossing{traj.time(k) + u * traj.sample_dt, x, dir});
    }
    g_prev = g_next;
  }
  return out;
}

std::vector<std::pair<double, double>> return_map(const std::vector<Crossing>& crossings,
                                                  Axis coord) {
  if (coord < 0 || coord > 2) throw Error(ErrorKind::Config, "axis must be 0, 1 or 2");
  if (crossings.size() < 2)
    throw Error(ErrorKind::TooFewCrossings, "return map needs at least 2 crossings");
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(crossings.size() - 1);
  for (std::size_t k = 0; k + 1 < crossings.size(); ++k)
    pairs.emplace_back(crossings[k].state[coord], crossings[k + 1].state[coord]);
  return pairs;
}

std::string PeriodicityVerdict::describe() const {
  switch (kind) {
    case Kind::Periodic: return fmt::format("periodic({})", period);
    case Kind::Aperiodic: return "aperiodic";
    case Kind::Undetermined: return "undetermined";
  }
  return "undetermined";
}

PeriodicityVerdict classify_periodicity(const std::vector<Crossing>& crossings, double tol,
                                        int max_period) {
  if (max_period < 1) throw Error(ErrorKind::Config, "max_period must be >= 1");
  const std::size_t n = crossings.size();
  const auto mp = static_cast<std::size_t>(max_period);
  if (n < 3 * mp)
    throw Error(ErrorKind::TooFewCrossings,
                fmt::format("periodicity test needs {} crossings, got {}", 3 * mp, n));
  const std::size_t window = 2 * mp;
  PeriodicityVerdict best;
  best.kind = PeriodicityVerdict::Kind::Aperiodic;
  best.residual = std::numeric_limits<double>::infinity();
  for (std::size_t p = 1; p <= mp; ++p) {
    double worst = 0.0;
    for (std::size_t k = n - window - p; k + p < n; ++k) {
      State3 diff{};
      for (int d = 0; d < 3; ++d) diff[d] = crossings[k + p].state[d] - crossings[k].state[d];
      worst = std::max(worst, norm(diff));
    }
    if (worst < tol) {
      return PeriodicityVerdict{PeriodicityVerdict::Kind::Periodic, static_cast<int>(p), worst};
    }
    best.residual = std::min(best.residual, worst);
  }
  return best;
}

std::vector<BifurcationPoint> bifurcation_scan(const std::vector<double>& a_grid,
                                               const DelNegroParams& base,
                                               const PlaneSection& sec, Axis coord,
                                               const IntegratorConfig& cfg, int workers) {
  if (coord < 0 || coord > 2) throw Error(ErrorKind::Config, "axis must be 0, 1 or 2");
  std::vector<BifurcationPoint> rows(a_grid.size());
  parallel_for_index(a_grid.size(), workers, [&](std::size_t i) {
    BifurcationPoint& row = rows[i];
    row.a = a_grid[i];
    try {
      DelNegroParams p = base;
      p.a = a_grid[i];
      const Trajectory traj = attractor_sample(p, cfg);
      row.crossings = detect_crossings(traj, sec);
      row.coords.reserve(row.crossings.size());
      for (const auto& c : row.crossings) row.coords.push_back(c.state[coord]);
    } catch (const Error& e) {
      row.error = fmt::format("{}: {}", to_string(e.kind()), e.what());
    }
  });
  return rows;
}

void write_bifurcation_csv(std::ostream& os, const std::vector<BifurcationPoint>& rows) {
  os << "a,coord\n";
  for (const auto& row : rows)
    for (double c : row.coords) fmt::print(os, "{:.10g},{:.12g}\n", row.a, c);
}

}  // namespace fhr
