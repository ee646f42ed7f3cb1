#pragma once

// Poincare sections: crossing detection, return maps, bifurcation scans and
// periodicity classification.

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fhr/dynsys.hpp"

namespace fhr {

enum class CrossingDirection { Positive, Negative, Both };

/// The plane {x : normal . x = offset}. The normal is normalised on
/// construction (the offset is rescaled with it, so the plane is unchanged).
class PlaneSection {
 public:
  PlaneSection(State3 normal, double offset, CrossingDirection direction);

  const State3& normal() const { return normal_; }
  double offset() const { return offset_; }
  CrossingDirection direction() const { return direction_; }

  double eval(const State3& x) const { return dot(normal_, x) - offset_; }

 private:
  State3 normal_;
  double offset_;
  CrossingDirection direction_;
};

struct Crossing {
  double t = 0.0;
  State3 state{};
  int direction = +1;  // +1: section function increasing
};

inline constexpr double kCrossingTolerance = 1e-10;

/// Crossings in time order. Each sign change between adjacent samples is
/// refined by bisection on the cubic interpolant through the four
/// surrounding samples (60 iterations max, or until |g| < 1e-10). Assumes
/// the section function changes sign at most once per sample interval.
std::vector<Crossing> detect_crossings(const Trajectory& traj, const PlaneSection& sec);

/// Selected coordinate: 0 = v, 1 = w, 2 = z.
using Axis = int;

std::vector<std::pair<double, double>> return_map(const std::vector<Crossing>& crossings,
                                                  Axis coord);

struct PeriodicityVerdict {
  enum class Kind { Periodic, Aperiodic, Undetermined };
  Kind kind = Kind::Undetermined;
  int period = 0;        // valid when kind == Periodic
  double residual = 0.0;  // worst tail mismatch of the chosen (or best) period

  std::string describe() const;
};

/// Smallest p <= max_period with |c_{k+p} - c_k| < tol for every k in the
/// tail window (the last 2 * max_period comparisons). Needs at least
/// 3 * max_period crossings.
PeriodicityVerdict classify_periodicity(const std::vector<Crossing>& crossings, double tol,
                                        int max_period);

struct BifurcationPoint {
  double a = 0.0;
  std::vector<double> coords;
  std::vector<Crossing> crossings;
  std::optional<std::string> error;
};

/// Crossing coordinates per grid value of `a`. Per-point failures are kept
/// in the row and the scan continues. Rows are returned in grid order
/// regardless of the worker count.
std::vector<BifurcationPoint> bifurcation_scan(const std::vector<double>& a_grid,
                                               const DelNegroParams& base,
                                               const PlaneSection& sec, Axis coord,
                                               const IntegratorConfig& cfg, int workers = 1);

void write_bifurcation_csv(std::ostream& os, const std::vector<BifurcationPoint>& rows);

}  // namespace fhr
