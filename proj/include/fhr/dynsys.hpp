#pragma once

// FitzHugh-Rinzel vector fields and trajectory generation.

#include <functional>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "fhr/ode.hpp"

namespace fhr {

// (v, w, z) for the Del Negro form, (v, w, y) for the original form.
using State3 = Vec<3>;

/// Del Negro et al. reparametrisation:
///   v' = a w - 4 v^3 + 4 v - z
///   w' = -(1 + 4 v + w)
///   z' = alpha (b v - (c z - z0) / d)
/// Defaults are the fixed coefficients of the bursting study; `a` is the
/// swept parameter.
struct DelNegroParams {
  double a = 0.71385;
  double alpha = 0.006;
  double b = 6.0;
  double c = 1.605;
  double z0 = 1.1;
  double d = 3.7;

  void validate() const;
};

/// Original form:
///   v' = v - v^3 - w + y + I
///   w' = phi (v + a - b w)
///   y' = eps (-v + c - d y)
/// I, eps, phi, a and c are Rinzel's values. b and d have no published value
/// for this form; the defaults (0.8, 1.0) are the usual FitzHugh-Nagumo
/// choices and should be treated as placeholders.
struct RinzelParams {
  double I = 0.3125;
  double eps = 0.0001;
  double phi = 0.08;
  double a = 0.7;
  double b = 0.8;
  double c = -0.775;
  double d = 1.0;

  void validate() const;
};

using ModelParams = std::variant<DelNegroParams, RinzelParams>;

State3 delnegro_rhs(const State3& s, const DelNegroParams& p);
State3 rinzel_rhs(const State3& s, const RinzelParams& p);

/// Jacobian of the Del Negro field, row-major: J[i][j] = d f_i / d x_j.
std::array<State3, 3> delnegro_jacobian(const State3& s, const DelNegroParams& p);

using VectorField = std::function<State3(const State3&)>;

VectorField make_field(const ModelParams& params);

enum class IntegrationMethod { FixedRk4, AdaptiveRk45 };

struct IntegratorConfig {
  IntegrationMethod method = IntegrationMethod::AdaptiveRk45;
  double step = 0.005;  // fixed-step RK4 only
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  double min_step = 1e-12;
  double divergence_bound = 1e6;
  double t_transient = 5e4;
  double t_record = 2e5;
  double sample_dt = 0.05;
  State3 initial_state{0.1, 0.0, 0.0};

  void validate() const;
  StepControl step_control() const;
};

/// Uniformly sampled post-transient path: samples[k] is the state at
/// t0 + k * sample_dt.
struct Trajectory {
  double t0 = 0.0;
  double sample_dt = 0.0;
  std::vector<State3> samples;

  std::size_t size() const { return samples.size(); }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * sample_dt; }
  double t_end() const { return time(samples.empty() ? 0 : samples.size() - 1); }
};

/// Integrates x' = rhs(x) from cfg.initial_state at t = 0 and records
/// [t_transient, t_transient + t_record] every sample_dt from the dense
/// output. Throws Error{Divergence} or Error{StepUnderflow}.
Trajectory integrate(const VectorField& rhs, const IntegratorConfig& cfg);

/// integrate() on the model's field; the result never contains the transient.
Trajectory attractor_sample(const ModelParams& params, const IntegratorConfig& cfg);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace fhr
