#include "fhr/dynsys.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace fhr {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::Config, what);
}

bool finite_all(std::initializer_list<double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

void DelNegroParams::validate() const {
  require(finite_all({a, alpha, b, c, z0, d}), "Del Negro parameters must be finite");
  require(d != 0.0, "Del Negro parameter d must be nonzero");
  require(alpha > 0.0, "Del Negro parameter alpha must be positive");
}

void RinzelParams::validate() const {
  require(finite_all({I, eps, phi, a, b, c, d}), "Rinzel parameters must be finite");
  require(eps > 0.0, "Rinzel parameter eps must be positive");
  require(b != 0.0, "Rinzel parameter b must be nonzero");
}

State3 delnegro_rhs(const State3& s, const DelNegroParams& p) {
  const double v = s[0], w = s[1], z = s[2];
  return {p.a * w - 4.0 * v * v * v + 4.0 * v - z,
          -(1.0 + 4.0 * v + w),
          p.alpha * (p.b * v - (p.c * z - p.z0) / p.d)};
}

State3 rinzel_rhs(const State3& s, const RinzelParams& p) {
  const double v = s[0], w = s[1], y = s[2];
  return {v - v * v * v - w + y + p.I,
          p.phi * (v + p.a - p.b * w),
          p.eps * (-v + p.c - p.d * y)};
}

std::array<State3, 3> delnegro_jacobian(const State3& s, const DelNegroParams& p) {
  const double v = s[0];
  return {State3{-12.0 * v * v + 4.0, p.a, -1.0},
          State3{-4.0, -1.0, 0.0},
          State3{p.alpha * p.b, 0.0, -p.alpha * p.c / p.d}};
}

VectorField make_field(const ModelParams& params) {
  return std::visit(
      [](const auto& p) -> VectorField {
        p.validate();
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, DelNegroParams>) {
          return [p](const State3& s) { return delnegro_rhs(s, p); };
        } else {
          return [p](const State3& s) { return rinzel_rhs(s, p); };
        }
      },
      params);
}

void IntegratorConfig::validate() const {
  require(std::isfinite(t_transient) && t_transient >= 0.0, "t_transient must be >= 0");
  require(std::isfinite(t_record) && t_record > 0.0, "t_record must be > 0");
  require(std::isfinite(sample_dt) && sample_dt > 0.0, "sample_dt must be > 0");
  require(abs_tol > 0.0 && rel_tol > 0.0, "tolerances must be > 0");
  require(min_step > 0.0, "min_step must be > 0");
  require(divergence_bound > 0.0, "divergence_bound must be > 0");
  if (method == IntegrationMethod::FixedRk4) require(step > 0.0, "step must be > 0");
  require(all_finite(initial_state), "initial state must be finite");
}

StepControl IntegratorConfig::step_control() const {
  StepControl ctl;
  ctl.abs_tol = abs_tol;
  ctl.rel_tol = rel_tol;
  ctl.min_step = min_step;
  ctl.divergence_bound = divergence_bound;
  return ctl;
}

namespace {

template <class Stepper>
Trajectory record(Stepper& stepper, const IntegratorConfig& cfg) {
  auto ignore = [](const DenseStep<3>&) {};
  stepper.advance_to(cfg.t_transient, ignore);

  Trajectory traj;
  traj.t0 = cfg.t_transient;
  traj.sample_dt = cfg.sample_dt;
  const auto count =
      static_cast<std::size_t>(std::floor(cfg.t_record / cfg.sample_dt + 1e-9)) + 1;
  traj.samples.reserve(count);
  traj.samples.push_back(stepper.state());

  std::size_t next = 1;
  const double t_end = traj.time(count - 1);
  auto sampler = [&](const DenseStep<3>& step) {
    while (next < count) {
      const double t = traj.time(next);
      if (t > step.t1()) break;
      traj.samples.push_back(step(t));
      ++next;
    }
  };
  stepper.advance_to(t_end, sampler);
  while (traj.samples.size() < count) traj.samples.push_back(stepper.state());
  for (const auto& s : traj.samples) {
    if (!all_finite(s))
      throw Error(ErrorKind::Divergence, "non-finite state in recorded trajectory");
  }
  return traj;
}

template <class Field>
Trajectory integrate_with(const Field& rhs, const IntegratorConfig& cfg) {
  cfg.validate();
  const StepControl ctl = cfg.step_control();
  if (cfg.method == IntegrationMethod::FixedRk4) {
    ClassicRk4<3, const Field&> stepper(rhs, cfg.initial_state, 0.0, cfg.step, ctl);
    return record(stepper, cfg);
  }
  DormandPrince<3, const Field&> stepper(rhs, cfg.initial_state, 0.0, ctl);
  return record(stepper, cfg);
}

}  // namespace

Trajectory integrate(const VectorField& rhs, const IntegratorConfig& cfg) {
  return integrate_with(rhs, cfg);
}

Trajectory attractor_sample(const ModelParams& params, const IntegratorConfig& cfg) {
  return std::visit(
      [&](const auto& p) {
        p.validate();
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, DelNegroParams>) {
          return integrate_with([&p](const State3& s) { return delnegro_rhs(s, p); }, cfg);
        } else {
          return integrate_with([&p](const State3& s) { return rinzel_rhs(s, p); }, cfg);
        }
      },
      params);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,v,w,z\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& s = traj.samples[k];
    fmt::print(os, "{:.10g},{:.12g},{:.12g},{:.12g}\n", traj.time(k), s[0], s[1], s[2]);
  }
}

}  // namespace fhr
