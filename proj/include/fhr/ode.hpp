#pragma once

// Explicit Runge-Kutta steppers on fixed-size state vectors.
//
// DormandPrince is the 5(4) embedded pair with Hairer's fourth-order
// continuous extension; ClassicRk4 is the fixed-step classic scheme with a
// cubic Hermite interpolant. Both drive an observer with one callback per
// accepted step so callers can sample densely without storing every step.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "fhr/error.hpp"

namespace fhr {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
constexpr Vec<N> axpy(const Vec<N>& x, double h, const Vec<N>& k) {
  Vec<N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = x[i] + h * k[i];
  return out;
}

template <std::size_t N>
double dot(const Vec<N>& a, const Vec<N>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

template <std::size_t N>
double norm(const Vec<N>& a) {
  return std::sqrt(dot(a, a));
}

template <std::size_t N>
bool all_finite(const Vec<N>& a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

struct StepControl {
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  double min_step = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 1e-3;
  // Divergence is declared once the norm of the leading
  // `divergence_components` entries (all when zero) exceeds this bound.
  double divergence_bound = 1e6;
  std::size_t divergence_components = 0;
};

// Dense representation of one accepted step on [t0, t0 + h].
template <std::size_t N>
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  Vec<N> r1{}, r2{}, r3{}, r4{}, r5{};

  Vec<N> operator()(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    Vec<N> out{};
    for (std::size_t i = 0; i < N; ++i)
      out[i] = r1[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i])));
    return out;
  }
  double t1() const { return t0 + h; }
};

namespace detail {

template <std::size_t N>
void check_state(const Vec<N>& x, double t, const StepControl& ctl) {
  const std::size_t m =
      ctl.divergence_components == 0 ? N : std::min(ctl.divergence_components, N);
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) s += x[i] * x[i];
  if (!all_finite(x) || !(std::sqrt(s) <= ctl.divergence_bound)) {
    throw Error(ErrorKind::Divergence,
                "state left the divergence bound at t=" + std::to_string(t));
  }
}

}  // namespace detail

// Adaptive Dormand-Prince 5(4) for autonomous fields x' = f(x).
template <std::size_t N, class Field>
class DormandPrince {
 public:
  DormandPrince(Field field, Vec<N> x0, double t0, StepControl ctl)
      : f_(std::move(field)), x_(x0), t_(t0), ctl_(ctl), h_(ctl.initial_step) {
    detail::check_state(x_, t_, ctl_);
    k1_ = f_(x_);
  }

  double time() const { return t_; }
  const Vec<N>& state() const { return x_; }

  // Replaces the current state (e.g. after tangent renormalization).
  void reset_state(const Vec<N>& x) {
    x_ = x;
    k1_ = f_(x_);
  }

  // Integrates to exactly t_end, calling obs(const DenseStep<N>&) once per
  // accepted step.
  template <class Observer>
  void advance_to(double t_end, Observer&& obs) {
    while (t_ < t_end) {
      double h = std::min({h_, ctl_.max_step, t_end - t_});
      const bool clipped = h < h_;
      bool rejected = false;
      for (;;) {
        if (h < ctl_.min_step && t_ + h < t_end) {
          throw Error(ErrorKind::StepUnderflow,
                      "adaptive step fell below minimum at t=" + std::to_string(t_));
        }
        const double err = attempt(h);
        if (err <= 1.0) {
          double fac = err == 0.0 ? kMaxGrowth : 0.9 * std::pow(err, -0.2);
          fac = std::clamp(fac, kMinShrink, rejected ? 1.0 : kMaxGrowth);
          DenseStep<N> dense = make_dense(h);
          t_ = (t_end - t_ - h <= 0.0) ? t_end : t_ + h;
          x_ = y_new_;
          k1_ = k7_;
          detail::check_state(x_, t_, ctl_);
          if (!clipped || fac * h > h_) h_ = fac * h;
          obs(dense);
          break;
        }
        rejected = true;
        h *= std::max(kMinShrink, 0.9 * std::pow(err, -0.2));
        if (h < h_) h_ = h;
      }
    }
  }

 private:
  static constexpr double kMaxGrowth = 5.0;
  static constexpr double kMinShrink = 0.2;

  double attempt(double h) {
    constexpr double a21 = 1.0 / 5.0;
    constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                     a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                     a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                     a65 = -5103.0 / 18656.0;
    constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                     b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                     e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                     e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    Vec<N> y{};
    for (std::size_t i = 0; i < N; ++i) y[i] = x_[i] + h * a21 * k1_[i];
    k2_ = f_(y);
    for (std::size_t i = 0; i < N; ++i) y[i] = x_[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
    k3_ = f_(y);
    for (std::size_t i = 0; i < N; ++i)
      y[i] = x_[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
    k4_ = f_(y);
    for (std::size_t i = 0; i < N; ++i)
      y[i] = x_[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
    k5_ = f_(y);
    for (std::size_t i = 0; i < N; ++i)
      y[i] = x_[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] +
                          a65 * k5_[i]);
    k6_ = f_(y);
    for (std::size_t i = 0; i < N; ++i)
      y_new_[i] = x_[i] + h * (b1 * k1_[i] + b3 * k3_[i] + b4 * k4_[i] + b5 * k5_[i] +
                               b6 * k6_[i]);
    k7_ = f_(y_new_);

    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] +
                            e6 * k6_[i] + e7 * k7_[i]);
      const double sc =
          ctl_.abs_tol + ctl_.rel_tol * std::max(std::abs(x_[i]), std::abs(y_new_[i]));
      acc += (e / sc) * (e / sc);
    }
    const double err = std::sqrt(acc / static_cast<double>(N));
    return std::isfinite(err) ? err : std::numeric_limits<double>::max();
  }

  DenseStep<N> make_dense(double h) const {
    constexpr double d1 = -12715105075.0 / 11282082432.0,
                     d3 = 87487479700.0 / 32700410799.0,
                     d4 = -10690763975.0 / 1880347072.0,
                     d5 = 701980252875.0 / 199316789632.0,
                     d6 = -1453857185.0 / 822651844.0,
                     d7 = 69997945.0 / 29380423.0;
    DenseStep<N> d;
    d.t0 = t_;
    d.h = h;
    for (std::size_t i = 0; i < N; ++i) {
      const double diff = y_new_[i] - x_[i];
      const double bspl = h * k1_[i] - diff;
      d.r1[i] = x_[i];
      d.r2[i] = diff;
      d.r3[i] = bspl;
      d.r4[i] = diff - h * k7_[i] - bspl;
      d.r5[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] +
                     d6 * k6_[i] + d7 * k7_[i]);
    }
    return d;
  }

  Field f_;
  Vec<N> x_;
  double t_;
  StepControl ctl_;
  double h_;
  Vec<N> k1_{}, k2_{}, k3_{}, k4_{}, k5_{}, k6_{}, k7_{}, y_new_{};
};

// Classic fixed-step RK4. The dense representation is the cubic Hermite
// interpolant through both endpoints and their derivatives, packed into the
// same DenseStep layout.
template <std::size_t N, class Field>
class ClassicRk4 {
 public:
  ClassicRk4(Field field, Vec<N> x0, double t0, double step, StepControl ctl)
      : f_(std::move(field)), x_(x0), t_(t0), h_(step), ctl_(ctl) {
    detail::check_state(x_, t_, ctl_);
  }

  double time() const { return t_; }
  const Vec<N>& state() const { return x_; }
  void reset_state(const Vec<N>& x) { x_ = x; }

  template <class Observer>
  void advance_to(double t_end, Observer&& obs) {
    // Step count is derived from the span so the grid does not drift.
    const double span = t_end - t_;
    if (span <= 0.0) return;
    const auto steps = static_cast<long long>(std::ceil(span / h_ - 1e-9));
    const double t_start = t_;
    for (long long n = 0; n < steps; ++n) {
      const double ta = t_start + span * static_cast<double>(n) / static_cast<double>(steps);
      const double tb = (n + 1 == steps)
                            ? t_end
                            : t_start + span * static_cast<double>(n + 1) /
                                            static_cast<double>(steps);
      const double h = tb - ta;
      const Vec<N> k1 = f_(x_);
      const Vec<N> k2 = f_(axpy(x_, 0.5 * h, k1));
      const Vec<N> k3 = f_(axpy(x_, 0.5 * h, k2));
      const Vec<N> k4 = f_(axpy(x_, h, k3));
      Vec<N> y{};
      for (std::size_t i = 0; i < N; ++i)
        y[i] = x_[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      const Vec<N> fy = f_(y);
      DenseStep<N> d;
      d.t0 = ta;
      d.h = h;
      // Hermite cubic rewritten in the r1..r5 basis (r5 = 0).
      for (std::size_t i = 0; i < N; ++i) {
        const double diff = y[i] - x_[i];
        const double bspl = h * k1[i] - diff;
        d.r1[i] = x_[i];
        d.r2[i] = diff;
        d.r3[i] = bspl;
        d.r4[i] = diff - h * fy[i] - bspl;
        d.r5[i] = 0.0;
      }
      x_ = y;
      t_ = tb;
      detail::check_state(x_, t_, ctl_);
      obs(d);
    }
  }

 private:
  Field f_;
  Vec<N> x_;
  double t_;
  double h_;
  StepControl ctl_;
};

}  // namespace fhr
