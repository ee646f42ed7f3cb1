// End-to-end acceptance checks. One PASS/FAIL line per criterion; the exit
// status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "fhr/complexity.hpp"
#include "fhr/dynsys.hpp"
#include "fhr/error.hpp"
#include "fhr/markov.hpp"
#include "fhr/ode.hpp"
#include "fhr/random.hpp"
#include "fhr/partition.hpp"
#include "fhr/refine.hpp"
#include "fhr/sections.hpp"
#include "fhr/sweep.hpp"
#include "oracles.hpp"

using namespace fhr;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  fmt::print("{} criterion {}: {}\n", ok ? "PASS" : "FAIL", id, detail);
  std::fflush(stdout);
}

// Runs one criterion; a thrown error counts as a failure.
void criterion(int id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, std::string("threw: ") + e.what());
  }
}

std::string config_path(const char* name) { return std::string(FHR_SOURCE_DIR) + "/configs/" + name; }

Trajectory attractor_at(const SweepConfig& cfg, double a) {
  auto p = std::get<DelNegroParams>(cfg.pipeline.model);
  p.a = a;
  return attractor_sample(p, cfg.pipeline.integrator);
}

const SweepRow* row_at(const std::vector<SweepRow>& rows, double a) {
  for (const auto& r : rows)
    if (std::abs(r.a - a) < 1e-9) return &r;
  return nullptr;
}

}  // namespace

int main() {
  const SweepConfig base = load_config(config_path("default.json"));

  criterion(1, [&] {
    bool ok = true;
    std::string detail;
    for (const auto& [a, period] : {std::pair{0.7138, 1}, std::pair{0.7178, 2}}) {
      const auto t0 = Clock::now();
      const Trajectory tr = attractor_at(base, a);
      const auto sec = base.pipeline.section.resolve(tr);
      const auto verdict = classify_periodicity(detect_crossings(tr, sec), base.pipeline.periodicity_tol,
                                                base.pipeline.max_period);
      const double dt = seconds_since(t0);
      const bool here = verdict.kind == PeriodicityVerdict::Kind::Periodic &&
                        verdict.period == period && verdict.residual < 1e-4 && dt < 60.0;
      ok = ok && here;
      detail += fmt::format("a={} {} spread={:.2e} in {:.1f}s; ", a, verdict.describe(),
                            verdict.residual, dt);
    }
    report(1, ok, detail);
  });

  // One serial and one threaded full sweep feed criteria 2, 5 and 10.
  std::vector<SweepRow> serial, threaded;
  double serial_time = 0.0, threaded_time = 0.0;
  std::string serial_error;
  try {
    SweepConfig c = base;
    c.pipeline.workers = 1;
    auto t0 = Clock::now();
    serial = run_sweep(c);
    serial_time = seconds_since(t0);
    c.pipeline.workers = 8;
    t0 = Clock::now();
    threaded = run_sweep(c);
    threaded_time = seconds_since(t0);
  } catch (const std::exception& e) {
    serial_error = e.what();
  }

  criterion(2, [&] {
    if (serial.empty()) throw std::runtime_error("sweep failed: " + serial_error);
    std::size_t positive = 0;
    for (const auto& r : serial)
      if (r.lambda[0] > 3.0 * r.lambda_se[0]) ++positive;
    const double frac = static_cast<double>(positive) / static_cast<double>(serial.size());
    report(2, frac >= 0.2 && serial_time < 600.0,
           fmt::format("{}/{} grid points with lambda1 > 3 SE ({:.1f}%), serial sweep {:.0f}s",
                       positive, serial.size(), 100.0 * frac, serial_time));
  });

  criterion(3, [&] {
    const double a = 0.71385;
    const Trajectory tr = attractor_at(base, a);
    const auto seq = symbolize(tr, base.pipeline.partition);
    const auto counts = count_transitions(seq);
    const std::set<std::pair<std::string, std::string>> allowed{
        {"v1", "v2"}, {"v1", "v3"}, {"v2", "v3"}, {"v3", "v1"}};
    std::int64_t inside = 0;
    const auto& L = counts.labels;
    for (Eigen::Index i = 0; i < counts.counts.rows(); ++i)
      for (Eigen::Index j = 0; j < counts.counts.cols(); ++j)
        if (allowed.count({L[static_cast<std::size_t>(i)], L[static_cast<std::size_t>(j)]}))
          inside += counts.counts(i, j);
    const double frac = counts.total() > 0 ? static_cast<double>(inside) / counts.total() : 0.0;
    report(3, frac >= 0.99,
           fmt::format("{}/{} transitions at a={} follow the three-region graph ({:.3f}%)", inside,
                       counts.total(), a, 100.0 * frac));
  });

  criterion(4, [&] {
    const double a = 0.7175;
    const std::set<Measure> m{Measure::EntropyRate, Measure::TopEntropy};
    SweepConfig c3 = base;
    c3.measures = m;
    SweepConfig c4 = load_config(config_path("advanced.json"));
    c4.measures = m;
    const auto r3 = compare_report({run_point(a, 0, c3)}, m).front();
    const auto r4 = compare_report({run_point(a, 0, c4)}, m).front();
    const bool accepted = validate_refinement(r3, r4);
    const bool ok = r4.h_rate >= r3.h_rate && std::abs(r4.gap()) < std::abs(r3.gap()) && accepted;
    report(4, ok,
           fmt::format("a={}: h_rate {:.4f} -> {:.4f}, |gap| {:.4f} -> {:.4f}, refinement {}", a,
                       r3.h_rate, r4.h_rate, std::abs(r3.gap()), std::abs(r4.gap()),
                       accepted ? "accepted" : "rejected"));
  });

  criterion(5, [&] {
    if (serial.empty()) throw std::runtime_error("sweep failed: " + serial_error);
    const SweepRow* lo = row_at(serial, 0.7138);
    const SweepRow* hi = row_at(serial, 0.7178);
    if (!lo || !hi) throw std::runtime_error("periodic endpoints missing from the grid");
    double peak = 0.0, peak_a = 0.0;
    for (const auto& r : serial)
      if (r.a > lo->a && r.a < hi->a && r.lz_norm > peak) {
        peak = r.lz_norm;
        peak_a = r.a;
      }
    const bool ok = lo->lz_norm < 0.15 && hi->lz_norm < 0.15 &&
                    peak > 2.0 * std::max(lo->lz_norm, hi->lz_norm);
    report(5, ok,
           fmt::format("lz_norm {:.4f} at a=0.7138, {:.4f} at a=0.7178, window max {:.4f} at a={}",
                       lo->lz_norm, hi->lz_norm, peak, peak_a));
  });

  criterion(6, [&] {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20240);
    std::uniform_int_distribution<int> size(2, 8);
    int bad = 0;
    double worst_row = 0.0, worst_res = 0.0, worst_excess = -1.0;
    for (int trial = 0; trial < 1000; ++trial) {
      const int n = size(rng);
      MarkovChain c;
      for (int i = 0; i < n; ++i) c.labels.push_back(std::to_string(i));
      c.P = oracle::random_chain(rng, n, 0.4);
      const auto pi = stationary(c);
      const double h = entropy_rate(c, pi);
      const double row = (c.P.rowwise().sum().array() - 1.0).abs().maxCoeff();
      const Eigen::RowVectorXd p = pi.pi.transpose();
      const double res = (p * c.P - p).lpNorm<Eigen::Infinity>();
      const double excess = h - subshift_entropy(c);
      worst_row = std::max(worst_row, row);
      worst_res = std::max(worst_res, res);
      worst_excess = std::max(worst_excess, excess);
      if (!(row <= 1e-12 && res < 1e-10 && h >= 0.0 && h <= std::log(n) + 1e-12 &&
            excess <= 1e-12))
        ++bad;
    }
    const double dt = seconds_since(t0);
    report(6, bad == 0 && dt < 30.0,
           fmt::format("1000 chains, {} violations; max row error {:.1e}, max |pi P - pi| {:.1e}, "
                       "max h - h_top {:.3f}, {:.2f}s",
                       bad, worst_row, worst_res, worst_excess, dt));
  });

  criterion(7, [&] {
    const auto t0 = Clock::now();
    std::size_t checked = 0, mismatched = 0;
    for (int len = 1; len <= 16; ++len)
      for (std::uint32_t v = 0; v < (1u << len); ++v) {
        const std::string s = oracle::bits_of(v, len);
        if (lz76(s).c != oracle::lz76_bruteforce(s)) ++mismatched;
        ++checked;
      }
    const double dt = seconds_since(t0);
    report(7, mismatched == 0 && dt < 120.0,
           fmt::format("{} strings, {} mismatches, {:.1f}s", checked, mismatched, dt));
  });

  criterion(8, [&] {
    // RK4 order on the harmonic oscillator.
    auto field = [](const Vec<2>& s) { return Vec<2>{s[1], -s[0]}; };
    auto error_at = [&](double h) {
      ClassicRk4<2, decltype(field)> rk(field, {1.0, 0.0}, 0.0, h, StepControl{});
      rk.advance_to(10.0, [](const DenseStep<2>&) {});
      return std::hypot(rk.state()[0] - std::cos(10.0), rk.state()[1] + std::sin(10.0));
    };
    bool rk_ok = true;
    std::string ratios;
    double prev = error_at(0.1);
    for (double h : {0.05, 0.025, 0.0125}) {
      const double e = error_at(h);
      rk_ok = rk_ok && prev / e >= 8.0 && prev / e <= 32.0;
      ratios += fmt::format("{:.2f} ", prev / e);
      prev = e;
    }

    // Lorenz largest exponent, Benettin against tangent QR.
    LyapunovConfig lc;
    lc.t_transient = 100.0;
    lc.t_average = 2000.0;
    lc.initial_state = {1.0, 1.0, 20.0};
    lc.divergence_bound = 1e3;
    lc.fail_if_not_converged = false;
    const auto benettin = lyapunov_spectrum(
        [](const State3& x) {
          const auto d = oracle::lorenz({x[0], x[1], x[2]});
          return State3{d[0], d[1], d[2]};
        },
        [](const State3& x) {
          const Eigen::Matrix3d J = oracle::lorenz_jacobian({x[0], x[1], x[2]});
          Jacobian3 out;
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) out[i][j] = J(i, j);
          return out;
        },
        lc);
    const auto qr = oracle::lorenz_spectrum_qr(100.0, 2000.0);
    const double rel = std::abs(benettin.exponents[0] - qr[0]) / std::abs(qr[0]);

    // Entropy rate against a long-walk Monte Carlo estimate.
    std::mt19937_64 rng(7);
    double worst_mc = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      MarkovChain c;
      c.labels = {"a", "b", "c", "d"};
      c.P = oracle::random_chain(rng, 4, 0.0);
      const double h = entropy_rate(c, stationary(c));
      const auto walk = simulate_walk(c, 1000000, derive_seed(7, static_cast<std::uint64_t>(trial)));
      double acc = 0.0;
      for (std::size_t k = 0; k + 1 < walk.size(); ++k)
        acc -= std::log(c.P(static_cast<Eigen::Index>(walk.events[k].symbol),
                            static_cast<Eigen::Index>(walk.events[k + 1].symbol)));
      worst_mc = std::max(worst_mc, std::abs(h - acc / static_cast<double>(walk.size() - 1)));
    }
    report(8, rk_ok && rel < 0.05 && worst_mc < 1e-3,
           fmt::format("RK4 error ratios {}; Lorenz lambda1 {:.4f} vs {:.4f} ({:.2f}%); "
                       "max |h - MC| over 5 chains {:.2e}",
                       ratios, benettin.exponents[0], qr[0], 100.0 * rel, worst_mc));
  });

  criterion(9, [&] {
    WordGrowthConfig wg;
    wg.max_length = 12;
    std::mt19937_64 rng(9);
    std::vector<std::uint32_t> coin(1000000);
    for (auto& b : coin) b = static_cast<std::uint32_t>(rng() >> 63);
    const double h_coin = word_growth_entropy(coin, 2, wg).value;
    std::vector<std::uint32_t> logistic;
    double x = 0.1234567;
    for (int i = 0; i < 1000000; ++i) {
      logistic.push_back(x >= 0.5 ? 1u : 0u);
      x = 4.0 * x * (1.0 - x);
    }
    const double h_log = word_growth_entropy(logistic, 2, wg).value;
    const double ln2 = std::log(2.0);
    const bool ok = std::abs(h_coin - ln2) <= 0.05 * ln2 && std::abs(h_log - ln2) <= 0.05 * ln2;
    report(9, ok,
           fmt::format("fair bits {:.4f}, logistic r=4 {:.4f}, ln 2 = {:.4f}", h_coin, h_log, ln2));
  });

  criterion(10, [&] {
    if (serial.empty() || threaded.empty()) throw std::runtime_error("sweep failed: " + serial_error);
    std::ostringstream a, b;
    write_sweep_csv(a, serial);
    write_sweep_csv(b, threaded);
    report(10, a.str() == b.str(),
           fmt::format("{} rows, {} bytes; workers=1 {:.0f}s, workers=8 {:.0f}s; outputs {}",
                       serial.size(), a.str().size(), serial_time, threaded_time,
                       a.str() == b.str() ? "identical" : "differ"));
  });

  return failures == 0 ? 0 : 1;
}
