#include "fhr/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "fhr/ode.hpp"

namespace fhr {

void LyapunovConfig::validate() const {
  if (!(t_transient >= 0.0)) throw Error(ErrorKind::Config, "lyapunov t_transient must be >= 0");
  if (!(t_average > 0.0)) throw Error(ErrorKind::Config, "lyapunov t_average must be > 0");
  if (!(renorm_interval > 0.0) || renorm_interval > t_average)
    throw Error(ErrorKind::Config, "renorm_interval must lie in (0, t_average]");
  if (!(abs_tol > 0.0 && rel_tol > 0.0)) throw Error(ErrorKind::Config, "tolerances must be > 0");
  if (batches < 2) throw Error(ErrorKind::Config, "need at least two batches");
  if (history_stride < 1) throw Error(ErrorKind::Config, "history_stride must be >= 1");
}

namespace {

using Ext = Vec<12>;

template <class Field, class Jac>
LyapunovResult benettin(const Field& field, const Jac& jacobian, const LyapunovConfig& cfg) {
  cfg.validate();
  auto extended = [&](const Ext& y) {
    const State3 x{y[0], y[1], y[2]};
    const State3 fx = field(x);
    const Jacobian3 J = jacobian(x);
    Ext out{};
    out[0] = fx[0];
    out[1] = fx[1];
    out[2] = fx[2];
    for (int j = 0; j < 3; ++j) {
      const std::size_t o = 3 + 3 * static_cast<std::size_t>(j);
      for (int r = 0; r < 3; ++r)
        out[o + static_cast<std::size_t>(r)] =
            J[r][0] * y[o] + J[r][1] * y[o + 1] + J[r][2] * y[o + 2];
    }
    return out;
  };

  Ext y{};
  y[0] = cfg.initial_state[0];
  y[1] = cfg.initial_state[1];
  y[2] = cfg.initial_state[2];
  y[3] = y[7] = y[11] = 1.0;

  StepControl ctl;
  ctl.abs_tol = cfg.abs_tol;
  ctl.rel_tol = cfg.rel_tol;
  ctl.divergence_bound = cfg.divergence_bound;
  ctl.divergence_components = 3;
  DormandPrince<12, decltype(extended)> stepper(extended, y, 0.0, ctl);

  auto ignore = [](const DenseStep<12>&) {};

  // Modified Gram-Schmidt in place; returns the three stretch factors.
  auto orthonormalize = [](Ext& s) {
    std::array<double, 3> r{};
    std::array<State3, 3> v{};
    for (int j = 0; j < 3; ++j)
      for (int c = 0; c < 3; ++c) v[j][c] = s[3 + 3 * j + c];
    for (int j = 0; j < 3; ++j) {
      for (int i = 0; i < j; ++i) {
        const double proj = dot(v[j], v[i]);
        for (int c = 0; c < 3; ++c) v[j][c] -= proj * v[i][c];
      }
      r[j] = norm(v[j]);
      for (int c = 0; c < 3; ++c) v[j][c] /= r[j];
    }
    for (int j = 0; j < 3; ++j)
      for (int c = 0; c < 3; ++c) s[3 + 3 * j + c] = v[j][c];
    return r;
  };

  const double tau = cfg.renorm_interval;
  // Transient: renormalise on the same grid so the tangent frame is aligned
  // when averaging starts, but discard the growth.
  const auto transient_steps = static_cast<long long>(std::floor(cfg.t_transient / tau));
  for (long long k = 1; k <= transient_steps; ++k) {
    stepper.advance_to(static_cast<double>(k) * tau, ignore);
    Ext s = stepper.state();
    orthonormalize(s);
    stepper.reset_state(s);
  }
  if (stepper.time() < cfg.t_transient) {
    stepper.advance_to(cfg.t_transient, ignore);
    Ext s = stepper.state();
    orthonormalize(s);
    stepper.reset_state(s);
  }

  const double t_start = stepper.time();
  const auto intervals = static_cast<long long>(std::llround(cfg.t_average / tau));
  std::vector<std::array<double, 3>> local;
  local.reserve(static_cast<std::size_t>(intervals));
  LyapunovResult res;
  std::array<double, 3> sum{};
  for (long long k = 1; k <= intervals; ++k) {
    stepper.advance_to(t_start + static_cast<double>(k) * tau, ignore);
    Ext s = stepper.state();
    const auto r = orthonormalize(s);
    for (const double ri : r)
      if (!(ri > 0.0) || !std::isfinite(ri))
        throw Error(ErrorKind::Divergence, "tangent vectors degenerated");
    stepper.reset_state(s);
    std::array<double, 3> l{};
    for (int j = 0; j < 3; ++j) {
      l[j] = std::log(r[j]) / tau;
      sum[j] += l[j];
    }
    local.push_back(l);
    if (k % cfg.history_stride == 0) {
      std::array<double, 3> running{};
      for (int j = 0; j < 3; ++j) running[j] = sum[j] / static_cast<double>(k);
      res.history.push_back(running);
    }
  }

  const auto n = static_cast<double>(local.size());
  std::array<double, 3> mean{}, se{};
  for (int j = 0; j < 3; ++j) mean[j] = sum[j] / n;
  const std::size_t per_batch = local.size() / static_cast<std::size_t>(cfg.batches);
  if (per_batch == 0) throw Error(ErrorKind::Config, "too few renormalisations for the batches");
  for (int j = 0; j < 3; ++j) {
    std::vector<double> bm;
    for (int b = 0; b < cfg.batches; ++b) {
      double acc = 0.0;
      for (std::size_t k = 0; k < per_batch; ++k)
        acc += local[static_cast<std::size_t>(b) * per_batch + k][j];
      bm.push_back(acc / static_cast<double>(per_batch));
    }
    const double m = std::accumulate(bm.begin(), bm.end(), 0.0) / static_cast<double>(bm.size());
    double var = 0.0;
    for (double x : bm) var += (x - m) * (x - m);
    var /= static_cast<double>(bm.size() - 1);
    se[j] = std::sqrt(var / static_cast<double>(bm.size()));
  }

  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) { return mean[a] > mean[b]; });
  for (int j = 0; j < 3; ++j) {
    res.exponents[j] = mean[order[j]];
    res.standard_error[j] = se[order[j]];
  }
  for (auto& h : res.history) {
    const auto copy = h;
    for (int j = 0; j < 3; ++j) h[j] = copy[order[j]];
  }
  res.averaging_time = n * tau;
  res.converged = *std::max_element(se.begin(), se.end()) <= cfg.max_standard_error;
  if (!res.converged && cfg.fail_if_not_converged) {
    throw Error(ErrorKind::NotConverged,
                fmt::format("Lyapunov standard error {:.3g} above {:.3g}",
                            *std::max_element(se.begin(), se.end()), cfg.max_standard_error));
  }
  return res;
}

}  // namespace

LyapunovResult lyapunov_spectrum(const VectorField& field, const JacobianField& jacobian,
                                 const LyapunovConfig& cfg) {
  return benettin(field, jacobian, cfg);
}

LyapunovResult lyapunov_spectrum(const DelNegroParams& p, const LyapunovConfig& cfg) {
  p.validate();
  return benettin([&p](const State3& s) { return delnegro_rhs(s, p); },
                  [&p](const State3& s) { return delnegro_jacobian(s, p); }, cfg);
}

TopEntropyEstimate pesin_proxy(const LyapunovResult& lyap) {
  TopEntropyEstimate est;
  est.method = TopEntropyMethod::PesinProxy;
  est.unit = "nats/time";
  for (double l : lyap.exponents) est.value += std::max(l, 0.0);
  return est;
}

double pesin_per_crossing(const LyapunovResult& lyap, double mean_return_time) {
  return pesin_proxy(lyap).value * mean_return_time;
}

namespace {

struct LineFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& y, int first, int last) {
  // x = word length n, y[n - 1] = ln N(n)
  const int m = last - first + 1;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int n = first; n <= last; ++n) {
    const double x = n, v = y[static_cast<std::size_t>(n - 1)];
    sx += x;
    sy += v;
    sxx += x * x;
    sxy += x * v;
  }
  LineFit f;
  const double denom = m * sxx - sx * sx;
  f.slope = (m * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / m;
  const double mean = sy / m;
  double ss_tot = 0, ss_res = 0;
  for (int n = first; n <= last; ++n) {
    const double v = y[static_cast<std::size_t>(n - 1)];
    const double e = v - (f.intercept + f.slope * n);
    ss_res += e * e;
    ss_tot += (v - mean) * (v - mean);
  }
  // A flat series is fitted exactly by slope 0.
  f.r2 = ss_tot <= 1e-300 ? 1.0 : 1.0 - ss_res / ss_tot;
  return f;
}

}  // namespace

TopEntropyEstimate word_growth_entropy(const std::vector<std::uint32_t>& symbols,
                                       std::uint32_t alphabet_size, const WordGrowthConfig& cfg) {
  if (cfg.max_length < cfg.min_segment || cfg.min_segment < 2)
    throw Error(ErrorKind::Config, "word growth needs max_length >= min_segment >= 2");
  if (alphabet_size < 1) throw Error(ErrorKind::Config, "alphabet must be nonempty");
  const double bits_needed = cfg.max_length * std::log2(std::max<double>(alphabet_size, 2.0));
  if (bits_needed > 63.0) throw Error(ErrorKind::Config, "alphabet^max_length exceeds 64 bits");
  const auto L = static_cast<std::size_t>(cfg.max_length);
  if (symbols.size() < L)
    throw Error(ErrorKind::InsufficientData, "sequence shorter than the maximal word length");

  TopEntropyEstimate est;
  est.method = TopEntropyMethod::WordGrowth;
  est.unit = "nats/symbol";
  std::vector<std::uint64_t> words(symbols.size() - L + 1);
  std::vector<std::uint64_t> scratch;
  std::size_t last_count = 0;
  for (std::size_t n = 1; n <= L; ++n) {
    // words[i] is the base-|A| code of symbols[i .. i + n)
    for (std::size_t i = 0; i < words.size(); ++i) {
      const std::uint32_t s = symbols[i + n - 1];
      if (s >= alphabet_size) throw Error(ErrorKind::Config, "symbol outside the alphabet");
      words[i] = words[i] * alphabet_size + s;
    }
    scratch = words;
    std::sort(scratch.begin(), scratch.end());
    last_count = static_cast<std::size_t>(std::unique(scratch.begin(), scratch.end()) - scratch.begin());
    est.log_word_counts.push_back(std::log(static_cast<double>(last_count)));
  }
  if (static_cast<double>(last_count) > 0.5 * static_cast<double>(symbols.size())) {
    throw Error(ErrorKind::InsufficientData,
                fmt::format("{} distinct words of length {} in a sequence of {}: counts saturate",
                            last_count, L, symbols.size()));
  }

  // Best R^2 over contiguous ranges; ties go to the longer, then the later
  // range (the asymptotic regime).
  LineFit best;
  best.r2 = -std::numeric_limits<double>::infinity();
  const int Li = cfg.max_length;
  for (int first = 1; first + cfg.min_segment - 1 <= Li; ++first) {
    for (int last = first + cfg.min_segment - 1; last <= Li; ++last) {
      const LineFit f = fit_line(est.log_word_counts, first, last);
      const bool better = f.r2 > best.r2 + 1e-12;
      const bool tie = std::abs(f.r2 - best.r2) <= 1e-12;
      const int len = last - first + 1, best_len = est.fit_last - est.fit_first + 1;
      if (better || (tie && (len > best_len || (len == best_len && first > est.fit_first)))) {
        best = f;
        est.fit_first = first;
        est.fit_last = last;
      }
    }
  }
  est.value = std::max(best.slope, 0.0);
  est.r_squared = best.r2;
  for (int n = est.fit_first; n <= est.fit_last; ++n)
    est.residuals.push_back(est.log_word_counts[static_cast<std::size_t>(n - 1)] -
                            (best.intercept + best.slope * n));
  return est;
}

std::vector<std::uint32_t> bin_values(const std::vector<double>& values, int bins,
                                      double min_range) {
  if (bins < 1) throw Error(ErrorKind::Config, "bins must be >= 1");
  if (!(min_range >= 0.0)) throw Error(ErrorKind::Config, "min_range must be >= 0");
  std::vector<std::uint32_t> out(values.size(), 0);
  if (values.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = std::max(*hi_it, *lo_it + min_range);
  if (!(hi > lo)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double u = (values[i] - lo) / (hi - lo) * bins;
    out[i] = static_cast<std::uint32_t>(std::clamp(static_cast<int>(std::floor(u)), 0, bins - 1));
  }
  return out;
}

TopEntropyEstimate word_growth_entropy(const std::vector<Crossing>& crossings, Axis coord,
                                       const WordGrowthConfig& cfg) {
  if (coord < 0 || coord > 2) throw Error(ErrorKind::Config, "axis must be 0, 1 or 2");
  std::vector<double> values;
  values.reserve(crossings.size());
  for (const auto& c : crossings) values.push_back(c.state[coord]);
  return word_growth_entropy(bin_values(values, cfg.bins, cfg.min_range), static_cast<std::uint32_t>(cfg.bins),
                             cfg);
}

LZResult lz76(const std::vector<std::uint8_t>& s) {
  const std::size_t n = s.size();
  LZResult res;
  if (n == 0) return res;
  std::size_t c = 1, l = 1, i = 0, k = 1, kmax = 1;
  while (l < n) {
    if (s[i + k - 1] == s[l + k - 1]) {
      ++k;
      if (l + k > n) {
        ++c;
        break;
      }
    } else {
      kmax = std::max(k, kmax);
      ++i;
      if (i == l) {
        ++c;
        l += kmax;
        if (l + 1 > n) break;
        i = 0;
        k = 1;
        kmax = 1;
      } else {
        k = 1;
      }
    }
  }
  res.c = c;
  const double nd = static_cast<double>(n);
  // log2(1) = 0 would make a one-symbol string score zero.
  res.normalized = n > 1 ? static_cast<double>(c) * std::log2(nd) / nd : 1.0;
  return res;
}

LZResult lz76(const std::string& bits) {
  std::vector<std::uint8_t> v;
  v.reserve(bits.size());
  for (char ch : bits) {
    if (ch != '0' && ch != '1') throw Error(ErrorKind::Config, "binary string expected");
    v.push_back(static_cast<std::uint8_t>(ch - '0'));
  }
  return lz76(v);
}

std::vector<std::uint8_t> binarize_walk(const SymbolSequence& seq,
                                        const std::map<std::string, int>& reduction) {
  std::vector<int> bit(seq.alphabet.size(), -1);
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < seq.alphabet.size(); ++i) {
    const auto it = reduction.find(seq.alphabet[i]);
    if (it == reduction.end() || (it->second != 0 && it->second != 1)) {
      missing.push_back(seq.alphabet[i]);
    } else {
      bit[i] = it->second;
    }
  }
  if (!missing.empty())
    throw Error(ErrorKind::IncompleteReduction,
                fmt::format("reduction does not map {} to 0/1", fmt::join(missing, ", ")));
  std::vector<std::uint8_t> out;
  out.reserve(seq.size());
  for (const auto& e : seq.events) out.push_back(static_cast<std::uint8_t>(bit[e.symbol]));
  return out;
}

}  // namespace fhr
