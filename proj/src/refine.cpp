#include "fhr/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "fhr/error.hpp"
#include "fhr/random.hpp"

namespace fhr {

std::vector<FlaggedInterval> entropy_gap_scan(const std::vector<EntropyReport>& reports,
                                              double threshold) {
  for (std::size_t i = 1; i < reports.size(); ++i)
    if (!(reports[i - 1].a <= reports[i].a))
      throw Error(ErrorKind::Config, "entropy reports must be sorted by a");

  std::vector<FlaggedInterval> out;
  bool open = false;
  for (const auto& r : reports) {
    const double g = r.gap();
    if (std::isfinite(g) && g > threshold) {
      if (!open) {
        out.push_back(FlaggedInterval{r.a, r.a, r.a, g, {}});
        open = true;
      }
      auto& cur = out.back();
      cur.a_last = r.a;
      cur.members.push_back(r.a);
      if (g > cur.peak_gap) {
        cur.peak_gap = g;
        cur.a_peak = r.a;
      }
    } else {
      open = false;
    }
  }
  return out;
}

namespace {

std::uint64_t ipow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// Counts of base-A encoded words of length k.
std::unordered_map<std::uint64_t, std::uint64_t> word_counts(const std::vector<std::size_t>& s,
                                                             std::size_t alphabet, int k) {
  std::unordered_map<std::uint64_t, std::uint64_t> counts;
  if (k == 0 || s.size() < static_cast<std::size_t>(k)) return counts;
  const std::uint64_t top = ipow(alphabet, k - 1);
  std::uint64_t code = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i >= static_cast<std::size_t>(k)) code -= top * s[i - k];
    code = code * alphabet + s[i];
    if (i + 1 >= static_cast<std::size_t>(k)) ++counts[code];
  }
  return counts;
}

double block_entropy(const std::vector<std::size_t>& s, std::size_t alphabet, int k) {
  if (k == 0) return 0.0;
  const auto counts = word_counts(s, alphabet, k);
  double total = 0.0;
  for (const auto& [w, c] : counts) total += static_cast<double>(c);
  double h = 0.0;
  for (const auto& [w, c] : counts) {
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return h;
}

// Order-k model fitted to s, simulated for n symbols. Contexts without
// observed successors fall back to shorter contexts.
std::vector<std::size_t> simulate_order_k(const std::vector<std::size_t>& s,
                                          std::size_t alphabet, int k, std::size_t n,
                                          std::uint64_t seed) {
  std::vector<std::map<std::uint64_t, std::vector<std::uint64_t>>> tables(k + 1);
  for (int j = 0; j <= k; ++j) {
    for (std::size_t i = static_cast<std::size_t>(j); i < s.size(); ++i) {
      std::uint64_t ctx = 0;
      for (std::size_t q = i - j; q < i; ++q) ctx = ctx * alphabet + s[q];
      auto& row = tables[j][ctx];
      if (row.empty()) row.assign(alphabet, 0);
      ++row[s[i]];
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> out(s.begin(), s.begin() + k);
  out.reserve(n);
  while (out.size() < n) {
    const std::vector<std::uint64_t>* row = nullptr;
    for (int j = k; j >= 0 && row == nullptr; --j) {
      std::uint64_t ctx = 0;
      for (std::size_t q = out.size() - j; q < out.size(); ++q) ctx = ctx * alphabet + out[q];
      const auto it = tables[j].find(ctx);
      if (it != tables[j].end()) row = &it->second;
    }
    std::uint64_t total = 0;
    for (auto c : *row) total += c;
    const double u = uniform01(rng) * static_cast<double>(total);
    double acc = 0.0;
    std::size_t pick = alphabet - 1;
    for (std::size_t a = 0; a < alphabet; ++a) {
      acc += static_cast<double>((*row)[a]);
      if (u < acc) {
        pick = a;
        break;
      }
    }
    out.push_back(pick);
  }
  return out;
}

}  // namespace

double conditional_block_entropy(const std::vector<std::size_t>& symbols, std::size_t alphabet,
                                 int k) {
  if (k < 0) throw Error(ErrorKind::Config, "order must be >= 0");
  return block_entropy(symbols, alphabet, k + 1) - block_entropy(symbols, alphabet, k);
}

MarkovOrderResult markov_order_test(const SymbolSequence& seq, const MarkovOrderConfig& cfg) {
  if (cfg.max_order < 1) throw Error(ErrorKind::Config, "max_order must be >= 1");
  if (cfg.surrogates < 1) throw Error(ErrorKind::Config, "surrogates must be >= 1");
  const std::size_t A = std::max<std::size_t>(seq.alphabet.size(), 1);
  const double needed =
      cfg.min_samples_per_context * std::pow(static_cast<double>(A), cfg.max_order);
  if (static_cast<double>(seq.size()) < needed)
    throw Error(ErrorKind::InsufficientData,
                fmt::format("order test up to {} needs {:.0f} symbols, got {}", cfg.max_order,
                            needed, seq.size()));
  const auto s = seq.symbols();

  MarkovOrderResult res;
  for (int k = 0; k <= cfg.max_order; ++k)
    res.conditional_entropy.push_back(conditional_block_entropy(s, A, k));
  res.bound.assign(cfg.max_order, 0.0);
  res.best_order = cfg.max_order;
  for (int k = 1; k < cfg.max_order; ++k) {
    double bound = 0.0;
    for (int r = 0; r < cfg.surrogates; ++r) {
      const auto sur = simulate_order_k(s, A, k, s.size(),
                                        derive_seed(cfg.seed, static_cast<std::uint64_t>(
                                                                  k * 1000 + r)));
      const double drop =
          conditional_block_entropy(sur, A, k) - conditional_block_entropy(sur, A, k + 1);
      bound = std::max(bound, drop);
    }
    res.bound[k] = bound;
    const double drop = res.conditional_entropy[k] - res.conditional_entropy[k + 1];
    if (drop <= bound + 1e-12) {
      res.best_order = k;
      break;
    }
  }
  return res;
}

PointSampling point_sampling_from_string(const std::string& s) {
  if (s == "interior") return PointSampling::Interior;
  if (s == "entry") return PointSampling::Entry;
  if (s == "exit") return PointSampling::Exit;
  throw Error(ErrorKind::Config, "point sampling must be interior, entry or exit");
}

std::vector<TaggedPoint> tag_points(const Trajectory& traj, const PartitionSpec& spec,
                                    const SymbolSequence& seq, std::size_t stride,
                                    PointSampling sampling) {
  std::vector<TaggedPoint> out;
  if (stride == 0 || sampling != PointSampling::Interior) stride = 1;
  const double dt = traj.sample_dt;
  const auto n = static_cast<long long>(traj.size());
  for (std::size_t e = 1; e + 1 < seq.events.size(); ++e) {
    const auto& ev = seq.events[e];
    const auto first = std::max(0LL, static_cast<long long>(std::llround((ev.entry_t - traj.t0) / dt)));
    const auto end = std::min(n, first + static_cast<long long>(std::llround(ev.dwell / dt)));
    auto in_region = [&](long long k) {
      const auto lab = classify_point(traj.samples[static_cast<std::size_t>(k)], spec);
      return lab && *lab == ev.symbol;
    };
    auto tag = [&](long long k) {
      out.push_back(TaggedPoint{traj.samples[static_cast<std::size_t>(k)], ev.symbol,
                                seq.events[e - 1].symbol, seq.events[e + 1].symbol});
    };
    if (sampling == PointSampling::Entry) {
      for (long long k = first; k < end; ++k)
        if (in_region(k)) {
          tag(k);
          break;
        }
    } else if (sampling == PointSampling::Exit) {
      for (long long k = end - 1; k >= first; --k)
        if (in_region(k)) {
          tag(k);
          break;
        }
    } else {
      for (long long k = first; k < end; ++k)
        if (static_cast<std::size_t>(k) % stride == 0 && in_region(k)) tag(k);
    }
  }
  return out;
}

std::string to_string(Evidence e) {
  switch (e) {
    case Evidence::EntropyGap: return "entropy-gap";
    case Evidence::MarkovOrder: return "markov-order";
    case Evidence::ClusterSplit: return "cluster-split";
  }
  return "unknown";
}

namespace {

double dist2(const State3& a, const State3& b) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

struct TwoMeans {
  State3 c[2]{};
  std::vector<int> assign;
  double inertia = std::numeric_limits<double>::infinity();
};

TwoMeans two_means(const std::vector<State3>& x, const RefineConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TwoMeans best;
  const std::size_t n = x.size();
  for (int r = 0; r < cfg.restarts; ++r) {
    TwoMeans cur;
    cur.assign.assign(n, 0);
    // k-means++ seeding.
    cur.c[0] = x[std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * n))];
    double total = 0.0;
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) total += d[i] = dist2(x[i], cur.c[0]);
    if (total == 0.0) {
      cur.c[1] = cur.c[0];
    } else {
      const double u = uniform01(rng) * total;
      double acc = 0.0;
      std::size_t pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
      cur.c[1] = x[pick];
    }
    for (int it = 0; it < cfg.max_iterations; ++it) {
      bool changed = it == 0;
      State3 sum[2]{};
      std::size_t cnt[2]{};
      for (std::size_t i = 0; i < n; ++i) {
        const int g = dist2(x[i], cur.c[1]) < dist2(x[i], cur.c[0]) ? 1 : 0;
        if (g != cur.assign[i]) changed = true;
        cur.assign[i] = g;
        for (int q = 0; q < 3; ++q) sum[g][q] += x[i][q];
        ++cnt[g];
      }
      for (int g = 0; g < 2; ++g)
        if (cnt[g] > 0)
          for (int q = 0; q < 3; ++q) cur.c[g][q] = sum[g][q] / static_cast<double>(cnt[g]);
      if (!changed) break;
    }
    cur.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) cur.inertia += dist2(x[i], cur.c[cur.assign[i]]);
    if (cur.inertia < best.inertia) best = std::move(cur);
  }
  return best;
}

double silhouette(const std::vector<State3>& x, const std::vector<int>& assign,
                  std::size_t max_points) {
  const std::size_t n = x.size();
  const std::size_t step = std::max<std::size_t>(1, (n + max_points - 1) / max_points);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; i += step) idx.push_back(i);
  std::size_t size[2]{};
  for (auto i : idx) ++size[assign[i]];
  if (size[0] == 0 || size[1] == 0) return 0.0;
  double total = 0.0;
  for (auto i : idx) {
    double sum[2]{};
    for (auto j : idx)
      if (j != i) sum[assign[j]] += std::sqrt(dist2(x[i], x[j]));
    const int own = assign[i];
    if (size[own] < 2) continue;  // singleton: s = 0
    const double a = sum[own] / static_cast<double>(size[own] - 1);
    const double b = sum[1 - own] / static_cast<double>(size[1 - own]);
    const double m = std::max(a, b);
    if (m > 0.0) total += (b - a) / m;
  }
  return total / static_cast<double>(idx.size());
}

double js_divergence_bits(const std::vector<double>& p, const std::vector<double>& q) {
  double sp = 0.0, sq = 0.0;
  for (double v : p) sp += v;
  for (double v : q) sq += v;
  if (sp == 0.0 || sq == 0.0) return 0.0;
  auto kl_to_mix = [](double a, double m) { return a > 0.0 ? a * std::log2(a / m) : 0.0; };
  double js = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = p[i] / sp, b = q[i] / sq, m = 0.5 * (a + b);
    js += 0.5 * kl_to_mix(a, m) + 0.5 * kl_to_mix(b, m);
  }
  return std::max(0.0, js);
}

}  // namespace

RefinementSuggestion suggest_refinement(const std::vector<TaggedPoint>& points,
                                        const PartitionSpec& spec, const RefineConfig& cfg) {
  spec.validate();
  if (cfg.restarts < 1 || cfg.max_iterations < 1 || cfg.silhouette_points < 2)
    throw Error(ErrorKind::Config, "invalid refine configuration");
  const std::size_t R = spec.regions.size();
  const std::size_t ctx = R * R;

  RefinementSuggestion out;
  out.evidence = {Evidence::ClusterSplit};
  for (std::size_t r = 0; r < R; ++r) {
    std::vector<const TaggedPoint*> members;
    for (const auto& p : points)
      if (p.region == r) members.push_back(&p);
    RegionScore rs;
    rs.label = spec.regions[r].label;
    rs.points = members.size();
    if (members.size() < cfg.min_points) {
      out.candidates.push_back(rs);
      continue;
    }

    State3 mu{}, sd{};
    for (const auto* p : members)
      for (int q = 0; q < 3; ++q) mu[q] += p->x[q];
    for (int q = 0; q < 3; ++q) mu[q] /= static_cast<double>(members.size());
    for (const auto* p : members)
      for (int q = 0; q < 3; ++q) sd[q] += (p->x[q] - mu[q]) * (p->x[q] - mu[q]);
    for (int q = 0; q < 3; ++q) {
      sd[q] = std::sqrt(sd[q] / static_cast<double>(members.size()));
      if (!(sd[q] > 0.0)) sd[q] = 1.0;
    }
    auto standardize = [&](const State3& x) {
      State3 y{};
      for (int q = 0; q < 3; ++q) y[q] = (x[q] - mu[q]) / sd[q];
      return y;
    };

    const std::size_t step =
        std::max<std::size_t>(1, (members.size() + cfg.max_points - 1) / cfg.max_points);
    std::vector<State3> sample;
    for (std::size_t i = 0; i < members.size(); i += step)
      sample.push_back(standardize(members[i]->x));
    const TwoMeans km = two_means(sample, cfg, derive_seed(cfg.seed, r));
    rs.silhouette = silhouette(sample, km.assign, cfg.silhouette_points);

    std::vector<double> hist[2] = {std::vector<double>(ctx, 0.0), std::vector<double>(ctx, 0.0)};
    for (const auto* p : members) {
      const State3 y = standardize(p->x);
      const int g = dist2(y, km.c[1]) < dist2(y, km.c[0]) ? 1 : 0;
      hist[g][p->prev * R + p->next] += 1.0;
    }
    rs.divergence = js_divergence_bits(hist[0], hist[1]);
    rs.score = rs.silhouette * rs.divergence;

    // Bisector n.y >= n.m in standardized space, n = c1 - c0, m = midpoint.
    State3 normal{};
    double offset = 0.0;
    for (int q = 0; q < 3; ++q) {
      const double nq = km.c[1][q] - km.c[0][q];
      const double mq = 0.5 * (km.c[1][q] + km.c[0][q]);
      normal[q] = nq / sd[q];
      offset += nq * mq + normal[q] * mu[q];
    }
    rs.cut = Predicate::half_space(normal, offset);
    for (int q = 0; q < 3; ++q) {
      rs.centroid_a[q] = mu[q] + sd[q] * km.c[0][q];
      rs.centroid_b[q] = mu[q] + sd[q] * km.c[1][q];
    }
    out.candidates.push_back(rs);
  }
  std::stable_sort(out.candidates.begin(), out.candidates.end(),
                   [](const RegionScore& a, const RegionScore& b) { return a.score > b.score; });
  if (out.candidates.empty() || !(out.candidates.front().score >= cfg.score_floor))
    throw Error(ErrorKind::NoCandidate,
                fmt::format("no region split scores above {}", cfg.score_floor));
  out.target = out.candidates.front().label;
  out.cut = out.candidates.front().cut;
  out.score = out.candidates.front().score;
  return out;
}

PartitionSpec apply_suggestion(const PartitionSpec& spec, const RefinementSuggestion& s,
                               std::optional<std::pair<std::string, std::string>> labels) {
  return split_region(spec, s.target, s.cut, std::move(labels));
}

bool validate_refinement(const EntropyReport& before, const EntropyReport& after) {
  if (std::abs(before.a - after.a) > 1e-12 * std::max(1.0, std::abs(before.a)))
    throw Error(ErrorKind::MismatchedParameters,
                fmt::format("reports are for a={} and a={}", before.a, after.a));
  return after.h_rate >= before.h_rate && std::abs(after.gap()) <= std::abs(before.gap());
}

std::vector<RegionOccupancy> region_occupancy(const SymbolSequence& seq, double threshold) {
  std::vector<RegionOccupancy> out(seq.alphabet.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i].label = seq.alphabet[i];
  for (const auto& e : seq.events) ++out[e.symbol].visits;
  const double n = static_cast<double>(seq.events.size());
  for (auto& o : out) {
    o.fraction = n > 0.0 ? static_cast<double>(o.visits) / n : 0.0;
    o.vanished = o.fraction <= threshold;
  }
  return out;
}

nlohmann::json suggestion_to_json(const RefinementSuggestion& s) {
  nlohmann::json j;
  j["target"] = s.target;
  j["cut"] = predicate_to_json(s.cut);
  j["score"] = s.score;
  auto& ev = j["evidence"] = nlohmann::json::array();
  for (auto e : s.evidence) ev.push_back(to_string(e));
  auto& c = j["candidates"] = nlohmann::json::array();
  for (const auto& r : s.candidates) {
    c.push_back({{"label", r.label},
                 {"points", r.points},
                 {"silhouette", r.silhouette},
                 {"divergence_bits", r.divergence},
                 {"score", r.score},
                 {"centroids", {r.centroid_a, r.centroid_b}}});
  }
  return j;
}

nlohmann::json order_result_to_json(const MarkovOrderResult& r) {
  return {{"best_order", r.best_order},
          {"conditional_entropy", r.conditional_entropy},
          {"bound", r.bound}};
}

}  // namespace fhr
