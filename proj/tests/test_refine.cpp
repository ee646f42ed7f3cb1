#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "fhr/error.hpp"
#include "fhr/refine.hpp"
#include "oracles.hpp"

using namespace fhr;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an fhr::Error");
  return ErrorKind::Config;
}

SymbolSequence sequence_of(const std::vector<std::size_t>& s, std::size_t alphabet) {
  SymbolSequence seq;
  for (std::size_t i = 0; i < alphabet; ++i) seq.alphabet.push_back("s" + std::to_string(i));
  for (std::size_t k = 0; k < s.size(); ++k)
    seq.events.push_back(SymbolEvent{s[k], static_cast<double>(k), 1.0});
  return seq;
}

std::vector<EntropyReport> reports_from_gaps(const std::vector<double>& gaps) {
  std::vector<EntropyReport> out;
  for (std::size_t i = 0; i < gaps.size(); ++i)
    out.push_back(EntropyReport{0.7 + 0.001 * static_cast<double>(i), 0.1, 0.1 + gaps[i], 0.5});
  return out;
}

PartitionSpec two_regions() {
  PartitionSpec s;
  s.name = "two";
  s.regions = {{"A", Predicate::half_space({-1, 0, 0}, -2.5), ""},
               {"B", Predicate::half_space({1, 0, 0}, 100.0), ""}};
  return s;
}

// Two Gaussian blobs inside region 0, each with its own context.
std::vector<TaggedPoint> two_blobs(std::uint64_t seed, bool distinct_contexts) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.3);
  std::vector<TaggedPoint> pts;
  for (int i = 0; i < 600; ++i) {
    const bool right = i % 2 == 1;
    const State3 x{(right ? 1.5 : -1.5) + g(rng), g(rng), g(rng)};
    const std::size_t next = distinct_contexts ? (right ? 1 : 0) : rng() % 2;
    pts.push_back(TaggedPoint{x, 0, 1, next});
  }
  return pts;
}

}  // namespace

TEST_CASE("gap scan groups consecutive flagged reports") {
  CHECK(entropy_gap_scan({}, 0.2).empty());
  const auto flagged = entropy_gap_scan(reports_from_gaps({0.0, 0.3, 0.5, 0.1, 0.25, 0.0}), 0.2);
  REQUIRE(flagged.size() == 2);
  CHECK(flagged[0].members.size() == 2);
  CHECK(flagged[0].a_first == doctest::Approx(0.701));
  CHECK(flagged[0].a_last == doctest::Approx(0.702));
  CHECK(flagged[0].a_peak == doctest::Approx(0.702));
  CHECK(flagged[0].peak_gap == doctest::Approx(0.5));
  CHECK(flagged[1].members.size() == 1);
}

TEST_CASE("gap scan treats missing values as breaks") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto flagged = entropy_gap_scan(reports_from_gaps({0.3, nan, 0.3}), 0.2);
  CHECK(flagged.size() == 2);
  auto reps = reports_from_gaps({0.3, 0.3});
  std::swap(reps[0], reps[1]);
  CHECK(kind_of([&] { entropy_gap_scan(reps, 0.2); }) == ErrorKind::Config);
}

TEST_CASE("raising the threshold only removes flags") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.1, 0.6);
  std::vector<double> gaps(200);
  for (auto& g : gaps) g = u(rng);
  const auto reps = reports_from_gaps(gaps);
  std::size_t prev = std::numeric_limits<std::size_t>::max();
  for (double th : {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.7}) {
    std::size_t n = 0;
    for (const auto& f : entropy_gap_scan(reps, th)) {
      n += f.members.size();
      CHECK(f.peak_gap > th);
    }
    CHECK(n <= prev);
    prev = n;
  }
  CHECK(prev == 0);
}

TEST_CASE("conditional block entropy matches plug-in estimates") {
  std::mt19937_64 rng(3);
  std::vector<std::size_t> s;
  for (int i = 0; i < 200000; ++i) s.push_back(rng() % 3);
  CHECK(conditional_block_entropy(s, 3, 0) == doctest::Approx(std::log(3.0)).epsilon(1e-3));
  CHECK(conditional_block_entropy(s, 3, 1) ==
        doctest::Approx(oracle::plugin_conditional_entropy(s, 3)).epsilon(1e-4));
  CHECK(kind_of([&] { conditional_block_entropy(s, 3, -1); }) == ErrorKind::Config);
}

TEST_CASE("symbol-wise coding never raises block entropy") {
  // Plug-in block entropies can only drop under a per-symbol map, which is
  // the form of the merge inequality that holds without further assumptions.
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 4;
    const auto P = oracle::random_chain(rng, n, 0.3);
    std::vector<std::size_t> s{0};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    while (s.size() < 20000) {
      double r = u(rng), acc = 0.0;
      std::size_t j = 0;
      for (; j + 1 < static_cast<std::size_t>(n); ++j) {
        acc += P(static_cast<int>(s.back()), static_cast<int>(j));
        if (r < acc) break;
      }
      s.push_back(j);
    }
    std::vector<std::size_t> f(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) f[i] = s[i] == 0 ? 1 : s[i];
    double hs = 0.0, hf = 0.0;
    for (int k = 0; k < 4; ++k) {
      hs += conditional_block_entropy(s, static_cast<std::size_t>(n), k);
      hf += conditional_block_entropy(f, static_cast<std::size_t>(n), k);
      CHECK(hf <= hs + 1e-12);
    }
  }
}

TEST_CASE("order test on known sources") {
  MarkovOrderConfig cfg;
  std::mt19937_64 rng(11);
  std::bernoulli_distribution flip(0.1);
  SUBCASE("first-order chain") {
    std::vector<std::size_t> s{0};
    while (s.size() < 30000) s.push_back(flip(rng) ? 1 - s.back() : s.back());
    const auto r = markov_order_test(sequence_of(s, 2), cfg);
    CHECK(r.best_order == 1);
    CHECK(r.conditional_entropy.size() == 4);
    CHECK(r.conditional_entropy[1] < r.conditional_entropy[0]);
  }
  SUBCASE("second-order source") {
    std::vector<std::size_t> s{0, 1};
    while (s.size() < 30000) {
      const std::size_t x = s[s.size() - 1] ^ s[s.size() - 2];
      s.push_back(flip(rng) ? 1 - x : x);
    }
    const auto r = markov_order_test(sequence_of(s, 2), cfg);
    CHECK(r.best_order == 2);
    CHECK(r.conditional_entropy[1] - r.conditional_entropy[2] > r.bound[1]);
  }
  SUBCASE("deterministic cycle") {
    std::vector<std::size_t> s;
    for (int i = 0; i < 3000; ++i) s.push_back(static_cast<std::size_t>(i % 3));
    const auto r = markov_order_test(sequence_of(s, 3), cfg);
    CHECK(r.best_order == 1);
    CHECK(r.conditional_entropy[1] == doctest::Approx(0.0));
  }
  SUBCASE("seeded runs repeat") {
    std::vector<std::size_t> s{0};
    while (s.size() < 5000) s.push_back(rng() % 3);
    const auto a = markov_order_test(sequence_of(s, 3), cfg);
    const auto b = markov_order_test(sequence_of(s, 3), cfg);
    CHECK(a.bound == b.bound);
    CHECK(order_result_to_json(a) == order_result_to_json(b));
  }
  SUBCASE("errors") {
    CHECK(kind_of([&] { markov_order_test(sequence_of({0, 1, 2, 0}, 3), cfg); }) ==
          ErrorKind::InsufficientData);
    MarkovOrderConfig bad = cfg;
    bad.max_order = 0;
    CHECK(kind_of([&] { markov_order_test(sequence_of({0, 1}, 2), bad); }) == ErrorKind::Config);
  }
}

TEST_CASE("cluster split finds separated contexts") {
  const auto spec = two_regions();
  const auto pts = two_blobs(5, true);
  const auto s = suggest_refinement(pts, spec, RefineConfig{});
  CHECK(s.target == "A");
  CHECK(s.evidence == std::vector<Evidence>{Evidence::ClusterSplit});
  CHECK(s.candidates.front().divergence == doctest::Approx(1.0).epsilon(1e-9));
  // Standardization gives the two noise axes unit variance, so the
  // silhouette is moderate even for disjoint blobs.
  CHECK(s.candidates.front().silhouette > 0.2);
  // The cut puts each blob wholly on one side.
  int left_in = 0, right_in = 0;
  for (const auto& p : pts) (p.x[0] > 0 ? right_in : left_in) += s.cut.contains(p.x) ? 1 : 0;
  CHECK(((left_in == 0 && right_in == 300) || (left_in == 300 && right_in == 0)));

  const auto split = apply_suggestion(spec, s);
  CHECK(split.labels() == std::vector<std::string>{"Aa", "Ab", "B"});
  const auto j = suggestion_to_json(s);
  CHECK(j["target"] == "A");
  CHECK(j["evidence"][0] == "cluster-split");
  // Region B has no points and is listed unscored.
  CHECK(s.candidates.back().points == 0);
}

TEST_CASE("no candidate when contexts do not depend on position") {
  CHECK(kind_of([] { suggest_refinement(two_blobs(6, false), two_regions(), RefineConfig{}); }) ==
        ErrorKind::NoCandidate);
  CHECK(kind_of([] { suggest_refinement({}, two_regions(), RefineConfig{}); }) ==
        ErrorKind::NoCandidate);
  RefineConfig bad;
  bad.restarts = 0;
  CHECK(kind_of([&] { suggest_refinement(two_blobs(6, true), two_regions(), bad); }) ==
        ErrorKind::Config);
}

TEST_CASE("tag_points follows the event that contains each sample") {
  const auto spec = two_regions();  // A: x <= 2.5, B: x >= 100
  Trajectory tr;
  tr.sample_dt = 1.0;
  for (double x : {0.0, 0.0, 200.0, 201.0, 0.0, 1.0, 200.0}) tr.samples.push_back({x, 0.0, 0.0});
  PartitionSpec s = spec;
  s.min_dwell = 0.0;
  const auto seq = symbolize(tr, s);
  REQUIRE(seq.size() == 4);
  const auto pts = tag_points(tr, s, seq);
  // Only the two middle events have both neighbours.
  REQUIRE(pts.size() == 4);
  CHECK(pts[0].region == 1);
  CHECK(pts[0].prev == 0);
  CHECK(pts[0].next == 0);
  CHECK(pts[2].region == 0);
  CHECK(pts[2].next == 1);
  CHECK(tag_points(tr, s, seq, 2).size() == 2);

  const auto entries = tag_points(tr, s, seq, 1, PointSampling::Entry);
  const auto exits = tag_points(tr, s, seq, 1, PointSampling::Exit);
  REQUIRE(entries.size() == 2);
  REQUIRE(exits.size() == 2);
  CHECK(entries[0].x[0] == 200.0);
  CHECK(entries[1].x[0] == 0.0);
  CHECK(exits[0].x[0] == 201.0);
  CHECK(exits[1].x[0] == 1.0);
  CHECK(point_sampling_from_string("exit") == PointSampling::Exit);
  CHECK(kind_of([] { point_sampling_from_string("middle"); }) == ErrorKind::Config);
}

TEST_CASE("refinement validation") {
  const EntropyReport before{0.7175, 0.09, 0.49, 0.1};
  CHECK(validate_refinement(before, EntropyReport{0.7175, 0.33, 0.49, 0.1}));
  CHECK_FALSE(validate_refinement(before, EntropyReport{0.7175, 0.05, 0.1, 0.1}));
  CHECK_FALSE(validate_refinement(before, EntropyReport{0.7175, 0.1, 1.0, 0.1}));
  CHECK(validate_refinement(before, before));
  CHECK(kind_of([&] { validate_refinement(before, EntropyReport{0.7176, 0.3, 0.4, 0.1}); }) ==
        ErrorKind::MismatchedParameters);
}

TEST_CASE("region occupancy") {
  const auto occ = region_occupancy(sequence_of({0, 1, 0, 1, 0, 2}, 4), 0.1);
  REQUIRE(occ.size() == 4);
  CHECK(occ[0].visits == 3);
  CHECK(occ[0].fraction == doctest::Approx(0.5));
  CHECK_FALSE(occ[2].vanished);
  CHECK(occ[3].vanished);
  CHECK(region_occupancy(sequence_of({}, 2)).front().fraction == 0.0);
}
