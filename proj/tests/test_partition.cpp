#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "fhr/error.hpp"
#include "fhr/markov.hpp"
#include "fhr/partition.hpp"

using namespace fhr;

namespace {

// Piecewise-constant path along x: (x, number of samples) segments.
Trajectory path(const std::vector<std::pair<double, int>>& segments, double dt = 0.1) {
  Trajectory tr;
  tr.sample_dt = dt;
  for (const auto& [x, n] : segments)
    for (int k = 0; k < n; ++k) tr.samples.push_back({x, 0.0, 0.0});
  return tr;
}

PartitionSpec left_right(double min_dwell = 0.2) {
  PartitionSpec s;
  s.name = "lr";
  s.min_dwell = min_dwell;
  s.regions = {{"L", Predicate::half_space({-1, 0, 0}, 1.0), "x <= -1"},
               {"R", Predicate::half_space({1, 0, 0}, 1.0), "x >= 1"}};
  return s;
}

std::vector<std::string> labels_of(const SymbolSequence& s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back(s.label(i));
  return out;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an fhr::Error");
  return ErrorKind::Config;
}

// Four quadrant sectors of the (x, y) plane.
PartitionSpec quadrants() {
  const double inf = std::numeric_limits<double>::infinity();
  PartitionSpec s;
  s.name = "quadrants";
  s.min_dwell = 0.0;
  s.regions = {{"q1", Predicate::box({0, 0, -inf}, {inf, inf, inf}), ""},
               {"q2", Predicate::box({-inf, 0, -inf}, {0, inf, inf}), ""},
               {"q3", Predicate::box({-inf, -inf, -inf}, {0, 0, inf}), ""},
               {"q4", Predicate::box({0, -inf, -inf}, {inf, 0, inf}), ""}};
  return s;
}

// A point hopping randomly between the quadrants.
Trajectory random_quadrant_walk(std::uint64_t seed, int steps) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> q(0, 3), len(1, 5);
  Trajectory tr;
  tr.sample_dt = 0.1;
  for (int i = 0; i < steps; ++i) {
    const int which = q(rng);
    const double x = which == 0 || which == 3 ? 1.0 : -1.0;
    const double y = which < 2 ? 1.0 : -1.0;
    for (int k = len(rng); k > 0; --k) tr.samples.push_back({x, y, 0.0});
  }
  return tr;
}

}  // namespace

TEST_CASE("predicate primitives and composition") {
  const auto h = Predicate::half_space({1, 0, 0}, 0.5);
  CHECK(h.contains({0.5, 0, 0}));
  CHECK_FALSE(h.contains({0.4, 9, 9}));
  const double inf = std::numeric_limits<double>::infinity();
  const auto b = Predicate::box({0, 0, -inf}, {1, 1, inf});
  CHECK(b.contains({0.5, 0.5, -1e9}));
  CHECK_FALSE(b.contains({1.5, 0.5, 0}));
  const auto ball = Predicate::ball({0, 0, 0}, 1.0);
  CHECK(ball.contains({0.6, 0.8, 0.0}));
  CHECK_FALSE(ball.contains({0.7, 0.8, 0.0}));
  CHECK(Predicate::all_of({h, ball}).contains({0.9, 0, 0}));
  CHECK_FALSE(Predicate::all_of({h, ball}).contains({0.2, 0, 0}));
  CHECK(Predicate::any_of({h, ball}).contains({0.2, 0, 0}));
  CHECK(Predicate::negate(ball).contains({2, 0, 0}));
}

TEST_CASE("predicate and partition json round trip") {
  const double inf = std::numeric_limits<double>::infinity();
  const auto p = Predicate::any_of(
      {Predicate::all_of({Predicate::half_space({1, 2, 3}, 0.5), Predicate::ball({0, 1, 0}, 2)}),
       Predicate::negate(Predicate::box({-inf, 0, 0}, {1, inf, 2}))});
  const auto j = predicate_to_json(p);
  CHECK(predicate_to_json(predicate_from_json(j)) == j);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  const auto back = predicate_from_json(j);
  for (int i = 0; i < 200; ++i) {
    const State3 x{u(rng), u(rng), u(rng)};
    CHECK(back.contains(x) == p.contains(x));
  }

  PartitionSpec s = left_right();
  s.background_policy = BackgroundPolicy::ErrorIfLost;
  s.lost_timeout = 3.0;
  const auto sj = partition_to_json(s);
  const auto s2 = partition_from_json(sj);
  CHECK(s2.labels() == s.labels());
  CHECK(s2.background_policy == BackgroundPolicy::ErrorIfLost);
  CHECK(s2.lost_timeout == 3.0);
  CHECK(partition_to_json(s2) == sj);
}

TEST_CASE("malformed predicates are config errors") {
  using nlohmann::json;
  CHECK(kind_of([] { predicate_from_json(json::parse(R"({"cone": {}})")); }) == ErrorKind::Config);
  CHECK(kind_of([] { predicate_from_json(json::parse(R"({"halfspace": {"normal": [1, 0]}})")); }) ==
        ErrorKind::Config);
  CHECK(kind_of([] { predicate_from_json(json::parse(R"({"and": []})")); }) == ErrorKind::Config);
  CHECK(kind_of([] { load_partition("/nonexistent/partition.json"); }) == ErrorKind::Io);
}

TEST_CASE("partition validation") {
  PartitionSpec s = left_right();
  s.regions.pop_back();
  CHECK(kind_of([&] { s.validate(); }) == ErrorKind::TooFewRegions);
  s = left_right();
  s.regions[1].label = "L";
  CHECK(kind_of([&] { s.validate(); }) == ErrorKind::Config);
  s = left_right();
  s.background_policy = BackgroundPolicy::ErrorIfLost;
  CHECK(kind_of([&] { s.validate(); }) == ErrorKind::Config);
}

TEST_CASE("classification uses region order for overlaps") {
  PartitionSpec s;
  s.regions = {{"a", Predicate::ball({0, 0, 0}, 2), ""}, {"b", Predicate::ball({1, 0, 0}, 2), ""}};
  CHECK(classify_point({0.5, 0, 0}, s) == std::optional<std::size_t>{0});
  CHECK(classify_point({2.5, 0, 0}, s) == std::optional<std::size_t>{1});
  CHECK_FALSE(classify_point({9, 9, 9}, s).has_value());
}

TEST_CASE("symbolize bridges background and collapses repeats") {
  // L, background, L again, background, R.
  const auto tr = path({{-2, 10}, {0, 5}, {-2, 10}, {0, 3}, {2, 10}});
  const auto seq = symbolize(tr, left_right());
  CHECK(labels_of(seq) == std::vector<std::string>{"L", "R"});
  CHECK(seq.events[0].entry_t == doctest::Approx(0.0));
  CHECK(seq.events[0].dwell == doctest::Approx(2.5));
  CHECK(seq.events[1].entry_t == doctest::Approx(2.8));
}

TEST_CASE("short visits are dropped by min_dwell") {
  // A one-sample flicker into R is shorter than min_dwell = 0.2.
  const auto tr = path({{-2, 10}, {2, 1}, {-2, 10}, {2, 3}});
  CHECK(labels_of(symbolize(tr, left_right(0.2))) == std::vector<std::string>{"L", "R"});
  CHECK(labels_of(symbolize(tr, left_right(0.0))) ==
        std::vector<std::string>{"L", "R", "L", "R"});
}

TEST_CASE("error-if-lost policy") {
  auto s = left_right();
  s.background_policy = BackgroundPolicy::ErrorIfLost;
  s.lost_timeout = 1.0;
  CHECK_NOTHROW(symbolize(path({{-2, 10}, {0, 5}, {2, 10}}), s));
  CHECK(kind_of([&] { symbolize(path({{-2, 10}, {0, 20}, {2, 10}}), s); }) ==
        ErrorKind::LostInBackground);
}

TEST_CASE("an empty trajectory gives an empty sequence") {
  Trajectory tr;
  tr.sample_dt = 0.1;
  const auto seq = symbolize(tr, left_right());
  CHECK(seq.size() == 0);
  CHECK(seq.alphabet.size() == 2);
}

TEST_CASE("merge_regions") {
  const auto q = quadrants();
  SUBCASE("union sits at the first member") {
    const auto m = merge_regions(q, {"q4", "q2"});
    CHECK(m.labels() == std::vector<std::string>{"q1", "q2", "q3"});
    CHECK(classify_point({1, -1, 0}, m) == std::optional<std::size_t>{1});
    CHECK(merge_mapping(q, {"q4", "q2"}) == std::vector<std::size_t>{0, 1, 2, 1});
  }
  SUBCASE("single label is a no-op") {
    CHECK(partition_to_json(merge_regions(q, {"q3"})) == partition_to_json(q));
  }
  SUBCASE("errors") {
    CHECK(kind_of([&] { merge_regions(q, {"q1", "nope"}); }) == ErrorKind::UnknownLabel);
    CHECK(kind_of([&] { merge_regions(q, {"q1", "q2", "q3", "q4"}); }) == ErrorKind::TooFewRegions);
  }
}

TEST_CASE("split_region") {
  const auto q = quadrants();
  const auto cut = Predicate::half_space({1, 0, 0}, 0.5);
  const auto s = split_region(q, "q1", cut);
  CHECK(s.labels() == std::vector<std::string>{"q1a", "q1b", "q2", "q3", "q4"});
  CHECK(classify_point({0.8, 0.5, 0}, s) == std::optional<std::size_t>{0});
  CHECK(classify_point({0.2, 0.5, 0}, s) == std::optional<std::size_t>{1});
  const auto named = split_region(q, "q1", cut, std::pair<std::string, std::string>{"far", "near"});
  CHECK(named.regions[0].label == "far");
  CHECK(kind_of([&] { split_region(q, "zz", cut); }) == ErrorKind::UnknownLabel);
  CHECK(kind_of([&] { split_region(q, "q1", cut, std::pair<std::string, std::string>{"q2", "x"}); }) ==
        ErrorKind::Config);
}

TEST_CASE("find_empty_regions flags degenerate splits") {
  const auto s = split_region(quadrants(), "q1", Predicate::half_space({1, 0, 0}, 10.0));
  const std::vector<State3> pts{{1, 1, 0}, {-1, 1, 0}, {-1, -1, 0}, {1, -1, 0}};
  CHECK(find_empty_regions(s, pts) == std::vector<std::string>{"q1a"});
}

TEST_CASE("merging equals lumping the original sequence") {
  const auto q = quadrants();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto tr = random_quadrant_walk(seed, 400);
    const std::vector<std::string> members = seed % 2 ? std::vector<std::string>{"q2", "q3"}
                                                      : std::vector<std::string>{"q1", "q3", "q4"};
    const auto merged = merge_regions(q, members);
    const auto direct = symbolize(tr, merged);
    const auto lumped = lump_sequence(symbolize(tr, q), merge_mapping(q, members), merged.labels());
    REQUIRE(direct.symbols() == lumped.symbols());
    const auto c1 = count_transitions(direct).counts;
    const auto c2 = count_transitions(lumped).counts;
    CHECK(c1 == c2);
  }
}

TEST_CASE("symbol table csv") {
  const auto seq = symbolize(path({{-2, 10}, {2, 10}}), left_right());
  std::ostringstream os;
  write_symbols_csv(os, seq);
  CHECK(os.str().rfind("label,entry_t,dwell\nL,0,1\nR,1,1\n", 0) == 0);
}

TEST_CASE("shipped partitions load and cover both branches") {
  for (const char* name : {"primitive.json", "advanced.json"}) {
    const auto spec = load_partition(std::string(FHR_SOURCE_DIR) + "/data/partitions/" + name);
    CHECK(spec.regions.size() >= 3);
    CHECK(classify_point({0.5, -3.0, -0.8}, spec) == std::optional<std::size_t>{0});
    CHECK(classify_point({0.5, -3.0, -0.5}, spec) == std::optional<std::size_t>{1});
    CHECK(classify_point({-0.5, 0.5, -0.7}, spec) == std::optional<std::size_t>{2});
    CHECK_FALSE(classify_point({0.0, 0.0, -0.7}, spec).has_value());
  }
}
