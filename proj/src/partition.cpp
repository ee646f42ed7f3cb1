#include "fhr/partition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

namespace fhr {

using nlohmann::json;

Predicate Predicate::half_space(State3 normal, double offset) {
  return Predicate(HalfSpace{normal, offset});
}
Predicate Predicate::box(State3 lo, State3 hi) { return Predicate(Box{lo, hi}); }
Predicate Predicate::ball(State3 center, double radius) {
  return Predicate(Ball{center, radius});
}
Predicate Predicate::all_of(std::vector<Predicate> terms) {
  return Predicate(And{std::move(terms)});
}
Predicate Predicate::any_of(std::vector<Predicate> terms) {
  return Predicate(Or{std::move(terms)});
}
Predicate Predicate::negate(Predicate term) { return Predicate(Not{{std::move(term)}}); }

bool Predicate::contains(const State3& x) const {
  struct Visitor {
    const State3& x;
    bool operator()(const HalfSpace& h) const { return dot(h.normal, x) >= h.offset; }
    bool operator()(const Box& b) const {
      for (int d = 0; d < 3; ++d)
        if (!(x[d] >= b.lo[d] && x[d] <= b.hi[d])) return false;
      return true;
    }
    bool operator()(const Ball& b) const {
      double s = 0.0;
      for (int d = 0; d < 3; ++d) s += (x[d] - b.center[d]) * (x[d] - b.center[d]);
      return s <= b.radius * b.radius;
    }
    bool operator()(const And& a) const {
      return std::all_of(a.terms.begin(), a.terms.end(),
                         [&](const Predicate& p) { return p.contains(x); });
    }
    bool operator()(const Or& o) const {
      return std::any_of(o.terms.begin(), o.terms.end(),
                         [&](const Predicate& p) { return p.contains(x); });
    }
    bool operator()(const Not& n) const { return !n.term.front().contains(x); }
  };
  return std::visit(Visitor{x}, node_);
}

void PartitionSpec::validate() const {
  if (regions.size() < 2)
    throw Error(ErrorKind::TooFewRegions, "a partition needs at least two regions");
  std::set<std::string> seen;
  for (const auto& r : regions) {
    if (r.label.empty()) throw Error(ErrorKind::Config, "region label must be nonempty");
    if (!seen.insert(r.label).second)
      throw Error(ErrorKind::Config, "duplicate region label '" + r.label + "'");
  }
  if (!(min_dwell >= 0.0) || !std::isfinite(min_dwell))
    throw Error(ErrorKind::Config, "min_dwell must be >= 0");
  if (background_policy == BackgroundPolicy::ErrorIfLost && !(lost_timeout > 0.0))
    throw Error(ErrorKind::Config, "error-if-lost policy needs a positive timeout");
}

std::vector<std::string> PartitionSpec::labels() const {
  std::vector<std::string> out;
  out.reserve(regions.size());
  for (const auto& r : regions) out.push_back(r.label);
  return out;
}

std::optional<std::size_t> PartitionSpec::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < regions.size(); ++i)
    if (regions[i].label == label) return i;
  return std::nullopt;
}

std::optional<std::size_t> classify_point(const State3& s, const PartitionSpec& spec) {
  for (std::size_t i = 0; i < spec.regions.size(); ++i)
    if (spec.regions[i].predicate.contains(s)) return i;
  return std::nullopt;
}

std::vector<std::size_t> SymbolSequence::symbols() const {
  std::vector<std::size_t> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(e.symbol);
  return out;
}

SymbolSequence symbolize(const Trajectory& traj, const PartitionSpec& spec) {
  spec.validate();
  SymbolSequence seq;
  seq.alphabet = spec.labels();
  if (traj.size() == 0) return seq;

  struct Run {
    std::optional<std::size_t> symbol;
    std::size_t first, last;
  };
  std::vector<Run> runs;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto label = classify_point(traj.samples[k], spec);
    if (!runs.empty() && runs.back().symbol == label) runs.back().last = k;
    else runs.push_back(Run{label, k, k});
  }

  const double dt = traj.sample_dt;
  auto duration = [dt](const Run& r) { return static_cast<double>(r.last - r.first + 1) * dt; };

  // Short visits are boundary chatter, not entries.
  for (auto& r : runs)
    if (r.symbol && duration(r) < spec.min_dwell) r.symbol.reset();

  const bool strict = spec.background_policy == BackgroundPolicy::ErrorIfLost;
  double lost_since = -1.0;
  for (const auto& r : runs) {
    if (!r.symbol) {
      if (lost_since < 0.0) lost_since = traj.time(r.first);
      const double lost_for = traj.time(r.last) + dt - lost_since;
      if (strict && lost_for > spec.lost_timeout) {
        throw Error(ErrorKind::LostInBackground,
                    fmt::format("trajectory stayed outside all regions for {:.6g} time units "
                                "starting at t={:.6g}",
                                lost_for, lost_since));
      }
      continue;
    }
    lost_since = -1.0;
    const double entry = traj.time(r.first);
    const double exit = traj.time(r.last) + dt;
    if (!seq.events.empty() && seq.events.back().symbol == *r.symbol) {
      seq.events.back().dwell = exit - seq.events.back().entry_t;
    } else {
      seq.events.push_back(SymbolEvent{*r.symbol, entry, exit - entry});
    }
  }
  return seq;
}

namespace {

std::vector<std::size_t> member_indices(const PartitionSpec& spec,
                                        const std::vector<std::string>& labels) {
  std::set<std::size_t> members;
  for (const auto& l : labels) {
    const auto idx = spec.index_of(l);
    if (!idx) throw Error(ErrorKind::UnknownLabel, "unknown region label '" + l + "'");
    members.insert(*idx);
  }
  return {members.begin(), members.end()};
}

}  // namespace

PartitionSpec merge_regions(const PartitionSpec& spec, const std::vector<std::string>& labels) {
  const auto members = member_indices(spec, labels);
  if (members.size() <= 1) return spec;
  if (spec.regions.size() - members.size() + 1 < 2)
    throw Error(ErrorKind::TooFewRegions, "merge would leave fewer than two regions");

  PartitionSpec out = spec;
  out.regions.clear();
  std::vector<Predicate> parts;
  std::vector<std::string> names;
  for (std::size_t i : members) {
    parts.push_back(spec.regions[i].predicate);
    names.push_back(spec.regions[i].label);
  }
  for (std::size_t i = 0; i < spec.regions.size(); ++i) {
    if (i == members.front()) {
      Region merged;
      merged.label = spec.regions[i].label;
      merged.predicate = Predicate::any_of(parts);
      merged.description = fmt::format("union of {}", fmt::join(names, ", "));
      out.regions.push_back(std::move(merged));
    } else if (!std::binary_search(members.begin(), members.end(), i)) {
      out.regions.push_back(spec.regions[i]);
    }
  }
  return out;
}

std::vector<std::size_t> merge_mapping(const PartitionSpec& spec,
                                       const std::vector<std::string>& labels) {
  const auto members = member_indices(spec, labels);
  std::vector<std::size_t> mapping(spec.regions.size());
  std::size_t next = 0;
  std::size_t merged_slot = 0;
  for (std::size_t i = 0; i < spec.regions.size(); ++i) {
    const bool member = std::binary_search(members.begin(), members.end(), i);
    if (member && i != members.front()) continue;
    if (member) merged_slot = next;
    mapping[i] = next++;
  }
  for (std::size_t i : members) mapping[i] = merged_slot;
  return mapping;
}

PartitionSpec split_region(const PartitionSpec& spec, const std::string& label,
                           const Predicate& cut,
                           std::optional<std::pair<std::string, std::string>> child_labels) {
  const auto idx = spec.index_of(label);
  if (!idx) throw Error(ErrorKind::UnknownLabel, "unknown region label '" + label + "'");
  const auto [inside, outside] = child_labels.value_or(std::pair{label + "a", label + "b"});

  PartitionSpec out = spec;
  const Region& parent = spec.regions[*idx];
  Region first{inside, Predicate::all_of({parent.predicate, cut}),
               parent.description.empty() ? std::string{} : parent.description + " (cut side)"};
  Region second{outside, Predicate::all_of({parent.predicate, Predicate::negate(cut)}),
                parent.description.empty() ? std::string{} : parent.description + " (rest)"};
  out.regions.erase(out.regions.begin() + static_cast<std::ptrdiff_t>(*idx));
  out.regions.insert(out.regions.begin() + static_cast<std::ptrdiff_t>(*idx),
                     {std::move(first), std::move(second)});
  out.validate();
  return out;
}

std::vector<std::string> find_empty_regions(const PartitionSpec& spec,
                                            const std::vector<State3>& points) {
  std::vector<std::size_t> hits(spec.regions.size(), 0);
  for (const auto& p : points)
    if (const auto idx = classify_point(p, spec)) ++hits[*idx];
  std::vector<std::string> out;
  for (std::size_t i = 0; i < hits.size(); ++i)
    if (hits[i] == 0) out.push_back(spec.regions[i].label);
  return out;
}

// -- JSON ---------------------------------------------------------------------

namespace {

json bound(double x) {
  if (std::isinf(x)) return nullptr;
  return x;
}

double read_bound(const json& j, double inf) { return j.is_null() ? inf : j.get<double>(); }

State3 read_vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::Config, "expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

json predicate_to_json(const Predicate& p) {
  struct Visitor {
    json operator()(const Predicate::HalfSpace& h) const {
      return {{"halfspace", {{"normal", h.normal}, {"offset", h.offset}}}};
    }
    json operator()(const Predicate::Box& b) const {
      json lo = json::array(), hi = json::array();
      for (int d = 0; d < 3; ++d) {
        lo.push_back(bound(b.lo[d]));
        hi.push_back(bound(b.hi[d]));
      }
      return {{"box", {{"lo", lo}, {"hi", hi}}}};
    }
    json operator()(const Predicate::Ball& b) const {
      return {{"ball", {{"center", b.center}, {"radius", b.radius}}}};
    }
    json operator()(const Predicate::And& a) const {
      json terms = json::array();
      for (const auto& t : a.terms) terms.push_back(predicate_to_json(t));
      return {{"and", terms}};
    }
    json operator()(const Predicate::Or& o) const {
      json terms = json::array();
      for (const auto& t : o.terms) terms.push_back(predicate_to_json(t));
      return {{"or", terms}};
    }
    json operator()(const Predicate::Not& n) const {
      return {{"not", predicate_to_json(n.term.front())}};
    }
  };
  return std::visit(Visitor{}, p.node());
}

Predicate predicate_from_json(const json& j) {
  if (!j.is_object() || j.size() != 1)
    throw Error(ErrorKind::Config, "predicate must be an object with exactly one key");
  const auto& [key, body] = *j.items().begin();
  try {
    if (key == "halfspace")
      return Predicate::half_space(read_vec3(body.at("normal")), body.at("offset").get<double>());
    if (key == "box") {
      const auto& lo = body.at("lo");
      const auto& hi = body.at("hi");
      if (lo.size() != 3 || hi.size() != 3)
        throw Error(ErrorKind::Config, "box bounds must have three entries");
      const double inf = std::numeric_limits<double>::infinity();
      State3 l{}, h{};
      for (std::size_t d = 0; d < 3; ++d) {
        l[d] = read_bound(lo[d], -inf);
        h[d] = read_bound(hi[d], inf);
      }
      return Predicate::box(l, h);
    }
    if (key == "ball")
      return Predicate::ball(read_vec3(body.at("center")), body.at("radius").get<double>());
    if (key == "and" || key == "or") {
      std::vector<Predicate> terms;
      for (const auto& t : body) terms.push_back(predicate_from_json(t));
      if (terms.empty()) throw Error(ErrorKind::Config, key + " needs at least one term");
      return key == "and" ? Predicate::all_of(std::move(terms))
                          : Predicate::any_of(std::move(terms));
    }
    if (key == "not") return Predicate::negate(predicate_from_json(body));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("malformed predicate: ") + e.what());
  }
  throw Error(ErrorKind::Config, "unknown predicate kind '" + key + "'");
}

json partition_to_json(const PartitionSpec& spec) {
  json regions = json::array();
  for (const auto& r : spec.regions) {
    json jr = {{"label", r.label}, {"predicate", predicate_to_json(r.predicate)}};
    if (!r.description.empty()) jr["description"] = r.description;
    regions.push_back(std::move(jr));
  }
  json policy;
  if (spec.background_policy == BackgroundPolicy::BridgeToNextRegion) {
    policy = {{"kind", "bridge-to-next-region"}};
  } else {
    policy = {{"kind", "error-if-lost"}, {"timeout", spec.lost_timeout}};
  }
  return {{"name", spec.name},
          {"min_dwell", spec.min_dwell},
          {"background_policy", policy},
          {"regions", regions}};
}

PartitionSpec partition_from_json(const json& j) {
  PartitionSpec spec;
  try {
    spec.name = j.value("name", std::string{});
    spec.min_dwell = j.value("min_dwell", 1.0);
    if (j.contains("background_policy")) {
      const auto& bp = j.at("background_policy");
      const std::string kind = bp.is_string() ? bp.get<std::string>() : bp.at("kind").get<std::string>();
      if (kind == "bridge-to-next-region") {
        spec.background_policy = BackgroundPolicy::BridgeToNextRegion;
      } else if (kind == "error-if-lost") {
        spec.background_policy = BackgroundPolicy::ErrorIfLost;
        spec.lost_timeout = bp.at("timeout").get<double>();
      } else {
        throw Error(ErrorKind::Config, "unknown background policy '" + kind + "'");
      }
    }
    for (const auto& jr : j.at("regions")) {
      Region r;
      r.label = jr.at("label").get<std::string>();
      r.predicate = predicate_from_json(jr.at("predicate"));
      r.description = jr.value("description", std::string{});
      spec.regions.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("malformed partition: ") + e.what());
  }
  spec.validate();
  return spec;
}

PartitionSpec load_partition(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open partition file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, "partition file '" + path + "' is not valid JSON: " + e.what());
  }
  return partition_from_json(j);
}

void write_symbols_csv(std::ostream& os, const SymbolSequence& seq) {
  os << "label,entry_t,dwell\n";
  for (std::size_t i = 0; i < seq.size(); ++i)
    fmt::print(os, "{},{:.10g},{:.10g}\n", seq.label(i), seq.events[i].entry_t,
               seq.events[i].dwell);
}

}  // namespace fhr
