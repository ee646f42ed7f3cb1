#pragma once

// Labelled regions of phase space and the symbolic coding of trajectories
// by region entries.

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fhr/dynsys.hpp"

namespace fhr {

/// Boolean combination of geometric primitives over State3.
class Predicate {
 public:
  struct HalfSpace {  // normal . x >= offset
    State3 normal{};
    double offset = 0.0;
  };
  struct Box {  // lo <= x <= hi componentwise; +-inf allowed
    State3 lo{};
    State3 hi{};
  };
  struct Ball {
    State3 center{};
    double radius = 0.0;
  };
  struct And {
    std::vector<Predicate> terms;
  };
  struct Or {
    std::vector<Predicate> terms;
  };
  struct Not {
    std::vector<Predicate> term;  // exactly one element
  };
  using Node = std::variant<HalfSpace, Box, Ball, And, Or, Not>;

  Predicate() : node_(Box{}) {}
  Predicate(Node node) : node_(std::move(node)) {}  // NOLINT(implicit)

  static Predicate half_space(State3 normal, double offset);
  static Predicate box(State3 lo, State3 hi);
  static Predicate ball(State3 center, double radius);
  static Predicate all_of(std::vector<Predicate> terms);
  static Predicate any_of(std::vector<Predicate> terms);
  static Predicate negate(Predicate term);

  bool contains(const State3& x) const;
  const Node& node() const { return node_; }

 private:
  Node node_;
};

struct Region {
  std::string label;
  Predicate predicate;
  std::string description;
};

enum class BackgroundPolicy { BridgeToNextRegion, ErrorIfLost };

struct PartitionSpec {
  std::string name;
  std::vector<Region> regions;
  double min_dwell = 1.0;
  BackgroundPolicy background_policy = BackgroundPolicy::BridgeToNextRegion;
  double lost_timeout = 0.0;  // used with ErrorIfLost

  void validate() const;
  std::vector<std::string> labels() const;
  std::optional<std::size_t> index_of(const std::string& label) const;
};

/// Index of the first region (in definition order) containing s, or nullopt for
/// background.
std::optional<std::size_t> classify_point(const State3& s, const PartitionSpec& spec);

struct SymbolEvent {
  std::size_t symbol = 0;  // index into the alphabet
  double entry_t = 0.0;
  double dwell = 0.0;  // first entry to last exit of the collapsed visit
};

struct SymbolSequence {
  std::vector<std::string> alphabet;
  std::vector<SymbolEvent> events;

  std::size_t size() const { return events.size(); }
  std::vector<std::size_t> symbols() const;
  const std::string& label(std::size_t i) const { return alphabet[events[i].symbol]; }
};

/// Region-entry coding of a trajectory.
///
/// Contiguous runs of samples in one region shorter than min_dwell are
/// treated as background. Background is then bridged (or, under
/// ErrorIfLost, rejected once a gap exceeds the timeout) and consecutive
/// visits to the same region collapse into one event, so the output never
/// repeats a label.
SymbolSequence symbolize(const Trajectory& traj, const PartitionSpec& spec);

/// Replaces the named regions by their union, kept at the position and
/// under the label of the member that comes first in definition order.
PartitionSpec merge_regions(const PartitionSpec& spec, const std::vector<std::string>& labels);

/// Replaces `label` by (P and cut) labelled label + "a" and (P and not cut)
/// labelled label + "b", unless explicit child labels are given.
PartitionSpec split_region(const PartitionSpec& spec, const std::string& label,
                           const Predicate& cut,
                           std::optional<std::pair<std::string, std::string>> child_labels = {});

/// For each label of `spec`, the label it maps to in `merged` (used to lump
/// sequences consistently with merge_regions).
std::vector<std::size_t> merge_mapping(const PartitionSpec& spec,
                                       const std::vector<std::string>& labels);

/// Labels of regions that receive none of the given points under
/// classify_point; used to flag degenerate splits.
std::vector<std::string> find_empty_regions(const PartitionSpec& spec,
                                            const std::vector<State3>& points);

// -- file formats -----------------------------------------------------------

nlohmann::json predicate_to_json(const Predicate& p);
Predicate predicate_from_json(const nlohmann::json& j);
nlohmann::json partition_to_json(const PartitionSpec& spec);
PartitionSpec partition_from_json(const nlohmann::json& j);
PartitionSpec load_partition(const std::string& path);

void write_symbols_csv(std::ostream& os, const SymbolSequence& seq);

}  // namespace fhr
