#pragma once

// Partition refinement: flag parameters where the Markov description loses
// information, test for unmodelled memory, and propose region splits.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fhr/partition.hpp"

namespace fhr {

struct EntropyReport {
  double a = 0.0;
  double h_rate = 0.0;  // nats per symbol
  double h_top = 0.0;   // nats per symbol, word-growth estimate
  double lz_norm = 0.0;

  double gap() const { return h_top - h_rate; }
};

struct FlaggedInterval {
  double a_first = 0.0;
  double a_last = 0.0;
  double a_peak = 0.0;  // member with the largest gap
  double peak_gap = 0.0;
  std::vector<double> members;
};

/// Parameters with gap > threshold, grouped into runs of consecutive
/// reports. Reports with a non-finite gap are skipped and break a run.
/// Throws ConfigError when the reports are not sorted by a.
std::vector<FlaggedInterval> entropy_gap_scan(const std::vector<EntropyReport>& reports,
                                              double threshold = 0.2);

/// Plug-in conditional block entropy H(X_{k+1} | X_1..X_k) in nats; k = 0 is
/// the single-symbol entropy.
double conditional_block_entropy(const std::vector<std::size_t>& symbols, std::size_t alphabet,
                                 int k);

struct MarkovOrderConfig {
  int max_order = 3;
  int surrogates = 19;
  std::uint64_t seed = 1;
  // Minimum sequence length per context, i.e. length >= this * |A|^max_order.
  double min_samples_per_context = 20.0;
};

struct MarkovOrderResult {
  std::vector<double> conditional_entropy;  // h_0 .. h_max_order
  std::vector<double> bound;                // bound[k] on h_k - h_{k+1}, k >= 1
  int best_order = 1;
};

/// Smallest k >= 1 with h_k - h_{k+1} within the spread of the same drop on
/// surrogates simulated from the fitted order-k model (max_order if none).
/// Throws InsufficientData for short sequences.
MarkovOrderResult markov_order_test(const SymbolSequence& seq, const MarkovOrderConfig& cfg);

/// A trajectory sample inside a region, with the symbols of the events
/// before and after the visit it belongs to.
struct TaggedPoint {
  State3 x{};
  std::size_t region = 0;
  std::size_t prev = 0;
  std::size_t next = 0;
};

// Interior keeps every in-region sample of every visit; Entry and Exit keep
// one point per visit (its first or last in-region sample). Interior points
// of one visit span the whole region, so 2-means on them tends to cut along
// the flow and cannot separate visits.
enum class PointSampling { Interior, Entry, Exit };
PointSampling point_sampling_from_string(const std::string& s);

/// Samples that lie in the region of their enclosing event. Visits without
/// both a predecessor and a successor are skipped; `stride` thins interior
/// samples.
std::vector<TaggedPoint> tag_points(const Trajectory& traj, const PartitionSpec& spec,
                                    const SymbolSequence& seq, std::size_t stride = 1,
                                    PointSampling sampling = PointSampling::Interior);

enum class Evidence { EntropyGap, MarkovOrder, ClusterSplit };
std::string to_string(Evidence e);

struct RegionScore {
  std::string label;
  std::size_t points = 0;
  double silhouette = 0.0;
  double divergence = 0.0;  // Jensen-Shannon, bits
  double score = 0.0;
  Predicate cut;            // half-space on the far side of the second centroid
  State3 centroid_a{}, centroid_b{};
};

struct RefinementSuggestion {
  std::string target;
  Predicate cut;
  std::vector<Evidence> evidence;
  double score = 0.0;
  std::vector<RegionScore> candidates;  // every scored region, best first
};

struct RefineConfig {
  int restarts = 10;
  int max_iterations = 100;
  std::size_t max_points = 20000;       // clustering sample per region
  std::size_t silhouette_points = 1000;
  std::size_t min_points = 20;
  double score_floor = 0.02;
  std::uint64_t seed = 1;
};

/// Per region: 2-means on standardized coordinates, scored by silhouette
/// times the Jensen-Shannon divergence of the (predecessor, successor)
/// distributions of the two clusters. The cut is the perpendicular bisector
/// of the centroids, mapped back to state coordinates. Throws NoCandidate
/// when nothing reaches the floor.
RefinementSuggestion suggest_refinement(const std::vector<TaggedPoint>& points,
                                        const PartitionSpec& spec, const RefineConfig& cfg);

/// Applies the suggestion with split_region.
PartitionSpec apply_suggestion(const PartitionSpec& spec, const RefinementSuggestion& s,
                               std::optional<std::pair<std::string, std::string>> labels = {});

/// Accepted iff after.h_rate >= before.h_rate and |after.gap| <= |before.gap|.
/// Throws MismatchedParameters when the reports are for different a.
bool validate_refinement(const EntropyReport& before, const EntropyReport& after);

struct RegionOccupancy {
  std::string label;
  std::size_t visits = 0;
  double fraction = 0.0;  // of all events
  bool vanished = false;  // fraction <= threshold
};

/// Visit frequencies; a region whose share drops to the threshold is
/// reported as vanished (heuristic).
std::vector<RegionOccupancy> region_occupancy(const SymbolSequence& seq, double threshold = 0.0);

nlohmann::json suggestion_to_json(const RefinementSuggestion& s);
nlohmann::json order_result_to_json(const MarkovOrderResult& r);

}  // namespace fhr
