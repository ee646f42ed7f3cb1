#pragma once

// Flow-induced Markov chains over region labels: estimation, structure
// checks, stationary law, entropy rate and the topological entropy of the
// support graph. All entropies are in nats.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "fhr/partition.hpp"

namespace fhr {

struct TransitionCounts {
  std::vector<std::string> labels;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;

  std::int64_t total() const { return counts.sum(); }
};

struct MarkovChain {
  std::vector<std::string> labels;
  Eigen::MatrixXd P;  // row-stochastic

  std::size_t size() const { return labels.size(); }
  void validate() const;
};

struct StationaryDist {
  Eigen::VectorXd pi;
};

struct ChainEstimate {
  TransitionCounts counts;
  MarkovChain chain;
};

TransitionCounts count_transitions(const SymbolSequence& seq);

/// Row-normalised transition counts of the jump chain, optionally with
/// +smoothing added to every entry. Throws ZeroRow naming every state that
/// is never left.
ChainEstimate estimate_chain(const SymbolSequence& seq, double smoothing = 0.0);

/// The sequence restricted to the labels it actually visits (alphabet kept
/// in original order). Returns the dropped labels through `absent`.
SymbolSequence restrict_to_visited(const SymbolSequence& seq,
                                   std::vector<std::string>* absent = nullptr);

/// Maps every symbol through `mapping` into `alphabet` and collapses repeats,
/// i.e. the sequence a merged partition would have produced.
SymbolSequence lump_sequence(const SymbolSequence& seq, const std::vector<std::size_t>& mapping,
                             std::vector<std::string> alphabet);

struct ChainStructure {
  bool irreducible = false;
  bool aperiodic = false;
  int period = 0;  // gcd of cycle lengths; 0 if the graph has no cycle
};

ChainStructure check_irreducible_aperiodic(const MarkovChain& chain);

/// Strongly connected components of the support graph of `adj` (nonzero
/// entries), each listed in ascending order.
std::vector<std::vector<std::size_t>> strongly_connected_components(const Eigen::MatrixXd& adj);

/// Stationary law by power iteration on the lazy chain (I + P) / 2, falling
/// back to a direct linear solve. Throws NotIrreducible.
StationaryDist stationary(const MarkovChain& chain);

/// -sum_i pi_i sum_j P_ij ln P_ij with 0 ln 0 = 0.
double entropy_rate(const MarkovChain& chain, const StationaryDist& pi);

/// ln of the Perron eigenvalue of the 0/1 support graph. Throws NoCycle.
double subshift_entropy(const Eigen::MatrixXd& support);
double subshift_entropy(const TransitionCounts& counts);
double subshift_entropy(const MarkovChain& chain);

/// n-event walk from a pi-sampled start; entry_t is the step index and
/// dwell is 1.
SymbolSequence simulate_walk(const MarkovChain& chain, std::size_t n, std::uint64_t seed);

nlohmann::json chain_to_json(const ChainEstimate& est, const StationaryDist* pi);
void write_chain_dot(std::ostream& os, const MarkovChain& chain);

}  // namespace fhr
