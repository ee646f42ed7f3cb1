#pragma once

// Complexity measures: Lyapunov spectrum (Benettin), topological-entropy
// estimates and Lempel-Ziv (LZ76) complexity.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fhr/dynsys.hpp"
#include "fhr/partition.hpp"
#include "fhr/sections.hpp"

namespace fhr {

using Jacobian3 = std::array<State3, 3>;
using JacobianField = std::function<Jacobian3(const State3&)>;

struct LyapunovConfig {
  double t_transient = 5e4;
  double t_average = 2e5;
  double renorm_interval = 1.0;
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  State3 initial_state{0.1, 0.0, 0.0};
  double divergence_bound = 1e6;
  // Running estimates are kept every history_stride renormalisations.
  int history_stride = 100;
  // Batches for the batch-means standard error.
  int batches = 20;
  // NotConverged when the largest standard error exceeds this.
  double max_standard_error = 5e-3;
  bool fail_if_not_converged = true;

  void validate() const;
};

struct LyapunovResult {
  std::array<double, 3> exponents{};       // descending, nats per unit time
  std::array<double, 3> standard_error{};  // batch-means standard error
  std::vector<std::array<double, 3>> history;  // running estimates
  double averaging_time = 0.0;
  bool converged = false;
};

/// Benettin's method with Gram-Schmidt reorthonormalisation of three tangent
/// vectors every renorm_interval, time-averaged after the transient.
LyapunovResult lyapunov_spectrum(const VectorField& field, const JacobianField& jacobian,
                                 const LyapunovConfig& cfg);

/// Del Negro field with its analytic Jacobian.
LyapunovResult lyapunov_spectrum(const DelNegroParams& p, const LyapunovConfig& cfg);

enum class TopEntropyMethod { PesinProxy, WordGrowth };

struct TopEntropyEstimate {
  TopEntropyMethod method = TopEntropyMethod::WordGrowth;
  double value = 0.0;  // nats per symbol (word growth) or per unit time (Pesin)
  std::string unit;
  // Word growth diagnostics.
  std::vector<double> log_word_counts;  // ln N(n), n = 1..L
  int fit_first = 0, fit_last = 0;      // fitted word lengths (inclusive)
  double r_squared = 0.0;
  std::vector<double> residuals;
};

/// Sum of positive exponents, per unit time.
TopEntropyEstimate pesin_proxy(const LyapunovResult& lyap);

/// Pesin proxy converted to nats per crossing via the mean return time.
double pesin_per_crossing(const LyapunovResult& lyap, double mean_return_time);

struct WordGrowthConfig {
  int bins = 16;
  int max_length = 10;
  int min_segment = 4;
  // Ranges narrower than this are binned as if they had this width, so
  // numerical jitter on a periodic orbit does not fill all bins.
  double min_range = 1e-3;
};

/// Slope of ln N(n) against n, N(n) = number of distinct length-n words,
/// over the contiguous range of lengths (at least min_segment long) with the
/// best least-squares R^2. Throws InsufficientData when N(L) exceeds half
/// the sequence length.
TopEntropyEstimate word_growth_entropy(const std::vector<std::uint32_t>& symbols,
                                       std::uint32_t alphabet_size, const WordGrowthConfig& cfg);

/// Equal-width binning of values over [min, max] into `bins` cells; the
/// range is widened to at least min_range, anchored at the minimum.
std::vector<std::uint32_t> bin_values(const std::vector<double>& values, int bins,
                                      double min_range = 0.0);

/// Word growth on the return-map coordinate of the crossings.
TopEntropyEstimate word_growth_entropy(const std::vector<Crossing>& crossings, Axis coord,
                                       const WordGrowthConfig& cfg);

struct LZResult {
  std::size_t c = 0;        // phrase count
  double normalized = 0.0;  // c log2(n) / n
};

/// Lempel-Ziv 1976 production complexity (exhaustive history, final
/// incomplete phrase counted), Kaspar-Schuster scan.
LZResult lz76(const std::vector<std::uint8_t>& bits);
LZResult lz76(const std::string& bits);  // characters '0' / '1'

/// Event labels mapped to bits; repeats are kept.
std::vector<std::uint8_t> binarize_walk(const SymbolSequence& seq,
                                        const std::map<std::string, int>& reduction);

}  // namespace fhr
