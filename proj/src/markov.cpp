#include "fhr/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include "fhr/random.hpp"

namespace fhr {

void MarkovChain::validate() const {
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (P.rows() != n || P.cols() != n)
    throw Error(ErrorKind::Config, "transition matrix does not match the alphabet");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(P.row(i).sum() - 1.0) > 1e-12)
      throw Error(ErrorKind::Config, fmt::format("row {} of P does not sum to 1", i));
    for (Eigen::Index j = 0; j < n; ++j)
      if (!(P(i, j) >= 0.0 && P(i, j) <= 1.0))
        throw Error(ErrorKind::Config, "transition probabilities must lie in [0,1]");
  }
}

TransitionCounts count_transitions(const SymbolSequence& seq) {
  const auto n = static_cast<Eigen::Index>(seq.alphabet.size());
  TransitionCounts tc;
  tc.labels = seq.alphabet;
  tc.counts.setZero(n, n);
  for (std::size_t k = 0; k + 1 < seq.events.size(); ++k)
    ++tc.counts(static_cast<Eigen::Index>(seq.events[k].symbol),
                static_cast<Eigen::Index>(seq.events[k + 1].symbol));
  return tc;
}

ChainEstimate estimate_chain(const SymbolSequence& seq, double smoothing) {
  if (seq.events.size() < 2)
    throw Error(ErrorKind::InsufficientData, "chain estimation needs at least two events");
  if (smoothing < 0.0) throw Error(ErrorKind::Config, "smoothing must be >= 0");
  ChainEstimate est;
  est.counts = count_transitions(seq);
  const auto n = static_cast<Eigen::Index>(seq.alphabet.size());
  std::vector<std::string> zero_rows;
  est.chain.labels = seq.alphabet;
  est.chain.P.setZero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double row = static_cast<double>(est.counts.counts.row(i).sum());
    if (row == 0.0 && smoothing == 0.0) {
      zero_rows.push_back(seq.alphabet[static_cast<std::size_t>(i)]);
      continue;
    }
    const double denom = row + smoothing * static_cast<double>(n);
    for (Eigen::Index j = 0; j < n; ++j)
      est.chain.P(i, j) = (static_cast<double>(est.counts.counts(i, j)) + smoothing) / denom;
  }
  if (!zero_rows.empty())
    throw Error(ErrorKind::ZeroRow,
                fmt::format("states never left: {}", fmt::join(zero_rows, ", ")));
  return est;
}

SymbolSequence restrict_to_visited(const SymbolSequence& seq, std::vector<std::string>* absent) {
  // A state is kept if it is left at least once; a label seen only as the
  // final event would otherwise be a zero row.
  std::vector<bool> keep(seq.alphabet.size(), false);
  for (std::size_t k = 0; k + 1 < seq.events.size(); ++k) keep[seq.events[k].symbol] = true;
  std::vector<std::size_t> remap(seq.alphabet.size(), 0);
  SymbolSequence out;
  for (std::size_t i = 0; i < seq.alphabet.size(); ++i) {
    if (keep[i]) {
      remap[i] = out.alphabet.size();
      out.alphabet.push_back(seq.alphabet[i]);
    } else if (absent) {
      absent->push_back(seq.alphabet[i]);
    }
  }
  for (const auto& e : seq.events) {
    if (!keep[e.symbol]) continue;
    SymbolEvent ev = e;
    ev.symbol = remap[e.symbol];
    if (!out.events.empty() && out.events.back().symbol == ev.symbol) {
      out.events.back().dwell = ev.entry_t + ev.dwell - out.events.back().entry_t;
    } else {
      out.events.push_back(ev);
    }
  }
  return out;
}

SymbolSequence lump_sequence(const SymbolSequence& seq, const std::vector<std::size_t>& mapping,
                             std::vector<std::string> alphabet) {
  if (mapping.size() != seq.alphabet.size())
    throw Error(ErrorKind::Config, "lumping map does not cover the alphabet");
  SymbolSequence out;
  out.alphabet = std::move(alphabet);
  for (const auto& e : seq.events) {
    const std::size_t s = mapping[e.symbol];
    if (s >= out.alphabet.size()) throw Error(ErrorKind::Config, "lumping map out of range");
    if (!out.events.empty() && out.events.back().symbol == s) {
      out.events.back().dwell = e.entry_t + e.dwell - out.events.back().entry_t;
    } else {
      out.events.push_back(SymbolEvent{s, e.entry_t, e.dwell});
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> strongly_connected_components(const Eigen::MatrixXd& adj) {
  // Iterative Tarjan.
  const auto n = static_cast<std::size_t>(adj.rows());
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> comps;
  int counter = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<std::pair<std::size_t, std::size_t>> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, next] = call.back();
      if (next < n) {
        const std::size_t w = next++;
        if (adj(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(w)) == 0.0) continue;
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
      }
      const std::size_t finished = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[finished]);
    }
  }
  return comps;
}

namespace {

// gcd of cycle lengths inside one strongly connected component (0 if the
// component carries no cycle).
int component_period(const Eigen::MatrixXd& adj, const std::vector<std::size_t>& comp) {
  const auto n = static_cast<std::size_t>(adj.rows());
  std::vector<long> level(n, -1);
  std::vector<bool> member(n, false);
  for (auto c : comp) member[c] = true;
  std::vector<std::size_t> queue{comp.front()};
  level[comp.front()] = 0;
  int g = 0;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const std::size_t u = queue[qi];
    for (std::size_t v = 0; v < n; ++v) {
      if (!member[v] || adj(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) == 0.0)
        continue;
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        queue.push_back(v);
      } else {
        g = std::gcd(g, static_cast<int>(std::abs(level[u] + 1 - level[v])));
      }
    }
  }
  return g;
}

}  // namespace

ChainStructure check_irreducible_aperiodic(const MarkovChain& chain) {
  const auto comps = strongly_connected_components(chain.P);
  ChainStructure out;
  out.irreducible = comps.size() == 1;
  int g = 0;
  for (const auto& c : comps) g = std::gcd(g, component_period(chain.P, c));
  out.period = g;
  out.aperiodic = g == 1;
  return out;
}

StationaryDist stationary(const MarkovChain& chain) {
  if (!check_irreducible_aperiodic(chain).irreducible)
    throw Error(ErrorKind::NotIrreducible, "stationary law needs an irreducible chain");
  const auto n = static_cast<Eigen::Index>(chain.size());
  const Eigen::MatrixXd lazy = 0.5 * (Eigen::MatrixXd::Identity(n, n) + chain.P);
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
  auto residual = [&](const Eigen::RowVectorXd& p) {
    return (p * chain.P - p).lpNorm<Eigen::Infinity>();
  };
  for (int it = 0; it < 100000; ++it) {
    Eigen::RowVectorXd next = pi * lazy;
    next /= next.sum();
    const double change = (next - pi).lpNorm<1>();
    pi = next;
    if (change < 1e-15) break;
  }
  if (!(residual(pi) < 1e-13)) {
    // Replace one balance equation by the normalisation.
    Eigen::MatrixXd A = chain.P.transpose() - Eigen::MatrixXd::Identity(n, n);
    A.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    const Eigen::VectorXd x = A.fullPivLu().solve(b);
    pi = x.transpose().cwiseMax(0.0);
    pi /= pi.sum();
  }
  return StationaryDist{pi.transpose()};
}

double entropy_rate(const MarkovChain& chain, const StationaryDist& pi) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < chain.P.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < chain.P.cols(); ++j) {
      const double p = chain.P(i, j);
      if (p > 0.0) row -= p * std::log(p);
    }
    h += pi.pi(i) * row;
  }
  return std::max(h, 0.0);
}

double subshift_entropy(const Eigen::MatrixXd& support) {
  const Eigen::Index n = support.rows();
  Eigen::MatrixXd A = (support.array() != 0.0).cast<double>().matrix();
  double rho = -1.0;
  for (const auto& comp : strongly_connected_components(A)) {
    const auto m = static_cast<Eigen::Index>(comp.size());
    Eigen::MatrixXd B(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        B(i, j) = A(static_cast<Eigen::Index>(comp[static_cast<std::size_t>(i)]),
                    static_cast<Eigen::Index>(comp[static_cast<std::size_t>(j)]));
    if (B.sum() == 0.0) continue;  // trivial component without a loop
    // B irreducible, so B + I is primitive and power iteration converges;
    // the Collatz-Wielandt bounds bracket its Perron root.
    const Eigen::MatrixXd C = B + Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(m);
    double lo = 0.0, hi = 0.0;
    for (int it = 0; it < 1000000; ++it) {
      const Eigen::VectorXd y = C * x;
      const Eigen::ArrayXd ratio = y.array() / x.array();
      lo = ratio.minCoeff();
      hi = ratio.maxCoeff();
      x = y / y.maxCoeff();
      if (hi - lo <= 1e-15 * hi) break;
    }
    rho = std::max(rho, 0.5 * (lo + hi) - 1.0);
  }
  (void)n;
  if (rho < 0.0) throw Error(ErrorKind::NoCycle, "support graph has no cycle");
  return std::log(std::max(rho, 1.0));
}

double subshift_entropy(const TransitionCounts& counts) {
  return subshift_entropy(Eigen::MatrixXd(counts.counts.cast<double>()));
}

double subshift_entropy(const MarkovChain& chain) { return subshift_entropy(chain.P); }

SymbolSequence simulate_walk(const MarkovChain& chain, std::size_t n, std::uint64_t seed) {
  SymbolSequence seq;
  seq.alphabet = chain.labels;
  if (n == 0 || chain.size() == 0) return seq;
  std::mt19937_64 rng(seed);
  const auto m = static_cast<Eigen::Index>(chain.size());

  Eigen::VectorXd start;
  try {
    start = stationary(chain).pi;
  } catch (const Error&) {
    start = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  }
  auto draw = [&](auto&& weight) {
    const double u = uniform01(rng);
    double acc = 0.0;
    Eigen::Index last = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double w = weight(j);
      if (w <= 0.0) continue;
      last = j;
      acc += w;
      if (u < acc) return j;
    }
    return last;
  };
  seq.events.reserve(n);
  Eigen::Index state = draw([&](Eigen::Index j) { return start(j); });
  for (std::size_t k = 0; k < n; ++k) {
    seq.events.push_back(
        SymbolEvent{static_cast<std::size_t>(state), static_cast<double>(k), 1.0});
    const Eigen::Index cur = state;
    state = draw([&](Eigen::Index j) { return chain.P(cur, j); });
  }
  return seq;
}

nlohmann::json chain_to_json(const ChainEstimate& est, const StationaryDist* pi) {
  nlohmann::json counts = nlohmann::json::array(), P = nlohmann::json::array();
  for (Eigen::Index i = 0; i < est.chain.P.rows(); ++i) {
    nlohmann::json crow = nlohmann::json::array(), prow = nlohmann::json::array();
    for (Eigen::Index j = 0; j < est.chain.P.cols(); ++j) {
      crow.push_back(est.counts.counts(i, j));
      prow.push_back(est.chain.P(i, j));
    }
    counts.push_back(crow);
    P.push_back(prow);
  }
  nlohmann::json out = {{"labels", est.chain.labels}, {"counts", counts}, {"P", P}};
  if (pi) {
    std::vector<double> p(pi->pi.data(), pi->pi.data() + pi->pi.size());
    out["pi"] = p;
  }
  return out;
}

void write_chain_dot(std::ostream& os, const MarkovChain& chain) {
  os << "digraph chain {\n";
  for (Eigen::Index i = 0; i < chain.P.rows(); ++i)
    for (Eigen::Index j = 0; j < chain.P.cols(); ++j)
      if (chain.P(i, j) > 0.0)
        fmt::print(os, "  \"{}\" -> \"{}\" [label=\"{:.4f}\"];\n",
                   chain.labels[static_cast<std::size_t>(i)],
                   chain.labels[static_cast<std::size_t>(j)], chain.P(i, j));
  os << "}\n";
}

}  // namespace fhr
