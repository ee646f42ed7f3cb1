// Command-line front end for the FitzHugh-Rinzel coarse-graining pipeline.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "fhr/complexity.hpp"
#include "fhr/error.hpp"
#include "fhr/markov.hpp"
#include "fhr/partition.hpp"
#include "fhr/refine.hpp"
#include "fhr/sections.hpp"
#include "fhr/sweep.hpp"

using nlohmann::json;
using namespace fhr;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<double> a;
};

void add_common(CLI::App* sub, Common& c, bool needs_config = true) {
  auto* opt = sub->add_option("-c,--config", c.config, "JSON configuration file");
  if (needs_config) opt->required();
  sub->add_option("-o,--out", c.out, "output path (default: stdout)");
  sub->add_option("-f,--format", c.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--seed", c.seed, "base random seed");
  sub->add_option("-j,--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
}

SweepConfig configure(const Common& c) {
  SweepConfig cfg = load_config(c.config);
  if (c.seed) cfg.pipeline.seed = *c.seed;
  if (c.workers) cfg.pipeline.workers = *c.workers;
  if (c.a) std::visit([&](auto& p) { p.a = *c.a; }, cfg.pipeline.model);
  return cfg;
}

double model_a(const SweepConfig& cfg) {
  return std::visit([](const auto& p) { return p.a; }, cfg.pipeline.model);
}

// Runs fn with the output stream selected by --out.
template <class Fn>
void emit(const Common& c, Fn&& fn) {
  if (c.out.empty() || c.out == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream os(c.out);
  if (!os) throw Error(ErrorKind::Io, "cannot write '" + c.out + "'");
  fn(os);
  if (!os) throw Error(ErrorKind::Io, "write to '" + c.out + "' failed");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os || !(os << text)) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
}

Trajectory trajectory_for(const SweepConfig& cfg) {
  return attractor_sample(cfg.pipeline.model, cfg.pipeline.integrator);
}

json crossing_json(const Crossing& x) {
  return {{"t", x.t}, {"state", x.state}, {"direction", x.direction}};
}

int cmd_simulate(const Common& c) {
  const auto cfg = configure(c);
  const Trajectory traj = trajectory_for(cfg);
  emit(c, [&](std::ostream& os) {
    if (c.format == "json") {
      os << json{{"a", model_a(cfg)},
                 {"t0", traj.t0},
                 {"sample_dt", traj.sample_dt},
                 {"samples", traj.samples}}
                .dump()
         << '\n';
    } else {
      write_trajectory_csv(os, traj);
    }
  });
  return 0;
}

int cmd_poincare(const Common& c, bool return_map_only) {
  const auto cfg = configure(c);
  const auto& p = cfg.pipeline;
  const Trajectory traj = trajectory_for(cfg);
  const PlaneSection sec = p.section.resolve(traj);
  const auto crossings = detect_crossings(traj, sec);
  std::optional<PeriodicityVerdict> verdict;
  try {
    verdict = classify_periodicity(crossings, p.periodicity_tol, p.max_period);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::TooFewCrossings) throw;
  }
  emit(c, [&](std::ostream& os) {
    if (c.format == "json") {
      json j{{"a", model_a(cfg)}, {"section_offset", sec.offset()}};
      j["periodicity"] = verdict ? json{{"kind", verdict->describe()},
                                        {"period", verdict->period},
                                        {"residual", verdict->residual}}
                                 : json{{"kind", "undetermined"}};
      auto& arr = j["crossings"] = json::array();
      for (const auto& x : crossings) arr.push_back(crossing_json(x));
      if (crossings.size() >= 2) j["return_map"] = return_map(crossings, p.observable);
      os << j.dump() << '\n';
    } else if (return_map_only) {
      os << "x_k,x_k1\n";
      for (const auto& [x, y] : return_map(crossings, p.observable))
        os << format_real(x) << ',' << format_real(y) << '\n';
    } else {
      os << "t,v,w,z,direction\n";
      for (const auto& x : crossings)
        os << format_real(x.t) << ',' << format_real(x.state[0]) << ','
           << format_real(x.state[1]) << ',' << format_real(x.state[2]) << ',' << x.direction
           << '\n';
    }
  });
  std::cerr << "periodicity: " << (verdict ? verdict->describe() : "undetermined") << '\n';
  return 0;
}

struct GridOverride {
  std::optional<double> a_min, a_max, a_step;
  void apply(SweepConfig& cfg) const {
    if (a_min) cfg.a_min = *a_min;
    if (a_max) cfg.a_max = *a_max;
    if (a_step) cfg.a_step = *a_step;
    cfg.validate();
  }
};

int cmd_bifurcation(const Common& c, const GridOverride& g) {
  auto cfg = configure(c);
  g.apply(cfg);
  const auto& p = cfg.pipeline;
  const auto* dn = std::get_if<DelNegroParams>(&p.model);
  if (dn == nullptr) throw Error(ErrorKind::Config, "bifurcation scans use the Del Negro form");
  if (p.section.offset_from_mean)
    throw Error(ErrorKind::Config, "bifurcation scans need a fixed section offset");
  const PlaneSection sec(p.section.normal, p.section.offset, p.section.direction);
  const auto rows = bifurcation_scan(cfg.grid(), *dn, sec, p.observable, p.integrator, p.workers);
  emit(c, [&](std::ostream& os) {
    if (c.format == "json") {
      json arr = json::array();
      for (const auto& r : rows)
        arr.push_back({{"a", r.a},
                       {"coords", r.coords},
                       {"error", r.error ? json(*r.error) : json(nullptr)}});
      os << arr.dump() << '\n';
    } else {
      write_bifurcation_csv(os, rows);
    }
  });
  return 0;
}

int cmd_symbolize(const Common& c) {
  const auto cfg = configure(c);
  const Trajectory traj = trajectory_for(cfg);
  const SymbolSequence seq = symbolize(traj, cfg.pipeline.partition);
  emit(c, [&](std::ostream& os) {
    if (c.format == "json") {
      json ev = json::array();
      for (std::size_t i = 0; i < seq.size(); ++i)
        ev.push_back({{"label", seq.label(i)},
                      {"entry_t", seq.events[i].entry_t},
                      {"dwell", seq.events[i].dwell}});
      os << json{{"alphabet", seq.alphabet}, {"events", ev}}.dump() << '\n';
    } else {
      write_symbols_csv(os, seq);
    }
  });
  return 0;
}

SymbolSequence read_symbols_csv(const std::string& path, const std::vector<std::string>& alphabet) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (line != "label,entry_t,dwell")
    throw Error(ErrorKind::Config, "'" + path + "' is not a symbol table");
  SymbolSequence seq;
  seq.alphabet = alphabet;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string label, t, d;
    std::getline(ss, label, ',');
    std::getline(ss, t, ',');
    std::getline(ss, d, ',');
    std::size_t idx = 0;
    while (idx < seq.alphabet.size() && seq.alphabet[idx] != label) ++idx;
    if (idx == seq.alphabet.size()) seq.alphabet.push_back(label);
    seq.events.push_back(SymbolEvent{idx, std::stod(t), std::stod(d)});
  }
  return seq;
}

int cmd_markov(const Common& c, const std::string& symbols_path, const std::string& dot_path,
               double smoothing) {
  SymbolSequence seq;
  if (!symbols_path.empty()) {
    std::vector<std::string> alphabet;
    if (!c.config.empty()) alphabet = load_config(c.config).pipeline.partition.labels();
    seq = read_symbols_csv(symbols_path, alphabet);
  } else {
    if (c.config.empty()) throw Error(ErrorKind::Config, "markov needs --config or --symbols");
    const auto cfg = configure(c);
    seq = symbolize(trajectory_for(cfg), cfg.pipeline.partition);
  }
  std::vector<std::string> absent;
  const SymbolSequence visited = restrict_to_visited(seq, &absent);
  const ChainEstimate est = estimate_chain(visited, smoothing);
  const ChainStructure st = check_irreducible_aperiodic(est.chain);
  std::optional<StationaryDist> pi;
  double h = kMissing, hs = kMissing;
  if (st.irreducible) {
    pi = stationary(est.chain);
    h = entropy_rate(est.chain, *pi);
  }
  try {
    hs = subshift_entropy(est.counts);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoCycle) throw;
  }
  if (!dot_path.empty()) {
    std::ofstream os(dot_path);
    if (!os) throw Error(ErrorKind::Io, "cannot write '" + dot_path + "'");
    write_chain_dot(os, est.chain);
  }
  emit(c, [&](std::ostream& os) {
    if (c.format == "json") {
      json j = chain_to_json(est, pi ? &*pi : nullptr);
      j["irreducible"] = st.irreducible;
      j["aperiodic"] = st.aperiodic;
      j["period"] = st.period;
      j["entropy_rate"] = std::isnan(h) ? json(nullptr) : json(h);
      j["subshift_entropy"] = std::isnan(hs) ? json(nullptr) : json(hs);
      j["absent"] = absent;
      os << j.dump() << '\n';
    } else {
      os << "from,to,count,probability\n";
      const auto& labels = est.chain.labels;
      for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t k = 0; k < labels.size(); ++k)
          os << labels[i] << ',' << labels[k] << ',' << est.counts.counts(i, k) << ','
             << format_real(est.chain.P(i, k)) << '\n';
    }
  });
  std::cerr << fmt::format("entropy_rate={} subshift_entropy={}\n", format_real(h),
                           format_real(hs));
  return 0;
}

int cmd_sweep(const Common& c, const GridOverride& g, const std::string& complexity_out,
              const std::string& report_out) {
  auto cfg = configure(c);
  g.apply(cfg);
  const auto rows = run_sweep(cfg);
  emit(c, [&](std::ostream& os) {
    if (c.format == "json") os << sweep_to_json(rows).dump() << '\n';
    else write_sweep_csv(os, rows);
  });
  if (!complexity_out.empty()) {
    std::ostringstream ss;
    write_complexity_csv(ss, rows);
    write_file(complexity_out, ss.str());
  }
  if (!report_out.empty()) {
    std::ostringstream ss;
    write_report_csv(ss, compare_report(rows, cfg.measures));
    write_file(report_out, ss.str());
  }
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.status != "ok";
  std::cerr << fmt::format("{} rows, {} with errors\n", rows.size(), failed);
  return 0;
}

int cmd_gap_scan(const Common& c, const GridOverride& g, const std::string& input,
                 std::optional<double> threshold) {
  std::vector<SweepRow> rows;
  double thr = 0.2;
  std::set<Measure> measures{Measure::EntropyRate, Measure::TopEntropy};
  if (!c.config.empty()) {
    auto cfg = configure(c);
    thr = cfg.pipeline.gap_threshold;
    if (input.empty()) {
      g.apply(cfg);
      rows = run_sweep(cfg);
      measures = cfg.measures;
    }
  }
  if (!input.empty()) {
    std::ifstream in(input);
    if (!in) throw Error(ErrorKind::Io, "cannot read '" + input + "'");
    rows = read_sweep_csv(in);
  } else if (c.config.empty()) {
    throw Error(ErrorKind::Config, "gap-scan needs --input or --config");
  }
  if (threshold) thr = *threshold;
  const auto reports = compare_report(rows, measures);
  const auto flagged = entropy_gap_scan(reports, thr);
  emit(c, [&](std::ostream& os) {
    if (c.format == "json") {
      json arr = json::array();
      for (const auto& f : flagged)
        arr.push_back({{"a_first", f.a_first},
                       {"a_last", f.a_last},
                       {"a_peak", f.a_peak},
                       {"peak_gap", f.peak_gap},
                       {"members", f.members}});
      os << json{{"threshold", thr}, {"intervals", arr}, {"reports", reports_to_json(reports)}}
                .dump()
         << '\n';
    } else {
      os << "a_first,a_last,a_peak,peak_gap,count\n";
      for (const auto& f : flagged)
        os << format_real(f.a_first) << ',' << format_real(f.a_last) << ','
           << format_real(f.a_peak) << ',' << format_real(f.peak_gap) << ',' << f.members.size()
           << '\n';
    }
  });
  return 0;
}

int cmd_suggest(const Common& c, const std::string& patch_out, const std::string& partition_out,
                std::size_t stride, const std::string& sampling) {
  auto cfg = configure(c);
  auto& p = cfg.pipeline;
  if (c.seed) p.refine.seed = p.order.seed = *c.seed;
  else p.refine.seed = p.order.seed = p.seed;
  const double a = model_a(cfg);
  const Trajectory traj = trajectory_for(cfg);
  const SymbolSequence seq = symbolize(traj, p.partition);

  SweepConfig point = cfg;
  point.measures = {Measure::EntropyRate, Measure::TopEntropy};
  const SweepRow row = run_point(a, 0, point);
  const EntropyReport report{a, row.h_rate, row.h_top, kMissing};

  std::optional<MarkovOrderResult> order;
  std::string order_error;
  try {
    order = markov_order_test(restrict_to_visited(seq), p.order);
  } catch (const Error& e) {
    order_error = fmt::format("{}: {}", to_string(e.kind()), e.what());
  }

  const auto points =
      tag_points(traj, p.partition, seq, stride, point_sampling_from_string(sampling));
  RefinementSuggestion s = suggest_refinement(points, p.partition, p.refine);
  if (std::isfinite(report.gap()) && report.gap() > p.gap_threshold)
    s.evidence.push_back(Evidence::EntropyGap);
  if (order && order->best_order > 1) s.evidence.push_back(Evidence::MarkovOrder);

  const PartitionSpec proposed = apply_suggestion(p.partition, s);
  SweepConfig refined = point;
  refined.pipeline.partition = proposed;
  const SweepRow row_after = run_point(a, 0, refined);
  const EntropyReport after_report{a, row_after.h_rate, row_after.h_top, kMissing};
  const bool accepted = validate_refinement(report, after_report);
  const json before = partition_to_json(p.partition);
  const json after = partition_to_json(proposed);
  const json patch = json::diff(before, after);
  if (!patch_out.empty()) write_file(patch_out, patch.dump(2) + "\n");
  if (!partition_out.empty()) write_file(partition_out, after.dump(2) + "\n");

  emit(c, [&](std::ostream& os) {
    if (c.format == "json") {
      json j{{"a", a},
             {"suggestion", suggestion_to_json(s)},
             {"report",
              {{"h_rate", std::isnan(report.h_rate) ? json(nullptr) : json(report.h_rate)},
               {"h_top", std::isnan(report.h_top) ? json(nullptr) : json(report.h_top)},
               {"gap", std::isnan(report.gap()) ? json(nullptr) : json(report.gap())}}},
             {"patch", patch},
             {"refined_report",
              {{"h_rate", std::isnan(after_report.h_rate) ? json(nullptr) : json(after_report.h_rate)},
               {"h_top", std::isnan(after_report.h_top) ? json(nullptr) : json(after_report.h_top)},
               {"gap", std::isnan(after_report.gap()) ? json(nullptr) : json(after_report.gap())}}},
             {"accepted", accepted}};
      j["markov_order"] = order ? order_result_to_json(*order) : json{{"error", order_error}};
      json occ = json::array();
      for (const auto& o : region_occupancy(seq, 1e-3))
        occ.push_back({{"label", o.label},
                       {"visits", o.visits},
                       {"fraction", o.fraction},
                       {"vanished", o.vanished}});
      j["occupancy"] = occ;
      os << j.dump(2) << '\n';
    } else {
      os << "label,points,silhouette,divergence_bits,score\n";
      for (const auto& r : s.candidates)
        os << r.label << ',' << r.points << ',' << format_real(r.silhouette) << ','
           << format_real(r.divergence) << ',' << format_real(r.score) << '\n';
    }
  });
  std::cerr << "suggested split of region '" << s.target << "' (score " << format_real(s.score)
            << "), refinement " << (accepted ? "accepted" : "rejected") << "\n";
  return 0;
}

int cmd_lz(const Common& c, const std::string& bits, const std::string& input) {
  std::vector<std::uint8_t> seq;
  auto parse = [&seq](const std::string& text) {
    for (char ch : text) {
      if (ch == '0' || ch == '1') seq.push_back(static_cast<std::uint8_t>(ch - '0'));
      else if (!std::isspace(static_cast<unsigned char>(ch)))
        throw Error(ErrorKind::Config, fmt::format("not a binary digit: '{}'", ch));
    }
  };
  if (!bits.empty()) {
    parse(bits);
  } else if (!input.empty()) {
    std::ifstream in(input);
    if (!in) throw Error(ErrorKind::Io, "cannot read '" + input + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    parse(ss.str());
  } else if (!c.config.empty()) {
    const auto cfg = configure(c);
    const SymbolSequence s = symbolize(trajectory_for(cfg), cfg.pipeline.partition);
    seq = binarize_walk(s, cfg.pipeline.reduction);
  } else {
    throw Error(ErrorKind::Config, "lz needs --bits, --input or --config");
  }
  if (seq.empty()) throw Error(ErrorKind::InsufficientData, "empty binary sequence");
  const LZResult r = lz76(seq);
  emit(c, [&](std::ostream& os) {
    if (c.format == "json") {
      os << json{{"n", seq.size()}, {"c", r.c}, {"normalized", r.normalized}}.dump() << '\n';
    } else {
      os << "n,c,normalized\n" << seq.size() << ',' << r.c << ',' << format_real(r.normalized)
         << '\n';
    }
  });
  return 0;
}

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FitzHugh-Rinzel attractor coarse-graining: simulation, sections, Markov "
               "chains and complexity measures"};
  app.require_subcommand(1);

  Common c;
  GridOverride grid;
  std::string symbols_path, dot_path, input, bits, complexity_out, report_out, patch_out,
      partition_out;
  double smoothing = 0.0;
  bool return_map_only = false;
  std::optional<double> threshold;
  std::size_t stride = 10;
  std::string sampling = "exit";

  auto* sim = app.add_subcommand("simulate", "integrate and write the sampled trajectory");
  add_common(sim, c);
  sim->add_option("-a,--param-a", c.a, "override the parameter a");

  auto* poi = app.add_subcommand("poincare", "section crossings and periodicity");
  add_common(poi, c);
  poi->add_option("-a,--param-a", c.a, "override the parameter a");
  poi->add_flag("--return-map", return_map_only, "write return-map pairs instead of crossings");

  auto add_grid = [&grid](CLI::App* sub) {
    sub->add_option("--a-min", grid.a_min, "grid start");
    sub->add_option("--a-max", grid.a_max, "grid end");
    sub->add_option("--a-step", grid.a_step, "grid step");
  };

  auto* bif = app.add_subcommand("bifurcation", "crossing coordinates over the a grid");
  add_common(bif, c);
  add_grid(bif);

  auto* sym = app.add_subcommand("symbolize", "region-entry symbol sequence");
  add_common(sym, c);
  sym->add_option("-a,--param-a", c.a, "override the parameter a");

  auto* mk = app.add_subcommand("markov", "estimate the transition chain");
  add_common(mk, c, false);
  mk->add_option("-a,--param-a", c.a, "override the parameter a");
  mk->add_option("--symbols", symbols_path, "symbol table from 'symbolize' instead of simulating");
  mk->add_option("--dot", dot_path, "also write the chain graph in DOT format");
  mk->add_option("--smoothing", smoothing, "pseudo-count added to every transition")
      ->check(CLI::NonNegativeNumber);

  auto* sw = app.add_subcommand("sweep", "full pipeline over the a grid");
  add_common(sw, c);
  add_grid(sw);
  sw->add_option("--complexity-out", complexity_out, "also write the complexity table");
  sw->add_option("--report-out", report_out, "also write the entropy gap table");

  auto* gap = app.add_subcommand("gap-scan", "flag parameters with a large entropy gap");
  add_common(gap, c, false);
  add_grid(gap);
  gap->add_option("-i,--input", input, "sweep table to scan instead of running a sweep");
  gap->add_option("--threshold", threshold, "gap threshold, nats");

  auto* sug = app.add_subcommand("suggest-split", "propose a region split at one parameter");
  add_common(sug, c);
  sug->add_option("-a,--param-a", c.a, "override the parameter a");
  sug->add_option("--patch-out", patch_out, "write the partition patch (JSON Patch)");
  sug->add_option("--partition-out", partition_out, "write the proposed partition file");
  sug->add_option("--stride", stride, "use every n-th sample with --points interior")
      ->check(CLI::PositiveNumber);
  sug->add_option("--points", sampling, "points to cluster: interior, entry or exit")
      ->check(CLI::IsMember({"interior", "entry", "exit"}));

  auto* lz = app.add_subcommand("lz", "Lempel-Ziv complexity of a binary sequence");
  add_common(lz, c, false);
  lz->add_option("-a,--param-a", c.a, "override the parameter a");
  lz->add_option("--bits", bits, "binary string");
  lz->add_option("-i,--input", input, "file of 0/1 characters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("UsageError", e.what());
    return 64;
  }

  try {
    if (*sim) return cmd_simulate(c);
    if (*poi) return cmd_poincare(c, return_map_only);
    if (*bif) return cmd_bifurcation(c, grid);
    if (*sym) return cmd_symbolize(c);
    if (*mk) return cmd_markov(c, symbols_path, dot_path, smoothing);
    if (*sw) return cmd_sweep(c, grid, complexity_out, report_out);
    if (*gap) return cmd_gap_scan(c, grid, input, threshold);
    if (*sug) return cmd_suggest(c, patch_out, partition_out, stride, sampling);
    if (*lz) return cmd_lz(c, bits, input);
  } catch (const Error& e) {
    print_error(std::string(to_string(e.kind())), e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error("InternalError", e.what());
    return 3;
  }
  return 0;
}
