#include "fhr/sweep.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "fhr/error.hpp"
#include "fhr/markov.hpp"
#include "fhr/parallel.hpp"
#include "fhr/random.hpp"

namespace fhr {

using nlohmann::json;

std::string to_string(Measure m) {
  switch (m) {
    case Measure::EntropyRate: return "entropy_rate";
    case Measure::TopEntropy: return "h_top";
    case Measure::Lyapunov: return "lyapunov";
    case Measure::LempelZiv: return "lz";
  }
  return "unknown";
}

Measure measure_from_string(const std::string& s) {
  if (s == "entropy_rate") return Measure::EntropyRate;
  if (s == "h_top") return Measure::TopEntropy;
  if (s == "lyapunov") return Measure::Lyapunov;
  if (s == "lz") return Measure::LempelZiv;
  throw Error(ErrorKind::Config, "unknown measure '" + s + "'");
}

PlaneSection SectionConfig::resolve(const Trajectory& traj) const {
  double off = offset;
  if (offset_from_mean) {
    if (traj.size() == 0) throw Error(ErrorKind::Config, "mean section offset needs samples");
    const double len = norm(normal);
    if (!(len > 0.0)) throw Error(ErrorKind::Config, "section normal must be nonzero");
    double s = 0.0;
    for (const auto& x : traj.samples) s += dot(normal, x);
    off = s / static_cast<double>(traj.size());
  }
  return PlaneSection(normal, off, direction);
}

void SweepConfig::validate() const {
  if (!(std::isfinite(a_min) && std::isfinite(a_max) && a_min < a_max))
    throw Error(ErrorKind::Config, "sweep needs a_min < a_max");
  if (!(a_step > 0.0)) throw Error(ErrorKind::Config, "sweep a_step must be positive");
  if (measures.empty()) throw Error(ErrorKind::Config, "sweep needs at least one measure");
  if (pipeline.workers < 1) throw Error(ErrorKind::Config, "workers must be >= 1");
  if (pipeline.observable < 0 || pipeline.observable > 2)
    throw Error(ErrorKind::Config, "observable must be v, w or z");
  pipeline.integrator.validate();
  pipeline.partition.validate();
}

std::vector<double> SweepConfig::grid() const {
  const auto n = static_cast<std::size_t>(std::floor((a_max - a_min) / a_step + 1e-9));
  std::vector<double> g(n + 1);
  for (std::size_t i = 0; i <= n; ++i) g[i] = a_min + static_cast<double>(i) * a_step;
  return g;
}

namespace {

State3 to_state(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw Error(ErrorKind::Config, std::string(what) + " must be a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Axis axis_from_json(const json& j) {
  if (j.is_number_integer()) return j.get<int>();
  const auto s = j.get<std::string>();
  if (s == "v" || s == "x") return 0;
  if (s == "w") return 1;
  if (s == "z" || s == "y") return 2;
  throw Error(ErrorKind::Config, "unknown coordinate '" + s + "'");
}

CrossingDirection direction_from_string(const std::string& s) {
  if (s == "positive") return CrossingDirection::Positive;
  if (s == "negative") return CrossingDirection::Negative;
  if (s == "both") return CrossingDirection::Both;
  throw Error(ErrorKind::Config, "unknown crossing direction '" + s + "'");
}

const char* direction_name(CrossingDirection d) {
  switch (d) {
    case CrossingDirection::Positive: return "positive";
    case CrossingDirection::Negative: return "negative";
    case CrossingDirection::Both: return "both";
  }
  return "positive";
}

void read_model(const json& j, ModelParams& model) {
  const std::string form = j.value("form", "delnegro");
  const json p = j.value("params", json::object());
  if (form == "delnegro") {
    DelNegroParams d;
    d.a = p.value("a", d.a);
    d.alpha = p.value("alpha", d.alpha);
    d.b = p.value("b", d.b);
    d.c = p.value("c", d.c);
    d.z0 = p.value("z0", d.z0);
    d.d = p.value("d", d.d);
    d.validate();
    model = d;
  } else if (form == "rinzel") {
    RinzelParams r;
    r.I = p.value("I", r.I);
    r.eps = p.value("eps", r.eps);
    r.phi = p.value("phi", r.phi);
    r.a = p.value("a", r.a);
    r.b = p.value("b", r.b);
    r.c = p.value("c", r.c);
    r.d = p.value("d", r.d);
    r.validate();
    model = r;
  } else {
    throw Error(ErrorKind::Config, "unknown model form '" + form + "'");
  }
}

void read_integrator(const json& j, IntegratorConfig& c) {
  if (j.contains("method")) {
    const auto m = j["method"].get<std::string>();
    if (m == "rk45") c.method = IntegrationMethod::AdaptiveRk45;
    else if (m == "rk4") c.method = IntegrationMethod::FixedRk4;
    else throw Error(ErrorKind::Config, "unknown integration method '" + m + "'");
  }
  c.step = j.value("step", c.step);
  c.abs_tol = j.value("abs_tol", c.abs_tol);
  c.rel_tol = j.value("rel_tol", c.rel_tol);
  c.min_step = j.value("min_step", c.min_step);
  c.divergence_bound = j.value("divergence_bound", c.divergence_bound);
  c.t_transient = j.value("t_transient", c.t_transient);
  c.t_record = j.value("t_record", c.t_record);
  c.sample_dt = j.value("sample_dt", c.sample_dt);
  if (j.contains("initial_state")) c.initial_state = to_state(j["initial_state"], "initial_state");
  c.validate();
}

}  // namespace

SweepConfig config_from_json(const json& j, const std::string& base_dir) {
  SweepConfig cfg;
  PipelineConfig& p = cfg.pipeline;
  try {
    if (j.contains("model")) read_model(j["model"], p.model);
    if (j.contains("integrator")) read_integrator(j["integrator"], p.integrator);
    if (j.contains("section")) {
      const auto& s = j["section"];
      if (s.contains("normal")) p.section.normal = to_state(s["normal"], "section normal");
      if (s.contains("offset")) {
        if (s["offset"].is_string()) {
          if (s["offset"].get<std::string>() != "mean")
            throw Error(ErrorKind::Config, "section offset must be a number or \"mean\"");
          p.section.offset_from_mean = true;
        } else {
          p.section.offset = s["offset"].get<double>();
        }
      }
      if (s.contains("direction"))
        p.section.direction = direction_from_string(s["direction"].get<std::string>());
    }
    if (j.contains("observable")) p.observable = axis_from_json(j["observable"]);
    if (j.contains("periodicity")) {
      p.periodicity_tol = j["periodicity"].value("tol", p.periodicity_tol);
      p.max_period = j["periodicity"].value("max_period", p.max_period);
    }
    if (j.contains("partition")) {
      if (j["partition"].is_string()) {
        std::filesystem::path path = j["partition"].get<std::string>();
        if (path.is_relative() && !base_dir.empty()) path = std::filesystem::path(base_dir) / path;
        p.partition_path = path.lexically_normal().string();
        p.partition = load_partition(p.partition_path);
      } else {
        p.partition = partition_from_json(j["partition"]);
      }
    }
    if (j.contains("lyapunov")) {
      const auto& l = j["lyapunov"];
      auto& c = p.lyapunov;
      c.t_transient = l.value("t_transient", c.t_transient);
      c.t_average = l.value("t_average", c.t_average);
      c.renorm_interval = l.value("renorm_interval", c.renorm_interval);
      c.abs_tol = l.value("abs_tol", c.abs_tol);
      c.rel_tol = l.value("rel_tol", c.rel_tol);
      c.history_stride = l.value("history_stride", c.history_stride);
      c.batches = l.value("batches", c.batches);
      c.max_standard_error = l.value("max_standard_error", c.max_standard_error);
      c.validate();
    }
    if (j.contains("word_growth")) {
      const auto& w = j["word_growth"];
      p.word_growth.bins = w.value("bins", p.word_growth.bins);
      p.word_growth.max_length = w.value("max_length", p.word_growth.max_length);
      p.word_growth.min_segment = w.value("min_segment", p.word_growth.min_segment);
      p.word_growth.min_range = w.value("min_range", p.word_growth.min_range);
    }
    if (j.contains("reduction")) p.reduction = j["reduction"].get<std::map<std::string, int>>();
    if (j.contains("lz_source")) {
      const auto s = j["lz_source"].get<std::string>();
      if (s == "itinerary") p.lz_source = LzSource::Itinerary;
      else if (s == "walk") p.lz_source = LzSource::Walk;
      else throw Error(ErrorKind::Config, "lz_source must be itinerary or walk");
    }
    p.gap_threshold = j.value("gap_threshold", p.gap_threshold);
    if (j.contains("markov_order")) {
      const auto& m = j["markov_order"];
      p.order.max_order = m.value("max_order", p.order.max_order);
      p.order.surrogates = m.value("surrogates", p.order.surrogates);
      p.order.min_samples_per_context =
          m.value("min_samples_per_context", p.order.min_samples_per_context);
    }
    if (j.contains("refine")) {
      const auto& r = j["refine"];
      p.refine.restarts = r.value("restarts", p.refine.restarts);
      p.refine.max_iterations = r.value("max_iterations", p.refine.max_iterations);
      p.refine.max_points = r.value("max_points", p.refine.max_points);
      p.refine.silhouette_points = r.value("silhouette_points", p.refine.silhouette_points);
      p.refine.min_points = r.value("min_points", p.refine.min_points);
      p.refine.score_floor = r.value("score_floor", p.refine.score_floor);
    }
    p.seed = j.value("seed", p.seed);
    p.workers = j.value("workers", p.workers);
    if (j.contains("sweep")) {
      const auto& s = j["sweep"];
      cfg.a_min = s.value("a_min", cfg.a_min);
      cfg.a_max = s.value("a_max", cfg.a_max);
      cfg.a_step = s.value("a_step", cfg.a_step);
      if (s.contains("measures")) {
        cfg.measures.clear();
        for (const auto& m : s["measures"]) cfg.measures.insert(measure_from_string(m));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, std::string("malformed configuration: ") + e.what());
  }
  if (p.partition.regions.empty())
    throw Error(ErrorKind::Config, "configuration has no partition");
  cfg.validate();
  return cfg;
}

SweepConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Config, "config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j, std::filesystem::path(path).parent_path().string());
}

json config_to_json(const SweepConfig& cfg) {
  const PipelineConfig& p = cfg.pipeline;
  json j;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DelNegroParams>) {
          j["model"] = {{"form", "delnegro"},
                        {"params",
                         {{"a", m.a}, {"alpha", m.alpha}, {"b", m.b}, {"c", m.c},
                          {"z0", m.z0}, {"d", m.d}}}};
        } else {
          j["model"] = {{"form", "rinzel"},
                        {"params",
                         {{"I", m.I}, {"eps", m.eps}, {"phi", m.phi}, {"a", m.a},
                          {"b", m.b}, {"c", m.c}, {"d", m.d}}}};
        }
      },
      p.model);
  const auto& ic = p.integrator;
  j["integrator"] = {{"method", ic.method == IntegrationMethod::FixedRk4 ? "rk4" : "rk45"},
                     {"step", ic.step},
                     {"abs_tol", ic.abs_tol},
                     {"rel_tol", ic.rel_tol},
                     {"min_step", ic.min_step},
                     {"divergence_bound", ic.divergence_bound},
                     {"t_transient", ic.t_transient},
                     {"t_record", ic.t_record},
                     {"sample_dt", ic.sample_dt},
                     {"initial_state", ic.initial_state}};
  j["section"] = {{"normal", p.section.normal},
                  {"direction", direction_name(p.section.direction)}};
  if (p.section.offset_from_mean) j["section"]["offset"] = "mean";
  else j["section"]["offset"] = p.section.offset;
  j["observable"] = std::string(1, "vwz"[p.observable]);
  j["periodicity"] = {{"tol", p.periodicity_tol}, {"max_period", p.max_period}};
  if (!p.partition_path.empty()) j["partition"] = p.partition_path;
  else j["partition"] = partition_to_json(p.partition);
  const auto& l = p.lyapunov;
  j["lyapunov"] = {{"t_transient", l.t_transient},       {"t_average", l.t_average},
                   {"renorm_interval", l.renorm_interval}, {"abs_tol", l.abs_tol},
                   {"rel_tol", l.rel_tol},               {"history_stride", l.history_stride},
                   {"batches", l.batches},               {"max_standard_error", l.max_standard_error}};
  j["word_growth"] = {{"bins", p.word_growth.bins},
                      {"max_length", p.word_growth.max_length},
                      {"min_segment", p.word_growth.min_segment},
                      {"min_range", p.word_growth.min_range}};
  j["reduction"] = p.reduction;
  j["lz_source"] = p.lz_source == LzSource::Walk ? "walk" : "itinerary";
  j["gap_threshold"] = p.gap_threshold;
  j["markov_order"] = {{"max_order", p.order.max_order},
                       {"surrogates", p.order.surrogates},
                       {"min_samples_per_context", p.order.min_samples_per_context}};
  j["refine"] = {{"restarts", p.refine.restarts},
                 {"max_iterations", p.refine.max_iterations},
                 {"max_points", p.refine.max_points},
                 {"silhouette_points", p.refine.silhouette_points},
                 {"min_points", p.refine.min_points},
                 {"score_floor", p.refine.score_floor}};
  j["seed"] = p.seed;
  j["workers"] = p.workers;
  json measures = json::array();
  for (auto m : cfg.measures) measures.push_back(to_string(m));
  j["sweep"] = {{"a_min", cfg.a_min},
                {"a_max", cfg.a_max},
                {"a_step", cfg.a_step},
                {"measures", measures}};
  return j;
}

namespace {

ModelParams with_a(ModelParams m, double a) {
  std::visit([a](auto& p) { p.a = a; }, m);
  return m;
}

std::string describe(const Error& e) {
  return fmt::format("{}: {}", to_string(e.kind()), e.what());
}

}  // namespace

SweepRow run_point(double a, std::size_t index, const SweepConfig& cfg) {
  const PipelineConfig& p = cfg.pipeline;
  SweepRow row;
  row.a = a;
  auto fail = [&row](const Error& e) {
    if (row.error.empty()) row.error = describe(e);
    if (row.status == "ok") row.status = "partial";
  };
  auto wants = [&cfg](Measure m) { return cfg.measures.count(m) > 0; };

  const ModelParams model = with_a(p.model, a);
  Trajectory traj;
  try {
    traj = attractor_sample(model, p.integrator);
  } catch (const Error& e) {
    row.status = "failed";
    row.error = describe(e);
    return row;
  }

  std::vector<Crossing> crossings;
  try {
    const PlaneSection sec = p.section.resolve(traj);
    row.section_offset = sec.offset();
    crossings = detect_crossings(traj, sec);
    row.crossings = crossings.size();
    if (crossings.size() >= 2)
      row.mean_return_time = (crossings.back().t - crossings.front().t) /
                             static_cast<double>(crossings.size() - 1);
    try {
      row.periodicity = classify_periodicity(crossings, p.periodicity_tol, p.max_period).describe();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::TooFewCrossings) throw;
      row.periodicity = "undetermined";
    }
  } catch (const Error& e) {
    fail(e);
  }

  SymbolSequence seq;
  try {
    seq = symbolize(traj, p.partition);
    row.events = seq.size();
  } catch (const Error& e) {
    fail(e);
  }

  if (wants(Measure::EntropyRate) && row.events > 0) {
    try {
      std::vector<std::string> absent;
      const SymbolSequence visited = restrict_to_visited(seq, &absent);
      for (std::size_t i = 0; i < absent.size(); ++i) row.absent += (i ? ";" : "") + absent[i];
      const ChainEstimate est = estimate_chain(visited);
      const StationaryDist pi = stationary(est.chain);
      row.h_rate = entropy_rate(est.chain, pi);
      try {
        row.h_subshift = subshift_entropy(est.counts);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoCycle) throw;
      }
    } catch (const Error& e) {
      fail(e);
    }
  }

  if (wants(Measure::TopEntropy)) {
    try {
      row.h_top = word_growth_entropy(crossings, p.observable, p.word_growth).value;
    } catch (const Error& e) {
      fail(e);
    }
  }

  if (wants(Measure::Lyapunov)) {
    try {
      const auto* dn = std::get_if<DelNegroParams>(&model);
      if (dn == nullptr)
        throw Error(ErrorKind::Config, "Lyapunov spectrum needs the Del Negro form");
      LyapunovConfig lc = p.lyapunov;
      lc.initial_state = p.integrator.initial_state;
      lc.divergence_bound = p.integrator.divergence_bound;
      lc.fail_if_not_converged = false;
      const LyapunovResult lr = lyapunov_spectrum(*dn, lc);
      row.lambda = lr.exponents;
      row.lambda_se = lr.standard_error;
      row.lyapunov_converged = lr.converged ? 1 : 0;
      row.htop_pesin = pesin_proxy(lr).value;
    } catch (const Error& e) {
      fail(e);
    }
  }

  if (wants(Measure::LempelZiv) && row.events > 0) {
    try {
      std::vector<std::uint8_t> bits;
      if (p.lz_source == LzSource::Itinerary) {
        bits = binarize_walk(seq, p.reduction);
      } else {
        SymbolSequence visited = restrict_to_visited(seq);
        const ChainEstimate est = estimate_chain(visited);
        bits = binarize_walk(simulate_walk(est.chain, seq.size(), derive_seed(p.seed, index)),
                             p.reduction);
      }
      const LZResult lz = lz76(bits);
      row.lz_c = static_cast<double>(lz.c);
      row.lz_norm = lz.normalized;
    } catch (const Error& e) {
      fail(e);
    }
  }
  return row;
}

std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  const auto grid = cfg.grid();
  std::vector<SweepRow> rows(grid.size());
  parallel_for_index(grid.size(), cfg.pipeline.workers,
                     [&](std::size_t i) { rows[i] = run_point(grid[i], i, cfg); });
  return rows;
}

std::vector<EntropyReport> compare_report(const std::vector<SweepRow>& rows,
                                          const std::set<Measure>& measures) {
  for (Measure m : {Measure::EntropyRate, Measure::TopEntropy})
    if (!measures.count(m))
      throw Error(ErrorKind::MissingMeasure, "gap report needs measure '" + to_string(m) + "'");
  std::vector<EntropyReport> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(EntropyReport{r.a, r.h_rate, r.h_top, r.lz_norm});
  return out;
}

const char* const kSweepHeader =
    "a,status,periodicity,section_offset,crossings,events,h_rate,h_subshift,h_top,htop_pesin,"
    "mean_return_time,lambda1,lambda2,lambda3,lambda1_se,lambda2_se,lambda3_se,"
    "lyapunov_converged,lz_c,lz_norm,absent,error";
const char* const kComplexityHeader = "a,lambda1,lambda2,lambda3,htop_pesin,htop_words,lz_c,lz_norm";
const char* const kReportHeader = "a,h_rate,h_top,gap,lz_norm";

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  return fmt::format("{}", x);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_real(const std::string& s) {
  if (s == "nan" || s.empty()) return kMissing;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Config, "not a number in sweep table: '" + s + "'");
  }
}

}  // namespace

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepHeader << '\n';
  for (const auto& r : rows) {
    os << format_real(r.a) << ',' << r.status << ',' << csv_field(r.periodicity) << ','
       << format_real(r.section_offset) << ',' << r.crossings << ',' << r.events << ','
       << format_real(r.h_rate) << ',' << format_real(r.h_subshift) << ','
       << format_real(r.h_top) << ',' << format_real(r.htop_pesin) << ','
       << format_real(r.mean_return_time);
    for (double l : r.lambda) os << ',' << format_real(l);
    for (double l : r.lambda_se) os << ',' << format_real(l);
    os << ',' << r.lyapunov_converged << ',' << format_real(r.lz_c) << ','
       << format_real(r.lz_norm) << ',' << csv_field(r.absent) << ',' << csv_field(r.error)
       << '\n';
  }
}

void write_complexity_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kComplexityHeader << '\n';
  for (const auto& r : rows) {
    os << format_real(r.a);
    for (double l : r.lambda) os << ',' << format_real(l);
    os << ',' << format_real(r.htop_pesin) << ',' << format_real(r.h_top) << ','
       << format_real(r.lz_c) << ',' << format_real(r.lz_norm) << '\n';
  }
}

void write_report_csv(std::ostream& os, const std::vector<EntropyReport>& reports) {
  os << kReportHeader << '\n';
  for (const auto& r : reports)
    os << format_real(r.a) << ',' << format_real(r.h_rate) << ',' << format_real(r.h_top) << ','
       << format_real(r.gap()) << ',' << format_real(r.lz_norm) << '\n';
}

namespace {

json real_json(double x) { return std::isnan(x) ? json(nullptr) : json(x); }

}  // namespace

json sweep_to_json(const std::vector<SweepRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"a", r.a},
                   {"status", r.status},
                   {"periodicity", r.periodicity},
                   {"section_offset", real_json(r.section_offset)},
                   {"crossings", r.crossings},
                   {"events", r.events},
                   {"h_rate", real_json(r.h_rate)},
                   {"h_subshift", real_json(r.h_subshift)},
                   {"h_top", real_json(r.h_top)},
                   {"htop_pesin", real_json(r.htop_pesin)},
                   {"mean_return_time", real_json(r.mean_return_time)},
                   {"lambda1", real_json(r.lambda[0])},
                   {"lambda2", real_json(r.lambda[1])},
                   {"lambda3", real_json(r.lambda[2])},
                   {"lambda1_se", real_json(r.lambda_se[0])},
                   {"lambda2_se", real_json(r.lambda_se[1])},
                   {"lambda3_se", real_json(r.lambda_se[2])},
                   {"lyapunov_converged", r.lyapunov_converged},
                   {"lz_c", real_json(r.lz_c)},
                   {"lz_norm", real_json(r.lz_norm)},
                   {"absent", r.absent},
                   {"error", r.error}});
  }
  return out;
}

json reports_to_json(const std::vector<EntropyReport>& reports) {
  json out = json::array();
  for (const auto& r : reports)
    out.push_back({{"a", r.a},
                   {"h_rate", real_json(r.h_rate)},
                   {"h_top", real_json(r.h_top)},
                   {"gap", real_json(r.gap())},
                   {"lz_norm", real_json(r.lz_norm)}});
  return out;
}

std::vector<SweepRow> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kSweepHeader)
    throw Error(ErrorKind::Config, "input is not a sweep table (unexpected header)");
  std::vector<SweepRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 22)
      throw Error(ErrorKind::Config, fmt::format("sweep table row has {} fields", f.size()));
    SweepRow r;
    r.a = parse_real(f[0]);
    r.status = f[1];
    r.periodicity = f[2];
    r.section_offset = parse_real(f[3]);
    r.crossings = static_cast<std::size_t>(parse_real(f[4]));
    r.events = static_cast<std::size_t>(parse_real(f[5]));
    r.h_rate = parse_real(f[6]);
    r.h_subshift = parse_real(f[7]);
    r.h_top = parse_real(f[8]);
    r.htop_pesin = parse_real(f[9]);
    r.mean_return_time = parse_real(f[10]);
    for (int k = 0; k < 3; ++k) r.lambda[k] = parse_real(f[11 + k]);
    for (int k = 0; k < 3; ++k) r.lambda_se[k] = parse_real(f[14 + k]);
    r.lyapunov_converged = static_cast<int>(parse_real(f[17]));
    r.lz_c = parse_real(f[18]);
    r.lz_norm = parse_real(f[19]);
    r.absent = f[20];
    r.error = f[21];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace fhr
