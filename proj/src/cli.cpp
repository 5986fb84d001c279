#include "freqbin/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "freqbin/bell.hpp"
#include "freqbin/closedform.hpp"
#include "freqbin/config.hpp"
#include "freqbin/counts.hpp"
#include "freqbin/record_json.hpp"
#include "parallel.hpp"

#ifndef FREQBIN_VERSION
#define FREQBIN_VERSION "0.0.0"
#endif

namespace freqbin {

std::string version() { return FREQBIN_VERSION; }

namespace {

using Json = nlohmann::ordered_json;

constexpr double kPi = std::numbers::pi;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Curve and table values: 12 significant digits.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string pair_label(std::size_t k) {
  const auto [i, j] = kSettingPairs[k];
  return "A" + std::to_string(i) + ",B" + std::to_string(j);
}

TimeWindow parse_window(const std::string& text, const char* what) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw UsageError(std::string(what) + " window must be 'start,stop' in seconds");
  }
  try {
    std::size_t used = 0;
    const std::string first = text.substr(0, comma);
    const std::string second = text.substr(comma + 1);
    TimeWindow w{std::stod(first, &used), 0.0};
    if (used != first.size()) throw std::invalid_argument(first);
    w.stop = std::stod(second, &used);
    if (used != second.size()) throw std::invalid_argument(second);
    return w;
  } catch (const std::logic_error&) {
    throw UsageError(std::string("cannot parse ") + what + " window '" + text + "'");
  }
}

struct QuadOptions {
  double a0 = 0.2318, a1 = 0.6955, b0 = 0.2318, b1 = 0.6955;
  double alpha0 = 0.0, alpha1 = kPi, beta0 = 0.0, beta1 = kPi;

  SettingQuad quad() const {
    return {{a0, alpha0}, {a1, alpha1}, {b0, beta0}, {b1, beta1}};
  }
};

Json quad_to_json(const SettingQuad& q) {
  auto setting = [](const ModulationSetting& s) {
    return Json{{"amplitude", s.amplitude()}, {"phase", s.phase()}};
  };
  return Json{{"a0", setting(q.a0)}, {"a1", setting(q.a1)},
              {"b0", setting(q.b0)}, {"b1", setting(q.b1)}};
}

enum class ModelKind { ideal, finite, both };

struct Context {
  RunConfig config;
  std::string out_path;
  std::string format;  // "", "csv" or "json"
  std::ostream* stdout_stream = nullptr;

  ProbTable model_table(const ModulationSetting& a, const ModulationSetting& b,
                        ModelKind kind) const {
    if (kind == ModelKind::finite) {
      return finite_probabilities(a, b, config.bins, config.measurement,
                                  config.dispersion, config.truncation);
    }
    return with_crosstalk(ideal_probabilities(a, b), config.measurement.crosstalk);
  }

  std::string comment_header(const std::string& command) const {
    return "# freqbin " + version() + " " + command + "\n# config: " +
           config_to_json(config).dump() + "\n";
  }

  Json json_envelope(const std::string& command) const {
    return Json{{"tool", "freqbin"},
                {"version", version()},
                {"command", command},
                {"config", config_to_json(config)}};
  }

  void write(const std::string& content) const {
    if (out_path.empty()) {
      *stdout_stream << content;
      return;
    }
    write_file(out_path, content);
  }

  static void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
      throw DataError("cannot open '" + path + "' for writing");
    }
    f << content;
    if (!f) {
      throw DataError("failed writing '" + path + "'");
    }
  }
};

// pattern -----------------------------------------------------------------

struct PatternOptions {
  double a = 0.6955;
  double b = 0.6955;
  double beta = 0.0;
  double alpha_min = 0.0;
  double alpha_max = 2.0 * kPi;
  int steps = 25;
  ModelKind model = ModelKind::ideal;
  std::string record_path;
};

void run_pattern(const Context& ctx, const PatternOptions& opt) {
  if (opt.steps < 2) {
    throw UsageError("pattern: --steps must be >= 2");
  }
  if (!(opt.alpha_max > opt.alpha_min)) {
    throw UsageError("pattern: --alpha-max must exceed --alpha-min");
  }
  const bool want_ideal = opt.model != ModelKind::finite;
  const bool want_finite = opt.model != ModelKind::ideal;
  const auto n = static_cast<std::size_t>(opt.steps);
  std::vector<double> alphas(n);
  std::vector<ProbTable> ideal(n), finite(n);
  detail::parallel_for(n, [&](std::size_t k) {
    alphas[k] = opt.alpha_min +
                (opt.alpha_max - opt.alpha_min) * static_cast<double>(k) / (opt.steps - 1);
    const ModulationSetting sa(opt.a, alphas[k]);
    const ModulationSetting sb(opt.b, opt.beta);
    if (want_ideal) ideal[k] = ctx.model_table(sa, sb, ModelKind::ideal);
    if (want_finite) finite[k] = ctx.model_table(sa, sb, ModelKind::finite);
  });

  double gap = 0.0;
  if (want_ideal && want_finite) {
    for (std::size_t k = 0; k < n; ++k) {
      for (Outcome o : kOutcomes) {
        gap = std::max(gap, std::abs(ideal[k][o] - finite[k][o]));
      }
    }
  }

  const std::vector<std::string> names = {"p_ee", "p_eo", "p_oe", "p_oo"};
  std::vector<std::pair<std::string, const std::vector<ProbTable>*>> groups;
  if (want_ideal) groups.emplace_back(want_finite ? "ideal_" : "", &ideal);
  if (want_finite) groups.emplace_back(want_ideal ? "finite_" : "", &finite);

  Json params{{"a", opt.a},
              {"b", opt.b},
              {"beta", opt.beta},
              {"alpha_min", opt.alpha_min},
              {"alpha_max", opt.alpha_max},
              {"steps", opt.steps},
              {"model", opt.model == ModelKind::ideal    ? "ideal"
                        : opt.model == ModelKind::finite ? "finite"
                                                         : "both"}};

  if (ctx.format == "json") {
    Json doc = ctx.json_envelope("pattern");
    doc["parameters"] = params;
    doc["alpha"] = alphas;
    for (const auto& [prefix, tables] : groups) {
      for (Outcome o : kOutcomes) {
        std::vector<double> column;
        for (const ProbTable& t : *tables) column.push_back(t[o]);
        doc[prefix + names[static_cast<std::size_t>(o)]] = column;
      }
    }
    if (want_ideal && want_finite) doc["max_model_gap"] = gap;
    ctx.write(doc.dump(2) + "\n");
  } else {
    std::ostringstream csv;
    csv << ctx.comment_header("pattern");
    csv << "alpha";
    for (const auto& [prefix, tables] : groups) {
      for (const auto& name : names) csv << ',' << prefix << name;
    }
    csv << '\n';
    for (std::size_t k = 0; k < n; ++k) {
      csv << fmt(alphas[k]);
      for (const auto& [prefix, tables] : groups) {
        for (Outcome o : kOutcomes) csv << ',' << fmt((*tables)[k][o]);
      }
      csv << '\n';
    }
    ctx.write(csv.str());
  }

  std::string record_path = opt.record_path;
  if (record_path.empty() && !ctx.out_path.empty()) {
    record_path = ctx.out_path + ".run.json";
  }
  if (!record_path.empty()) {
    Json record = ctx.json_envelope("pattern");
    record["parameters"] = params;
    record["output"] = ctx.out_path;
    if (want_ideal && want_finite) record["max_model_gap"] = gap;
    Context::write_file(record_path, record.dump(2) + "\n");
  }
}

// chsh --------------------------------------------------------------------

std::array<ProbTable, 4> quad_tables(const Context& ctx, const SettingQuad& quad,
                                     ModelKind kind) {
  std::array<ProbTable, 4> tables;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto [i, j] = kSettingPairs[k];
    tables[k] = ctx.model_table(quad.alice(i), quad.bob(j), kind);
  }
  return tables;
}

std::array<CountRecord, 4> simulate_quad(const Context& ctx,
                                         const std::array<ProbTable, 4>& tables) {
  std::array<CountRecord, 4> records;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto [i, j] = kSettingPairs[k];
    records[k] = simulate_counts(tables[k], ctx.config.measurement,
                                 derive_seed(ctx.config.seed, k),
                                 {"A" + std::to_string(i), "B" + std::to_string(j)});
  }
  return records;
}

void run_chsh_eval(const Context& ctx, const QuadOptions& q, ModelKind kind) {
  const SettingQuad quad = q.quad();
  const ChshReport theory = chsh_ideal(quad);
  const auto records = simulate_quad(ctx, quad_tables(ctx, quad, kind));
  const ChshEstimate sim = chsh_estimate(records);

  if (ctx.format == "json") {
    Json doc = ctx.json_envelope("chsh eval");
    doc["settings"] = quad_to_json(quad);
    Json rows = Json::array();
    for (std::size_t k = 0; k < 4; ++k) {
      rows.push_back({{"pair", pair_label(k)},
                      {"theory", theory.correlators[k]},
                      {"drive", theory.drives[k].d},
                      {"simulated", sim.c_table[k]},
                      {"sigma", sim.sigma_c[k]}});
    }
    doc["correlators"] = rows;
    doc["s_theory"] = theory.s_value;
    doc["s_simulated"] = sim.s;
    doc["sigma_s"] = sim.sigma_s;
    Json recs = Json::array();
    for (const auto& r : records) recs.push_back(record_to_json(r));
    doc["records"] = recs;
    ctx.write(doc.dump(2) + "\n");
    return;
  }
  std::ostringstream os;
  os << ctx.comment_header("chsh eval");
  if (ctx.format == "csv") {
    os << "pair,theory,simulated,sigma\n";
    for (std::size_t k = 0; k < 4; ++k) {
      os << '"' << pair_label(k) << "\"," << fmt(theory.correlators[k]) << ','
         << fmt(sim.c_table[k]) << ',' << fmt(sim.sigma_c[k]) << '\n';
    }
    os << "S," << fmt(theory.s_value) << ',' << fmt(sim.s) << ',' << fmt(sim.sigma_s)
       << '\n';
  } else {
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %10s %22s\n", "settings", "theory",
                  "simulated experiment");
    os << line;
    for (std::size_t k = 0; k < 4; ++k) {
      std::snprintf(line, sizeof line, "%-10s %10.4f %12.4f +- %6.4f\n",
                    pair_label(k).c_str(), theory.correlators[k], sim.c_table[k],
                    sim.sigma_c[k]);
      os << line;
    }
    std::snprintf(line, sizeof line, "%-10s %10.4f %12.4f +- %6.4f\n", "S",
                  theory.s_value, sim.s, sim.sigma_s);
    os << line;
  }
  ctx.write(os.str());
}

struct OptimizeOptions {
  double lo = 0.0;
  double hi = 0.5;
  double tolerance = 1e-6;
  int restarts = 20;
  double amplitude_bound = 1.5;
};

void run_chsh_optimize(const Context& ctx, const QuadOptions& q,
                       const OptimizeOptions& opt) {
  const SymmetricOptimum sym = optimize_symmetric(opt.lo, opt.hi, opt.tolerance);
  const GeneralOptimum gen =
      optimize_general(q.quad(), opt.amplitude_bound, opt.restarts, ctx.config.seed);
  const auto& d = gen.report.drives;
  const double ratio = d[0].d > 0.0 ? d[3].d / d[0].d : 0.0;

  if (ctx.format == "json") {
    Json doc = ctx.json_envelope("chsh optimize");
    doc["symmetric"] = {{"c_star", sym.c_star}, {"s_star", sym.s_star}};
    doc["general"] = {{"settings", quad_to_json(gen.quad)},
                      {"s", gen.report.s_value},
                      {"drives", {d[0].d, d[1].d, d[2].d, d[3].d}},
                      {"d11_over_d00", ratio},
                      {"restarts", opt.restarts}};
    ctx.write(doc.dump(2) + "\n");
    return;
  }
  std::ostringstream os;
  os << ctx.comment_header("chsh optimize");
  if (ctx.format == "csv") {
    os << "quantity,value\n";
    os << "c_star," << fmt(sym.c_star) << "\ns_star," << fmt(sym.s_star) << '\n';
    os << "general_s," << fmt(gen.report.s_value) << '\n';
    os << "a0," << fmt(gen.quad.a0.amplitude()) << "\nalpha0," << fmt(gen.quad.a0.phase())
       << "\na1," << fmt(gen.quad.a1.amplitude()) << "\nalpha1," << fmt(gen.quad.a1.phase())
       << "\nb0," << fmt(gen.quad.b0.amplitude()) << "\nbeta0," << fmt(gen.quad.b0.phase())
       << "\nb1," << fmt(gen.quad.b1.amplitude()) << "\nbeta1," << fmt(gen.quad.b1.phase())
       << '\n';
    os << "d11_over_d00," << fmt(ratio) << '\n';
  } else {
    os << "symmetric family: c* = " << fmt(sym.c_star) << ", S(c*) = " << fmt(sym.s_star)
       << '\n';
    os << "general search (" << opt.restarts << " restarts): S = "
       << fmt(gen.report.s_value) << '\n';
    auto line = [&](const char* name, const ModulationSetting& s) {
      os << "  " << name << " = (" << fmt(s.amplitude()) << ", " << fmt(s.phase()) << ")\n";
    };
    line("A0", gen.quad.a0);
    line("A1", gen.quad.a1);
    line("B0", gen.quad.b0);
    line("B1", gen.quad.b1);
    os << "  D00 D01 D10 D11 = " << fmt(d[0].d) << ' ' << fmt(d[1].d) << ' '
       << fmt(d[2].d) << ' ' << fmt(d[3].d) << "  (D11/D00 = " << fmt(ratio) << ")\n";
  }
  ctx.write(os.str());
}

void run_chsh_finite(const Context& ctx, const QuadOptions& q) {
  const SettingQuad quad = q.quad();
  const ChshReport fin = chsh_finite(quad, ctx.config.bins, ctx.config.measurement,
                                     ctx.config.dispersion, ctx.config.truncation);
  const ChshReport ideal = chsh_ideal(quad);
  if (ctx.format == "json") {
    Json doc = ctx.json_envelope("chsh finite");
    doc["settings"] = quad_to_json(quad);
    doc["finite_correlators"] = fin.correlators;
    doc["ideal_correlators"] = ideal.correlators;
    doc["s_finite"] = fin.s_value;
    doc["s_ideal"] = ideal.s_value;
    ctx.write(doc.dump(2) + "\n");
    return;
  }
  std::ostringstream os;
  os << ctx.comment_header("chsh finite");
  os << "pair,finite,ideal\n";
  for (std::size_t k = 0; k < 4; ++k) {
    os << '"' << pair_label(k) << "\"," << fmt(fin.correlators[k]) << ','
       << fmt(ideal.correlators[k]) << '\n';
  }
  os << "S," << fmt(fin.s_value) << ',' << fmt(ideal.s_value) << '\n';
  ctx.write(os.str());
}

struct MonteCarloOptions {
  int ensemble = 500;
  double target_visibility = 0.0;  // 0: use the configured crosstalk
  int scan_steps = 25;
  ModelKind model = ModelKind::ideal;
};

void run_chsh_montecarlo(Context ctx, const QuadOptions& q,
                         const MonteCarloOptions& opt) {
  if (opt.ensemble < 2) {
    throw UsageError("montecarlo: --ensemble must be >= 2");
  }
  const SettingQuad quad = q.quad();
  double chi = ctx.config.measurement.crosstalk;
  if (opt.target_visibility > 0.0) {
    if (opt.scan_steps < 5) {
      throw UsageError("montecarlo: --scan-steps must be >= 5");
    }
    // Visibility scan: a = b = the larger Alice amplitude, alpha swept, beta = 0.
    Context clean = ctx;
    clean.config.measurement.crosstalk = 0.0;
    std::vector<ProbTable> scan(static_cast<std::size_t>(opt.scan_steps));
    for (int k = 0; k < opt.scan_steps; ++k) {
      const double alpha = 2.0 * kPi * k / (opt.scan_steps - 1);
      scan[static_cast<std::size_t>(k)] =
          clean.model_table({quad.a1.amplitude(), alpha}, {quad.a1.amplitude(), 0.0},
                            opt.model);
    }
    chi = calibrate_crosstalk(scan, Outcome::EO, opt.target_visibility);
    ctx.config.measurement.crosstalk = chi;
  }
  const auto tables = quad_tables(ctx, quad, opt.model);
  const EnsembleSummary summary =
      chsh_ensemble(tables, ctx.config.measurement,
                    static_cast<std::size_t>(opt.ensemble), ctx.config.seed);

  if (ctx.format == "json") {
    Json doc = ctx.json_envelope("chsh montecarlo");
    doc["settings"] = quad_to_json(quad);
    doc["crosstalk"] = chi;
    doc["ensemble"] = opt.ensemble;
    doc["mean_s"] = summary.mean_s;
    doc["std_s"] = summary.std_s;
    doc["mean_sigma_s"] = summary.mean_sigma_s;
    ctx.write(doc.dump(2) + "\n");
    return;
  }
  std::ostringstream os;
  os << ctx.comment_header("chsh montecarlo");
  if (ctx.format == "csv") {
    os << "crosstalk,ensemble,mean_s,std_s,mean_sigma_s\n"
       << fmt(chi) << ',' << opt.ensemble << ',' << fmt(summary.mean_s) << ','
       << fmt(summary.std_s) << ',' << fmt(summary.mean_sigma_s) << '\n';
  } else {
    os << "crosstalk chi = " << fmt(chi) << '\n'
       << "S = " << fmt(summary.mean_s) << " +- " << fmt(summary.std_s) << " over "
       << opt.ensemble << " runs (mean reported sigma " << fmt(summary.mean_sigma_s)
       << ")\n";
  }
  ctx.write(os.str());
}

// simulate / analyze ------------------------------------------------------

struct SimulateOptions {
  ModelKind model = ModelKind::ideal;
  std::string histogram_dir;
  HistogramLayout layout;
};

void run_simulate(const Context& ctx, const QuadOptions& q, const SimulateOptions& opt) {
  const auto tables = quad_tables(ctx, q.quad(), opt.model);
  const auto records = simulate_quad(ctx, tables);
  Json doc = ctx.json_envelope("simulate");
  doc["settings"] = quad_to_json(q.quad());
  Json recs = Json::array();
  for (const auto& r : records) recs.push_back(record_to_json(r));
  doc["records"] = recs;

  if (!opt.histogram_dir.empty()) {
    std::filesystem::create_directories(opt.histogram_dir);
    Json files = Json::array();
    for (std::size_t k = 0; k < 4; ++k) {
      const auto [i, j] = kSettingPairs[k];
      const Histogram h = synthesize_histogram(
          tables[k], ctx.config.measurement, opt.layout,
          derive_seed(ctx.config.seed, 100 + k));
      const std::string path = (std::filesystem::path(opt.histogram_dir) /
                                ("hist_" + std::to_string(i) + std::to_string(j) + ".csv"))
                                   .string();
      std::ostringstream csv;
      emit_histogram(h, csv);
      Context::write_file(path, csv.str());
      files.push_back(path);
    }
    doc["histograms"] = files;
    const double w = opt.layout.bin_width;
    doc["peak_window_s"] = {opt.layout.peak_first_bin * w,
                            (opt.layout.peak_first_bin + opt.layout.peak_bin_count - 1) * w};
  }
  ctx.write(doc.dump(2) + "\n");
}

Histogram read_histogram_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw DataError("cannot open '" + path + "'");
  }
  try {
    return ingest_histogram(f);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

struct AnalyzeOptions {
  std::vector<std::string> histograms;
  std::vector<std::string> scan;
  std::string records_path;
  std::string peak;
  std::string background;
  std::string outcome = "EO";
  bool no_subtract = false;
};

void run_analyze(const Context& ctx, const AnalyzeOptions& opt) {
  const int modes = !opt.histograms.empty() + !opt.scan.empty() + !opt.records_path.empty();
  if (modes != 1) {
    throw UsageError("analyze: give exactly one of --hist, --scan, --records");
  }

  std::vector<CountRecord> records;
  if (!opt.records_path.empty()) {
    std::ifstream f(opt.records_path, std::ios::binary);
    if (!f) throw DataError("cannot open '" + opt.records_path + "'");
    Json doc;
    try {
      doc = Json::parse(f);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(opt.records_path + ": " + e.what());
    }
    const Json& list = doc.is_object() && doc.contains("records") ? doc["records"] : doc;
    if (!list.is_array()) throw DataError(opt.records_path + ": expected a records array");
    for (const auto& item : list) records.push_back(record_from_json(item));
  } else {
    if (opt.peak.empty() || opt.background.empty()) {
      throw UsageError("analyze: --peak and --background are required with histograms");
    }
    const TimeWindow peak = parse_window(opt.peak, "peak");
    const TimeWindow bg = parse_window(opt.background, "background");
    const auto& files = opt.histograms.empty() ? opt.scan : opt.histograms;
    for (std::size_t k = 0; k < files.size(); ++k) {
      std::pair<std::string, std::string> labels;
      if (!opt.histograms.empty() && files.size() == 4) {
        const auto [i, j] = kSettingPairs[k];
        labels = {"A" + std::to_string(i), "B" + std::to_string(j)};
      } else {
        labels = {"scan" + std::to_string(k), ""};
      }
      records.push_back(extract_counts(read_histogram_file(files[k]), peak, bg, labels));
    }
  }

  Json doc = ctx.json_envelope("analyze");
  std::ostringstream os;
  os << ctx.comment_header("analyze");
  if (!opt.scan.empty()) {
    Outcome outcome{};
    try {
      outcome = parse_outcome(opt.outcome);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (outcome != Outcome::EO && outcome != Outcome::OE) {
      throw UsageError("analyze: visibility outcome must be EO or OE");
    }
    const VisibilityResult v = visibility(records, outcome);
    doc["visibility"] = {{"outcome", opt.outcome},
                         {"v", v.v},
                         {"sigma_v", v.sigma_v},
                         {"clamped_points", v.clamped_points}};
    os << "visibility,sigma_v,clamped_points\n"
       << fmt(v.v) << ',' << fmt(v.sigma_v) << ',' << v.clamped_points << '\n';
  } else {
    if (records.size() != 4) {
      throw UsageError("analyze: CHSH needs exactly 4 setting pairs (00, 01, 10, 11)");
    }
    const std::span<const CountRecord, 4> four(records.data(), 4);
    const ChshEstimate est = chsh_estimate(four, !opt.no_subtract);
    doc["c_table"] = est.c_table;
    doc["sigma_c"] = est.sigma_c;
    doc["s"] = est.s;
    doc["sigma_s"] = est.sigma_s;
    Json recs = Json::array();
    for (const auto& r : records) recs.push_back(record_to_json(r));
    doc["records"] = recs;
    os << "pair,c,sigma\n";
    for (std::size_t k = 0; k < 4; ++k) {
      os << '"' << pair_label(k) << "\"," << fmt(est.c_table[k]) << ','
         << fmt(est.sigma_c[k]) << '\n';
    }
    os << "S," << fmt(est.s) << ',' << fmt(est.sigma_s) << '\n';
  }
  ctx.write(ctx.format == "json" ? doc.dump(2) + "\n" : os.str());
}

const std::map<std::string, ModelKind> kModelNames = {
    {"ideal", ModelKind::ideal}, {"finite", ModelKind::finite}, {"both", ModelKind::both}};

const std::map<std::string, ModelKind> kSingleModelNames = {
    {"ideal", ModelKind::ideal}, {"finite", ModelKind::finite}};

void add_quad_options(CLI::App* app, QuadOptions& q) {
  app->add_option("--a0", q.a0, "Alice setting 0 amplitude")->capture_default_str();
  app->add_option("--a1", q.a1, "Alice setting 1 amplitude")->capture_default_str();
  app->add_option("--b0", q.b0, "Bob setting 0 amplitude")->capture_default_str();
  app->add_option("--b1", q.b1, "Bob setting 1 amplitude")->capture_default_str();
  app->add_option("--alpha0", q.alpha0, "Alice setting 0 phase (rad)")->capture_default_str();
  app->add_option("--alpha1", q.alpha1, "Alice setting 1 phase (rad)")->capture_default_str();
  app->add_option("--beta0", q.beta0, "Bob setting 0 phase (rad)")->capture_default_str();
  app->add_option("--beta1", q.beta1, "Bob setting 1 phase (rad)")->capture_default_str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frequency-bin entanglement simulator and coincidence analysis", "freqbin"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "Key = value configuration file; flags override it");
  app.allow_config_extras(false);
  app.set_version_flag("--version", version());

  Context ctx;
  ctx.stdout_stream = &out;
  std::string bins_text = format_bins(ctx.config.bins);
  std::string overrides_text;
  RunConfig& cfg = ctx.config;

  app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  app.add_option("--out", ctx.out_path, "Output file (default: stdout)");
  app.add_option("--format", ctx.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--rf-frequency", cfg.rf_frequency, "RF frequency / bin spacing (Hz)")
      ->capture_default_str();
  app.add_option("--center-frequency", cfg.center_frequency, "Degenerate frequency (Hz)")
      ->capture_default_str();
  app.add_option("--bins", bins_text, "Alice bins: lo..hi or a,b,c")->capture_default_str();
  app.add_option("--epsilon", cfg.truncation.epsilon, "Bessel tail tolerance")
      ->capture_default_str();
  app.add_option("--max-order", cfg.truncation.max_order, "Bessel order cap")
      ->capture_default_str();
  app.add_option("--crosstalk", cfg.measurement.crosstalk, "Parity-flip probability")
      ->capture_default_str();
  app.add_option("--efficiency", cfg.measurement.efficiency, "Detection efficiency")
      ->capture_default_str();
  app.add_option("--pair-rate", cfg.measurement.pair_rate, "True coincidence rate (Hz)")
      ->capture_default_str();
  app.add_option("--accidental-rate", cfg.measurement.accidental_rate,
                 "Accidental coincidence rate over all outcomes (Hz)")
      ->capture_default_str();
  app.add_option("--duration", cfg.measurement.duration, "Acquisition time per setting (s)")
      ->capture_default_str();
  app.add_option("--dispersion-quadratic", cfg.dispersion.quadratic_coefficient,
                 "Dispersion phase per bin index squared (rad)")
      ->capture_default_str();
  app.add_option("--dispersion-overrides", overrides_text,
                 "Per-bin dispersion phases bin:phase,... (Alice bins)");

  // pattern
  PatternOptions pattern;
  std::string pattern_model = "ideal";
  auto* pattern_cmd = app.add_subcommand("pattern", "Two-photon interference pattern");
  pattern_cmd->fallthrough();
  pattern_cmd->add_option("--a", pattern.a, "Alice amplitude")->capture_default_str();
  pattern_cmd->add_option("--b", pattern.b, "Bob amplitude")->capture_default_str();
  pattern_cmd->add_option("--beta", pattern.beta, "Bob phase (rad)")->capture_default_str();
  pattern_cmd->add_option("--alpha-min", pattern.alpha_min)->capture_default_str();
  pattern_cmd->add_option("--alpha-max", pattern.alpha_max)->capture_default_str();
  pattern_cmd->add_option("--steps", pattern.steps)->capture_default_str();
  pattern_cmd->add_option("--model", pattern_model)
      ->check(CLI::IsMember({"ideal", "finite", "both"}))
      ->capture_default_str();
  pattern_cmd->add_option("--record", pattern.record_path,
                          "Run-record JSON path (default: <out>.run.json)");

  // chsh
  QuadOptions quad;
  auto* chsh_cmd = app.add_subcommand("chsh", "CHSH evaluation, optimization, simulation");
  chsh_cmd->fallthrough();
  chsh_cmd->require_subcommand(1);
  add_quad_options(chsh_cmd, quad);
  std::string chsh_model = "ideal";
  chsh_cmd->add_option("--model", chsh_model, "Generating model for simulated counts")
      ->check(CLI::IsMember({"ideal", "finite"}))
      ->capture_default_str();

  auto* eval_cmd = chsh_cmd->add_subcommand("eval", "Theory vs simulated experiment table");
  eval_cmd->fallthrough();

  OptimizeOptions optimize;
  auto* optimize_cmd = chsh_cmd->add_subcommand("optimize", "Maximize S");
  optimize_cmd->fallthrough();
  optimize_cmd->add_option("--lo", optimize.lo)->capture_default_str();
  optimize_cmd->add_option("--hi", optimize.hi)->capture_default_str();
  optimize_cmd->add_option("--tolerance", optimize.tolerance)->capture_default_str();
  optimize_cmd->add_option("--restarts", optimize.restarts)->capture_default_str();
  optimize_cmd->add_option("--amplitude-bound", optimize.amplitude_bound)
      ->capture_default_str();

  auto* finite_cmd = chsh_cmd->add_subcommand("finite", "CHSH in the finite-bin model");
  finite_cmd->fallthrough();

  MonteCarloOptions mc;
  auto* mc_cmd = chsh_cmd->add_subcommand("montecarlo", "Seeded CHSH estimator ensembles");
  mc_cmd->fallthrough();
  mc_cmd->add_option("--ensemble", mc.ensemble)->capture_default_str();
  mc_cmd->add_option("--target-visibility", mc.target_visibility,
                     "Calibrate crosstalk to this EO scan visibility (0: keep --crosstalk)")
      ->capture_default_str();
  mc_cmd->add_option("--scan-steps", mc.scan_steps)->capture_default_str();

  // simulate
  SimulateOptions simulate;
  std::string simulate_model = "ideal";
  auto* simulate_cmd = app.add_subcommand("simulate", "Synthetic counts and histograms");
  simulate_cmd->fallthrough();
  add_quad_options(simulate_cmd, quad);
  simulate_cmd->add_option("--model", simulate_model)
      ->check(CLI::IsMember({"ideal", "finite"}))
      ->capture_default_str();
  simulate_cmd->add_option("--histograms", simulate.histogram_dir,
                           "Directory for hist_<ij>.csv files");
  simulate_cmd->add_option("--bin-width", simulate.layout.bin_width)->capture_default_str();

  // analyze
  AnalyzeOptions analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Estimate CHSH or visibility from data");
  analyze_cmd->fallthrough();
  analyze_cmd->add_option("--hist", analyze.histograms,
                          "Histogram CSVs for setting pairs 00 01 10 11");
  analyze_cmd->add_option("--scan", analyze.scan, "Histogram CSVs of a phase scan");
  analyze_cmd->add_option("--records", analyze.records_path, "CountRecord JSON file");
  analyze_cmd->add_option("--peak", analyze.peak, "Peak window start,stop (s)");
  analyze_cmd->add_option("--background", analyze.background,
                          "Background window start,stop (s)");
  analyze_cmd->add_option("--outcome", analyze.outcome, "Visibility outcome EO or OE")
      ->capture_default_str();
  analyze_cmd->add_flag("--no-subtract", analyze.no_subtract,
                        "Use raw counts in the CHSH estimator");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    try {
      cfg.bins = parse_bins(bins_text);
      cfg.dispersion.per_bin_overrides = parse_overrides(overrides_text);
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }

    if (pattern_cmd->parsed()) {
      pattern.model = kModelNames.at(pattern_model);
      run_pattern(ctx, pattern);
    } else if (simulate_cmd->parsed()) {
      simulate.model = kSingleModelNames.at(simulate_model);
      run_simulate(ctx, quad, simulate);
    } else if (analyze_cmd->parsed()) {
      run_analyze(ctx, analyze);
    } else if (chsh_cmd->parsed()) {
      const ModelKind kind = kSingleModelNames.at(chsh_model);
      if (eval_cmd->parsed()) {
        run_chsh_eval(ctx, quad, kind);
      } else if (optimize_cmd->parsed()) {
        run_chsh_optimize(ctx, quad, optimize);
      } else if (finite_cmd->parsed()) {
        run_chsh_finite(ctx, quad);
      } else {
        mc.model = kind;
        run_chsh_montecarlo(ctx, quad, mc);
      }
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace freqbin
