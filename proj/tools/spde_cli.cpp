// Command-line front end: one JSON config in, one CSV or JSON table out.
//
// Exit codes: 0 success, 2 invalid input, 3 numerical failure,
// 4 acceptance failure (verify).

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spde/spde.hpp"

namespace {

using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitAcceptance = 4;
constexpr int kSchemaVersion = 1;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------------ tables

using Cell = std::variant<double, std::int64_t, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("row width differs from header");
    rows.push_back(std::move(row));
  }
};

std::string csv_field(const Cell& c) {
  std::ostringstream os;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          os << std::setprecision(17) << v;
        } else if constexpr (std::is_same_v<T, bool>) {
          os << (v ? "true" : "false");
        } else if constexpr (std::is_same_v<T, std::string>) {
          const bool quote = v.find_first_of(",\"\n") != std::string::npos;
          if (!quote) {
            os << v;
          } else {
            os << '"';
            for (char ch : v) os << (ch == '"' ? "\"\"" : std::string(1, ch));
            os << '"';
          }
        } else {
          os << v;
        }
      },
      c);
  return os.str();
}

void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i]);
    os << '\n';
  }
}

json cell_json(const Cell& c) {
  return std::visit([](const auto& v) { return json(v); }, c);
}

void write_json(std::ostream& os, const Table& t, const json& meta) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = cell_json(row[i]);
    rows.push_back(std::move(obj));
  }
  os << json{{"meta", meta}, {"rows", rows}}.dump(2) << '\n';
}

// ------------------------------------------------------------------ config

struct NoiseInput {
  std::string kind;  // riesz | white1d | white_limit
  std::optional<spde::NoiseSpec> spec;
  spde::NoiseSummary summary;
};

struct RunConfig {
  std::string command;
  json raw;
  std::optional<spde::EquationParams> params;
  std::optional<NoiseInput> noise;
  spde::McConfig mc;
  std::string out_path;
  std::string format = "csv";
};

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

spde::EquationParams parse_params(const json& j) {
  const bool wave = get_or(j, "formal_wave", false);
  return spde::EquationParams(j.at("a").get<double>(), j.at("b").get<double>(), get_or(j, "r", 0.0),
                              get_or(j, "nu", 1.0), get_or(j, "theta", 1.0), j.at("d").get<int>(),
                              wave ? spde::WaveLimit::Formal : spde::WaveLimit::Off);
}

NoiseInput parse_noise(const json& j, int d) {
  NoiseInput in;
  in.kind = j.at("kind").get<std::string>();
  if (in.kind == "riesz") {
    std::vector<spde::RieszBlock> blocks;
    for (const auto& b : j.at("blocks")) blocks.push_back({b.at("dim").get<int>(), b.at("alpha").get<double>()});
    in.spec = spde::NoiseSpec::riesz(std::move(blocks));
    in.summary = spde::NoiseSummary::of(*in.spec);
  } else if (in.kind == "white1d") {
    in.spec = spde::NoiseSpec::white_1d();
    in.summary = spde::NoiseSummary::of(*in.spec);
  } else if (in.kind == "white_limit") {
    in.summary = spde::NoiseSummary::white_limit(d);
    if (d == 1) in.spec = spde::NoiseSpec::white_1d();
  } else {
    throw InputError("unknown noise kind '" + in.kind + "' (riesz, white1d, white_limit)");
  }
  return in;
}

std::optional<std::uint64_t> seed_from_env() {
  const char* s = std::getenv("SPDE_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != std::string(s).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw InputError(std::string("SPDE_SEED is not an unsigned integer: ") + s);
  }
}

const spde::NoiseSpec& require_spec(const RunConfig& cfg) {
  if (!cfg.noise) throw InputError("config needs a noise block");
  if (!cfg.noise->spec) throw InputError("the white_limit noise in d >= 2 is only usable by classify and sweep");
  return *cfg.noise->spec;
}

const spde::EquationParams& require_params(const RunConfig& cfg) {
  if (!cfg.params) throw InputError("config needs a params block");
  return *cfg.params;
}

const NoiseInput& require_noise(const RunConfig& cfg) {
  if (!cfg.noise) throw InputError("config needs a noise block");
  return *cfg.noise;
}

// --------------------------------------------------------------- commands

std::vector<Cell> param_cells(const spde::EquationParams& p) {
  return {p.a(), p.b(), p.r(), p.nu(), p.theta(), std::int64_t{p.d()}};
}

std::vector<std::string> with_params(std::vector<std::string> tail) {
  std::vector<std::string> cols{"a", "b", "r", "nu", "theta", "d"};
  cols.insert(cols.end(), tail.begin(), tail.end());
  return cols;
}

std::vector<Cell> concat(std::vector<Cell> head, std::vector<Cell> tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

std::vector<Cell> classify_row(const spde::EquationParams& p, const spde::NoiseSummary& n,
                               const spde::McConfig& mc) {
  const auto v = spde::classify_solvability(p, n);
  return concat(param_cells(p),
                {n.alpha, std::string(spde::to_string(n.cls)), std::int64_t{v.nonnegativity.group},
                 std::string(spde::to_string(v.regime)), v.critical_alpha, v.figure_level,
                 static_cast<std::int64_t>(mc.seed), std::int64_t{0}});
}

const std::vector<std::string> kClassifyCols = with_params(
    {"alpha", "kind", "nonneg_group", "regime", "critical_alpha", "figure_level", "seed", "samples"});

Table cmd_classify(const RunConfig& cfg) {
  Table t{kClassifyCols, {}};
  t.add(classify_row(require_params(cfg), require_noise(cfg).summary, cfg.mc));
  return t;
}

// Cartesian grid over any of a, b, r, d, alpha given as lists in "sweep";
// the rest come from params.  alpha == d is the white-noise point.
Table cmd_sweep(const RunConfig& cfg) {
  const auto& base = require_params(cfg);
  const json grid = cfg.raw.value("sweep", json::object());
  auto list = [&](const char* key, double fallback) {
    if (!grid.contains(key)) return std::vector<double>{fallback};
    return grid.at(key).get<std::vector<double>>();
  };
  const auto as = list("a", base.a()), bs = list("b", base.b()), rs = list("r", base.r());
  const auto ds = list("d", base.d());
  if (!grid.contains("alpha")) throw InputError("sweep needs an alpha list");
  const auto alphas = grid.at("alpha").get<std::vector<double>>();
  std::vector<spde::SweepPoint> points;
  for (double a : as)
    for (double b : bs)
      for (double r : rs)
        for (double d : ds)
          for (double alpha : alphas) {
            const int di = static_cast<int>(d);
            if (di != d) throw InputError("sweep d values must be integers");
            const spde::EquationParams p(a, b, r, base.nu(), base.theta(), di, base.wave());
            const auto noise = alpha == d ? spde::NoiseSummary::white_limit(di)
                                          : spde::NoiseSummary{spde::NoiseClass::Riesz, alpha, di};
            points.push_back({p, noise});
          }
  Table t{kClassifyCols, {}};
  for (const auto& row : spde::sweep_phase_diagram(points)) t.add(classify_row(row.params, row.noise, cfg.mc));
  return t;
}

Table cmd_kernel(const RunConfig& cfg) {
  const auto& p = require_params(cfg);
  const json k = cfg.raw.value("kernel", json::object());
  const auto ts = get_or(k, "t", std::vector<double>{0.5, 1.0, 2.0});
  const auto rhos = get_or(k, "rho", std::vector<double>{0.0, 0.5, 1.0, 2.0});
  Table t{with_params({"t", "rho", "fourier_green", "integrated", "resolvent", "seed", "samples"}), {}};
  for (double time : ts)
    for (double rho : rhos) {
      t.add(concat(param_cells(p), {time, rho, spde::fourier_green(p, time, rho),
                                    spde::integrated_fourier_green(p, time, rho), spde::resolvent(p, rho),
                                    static_cast<std::int64_t>(cfg.mc.seed), std::int64_t{0}}));
    }
  return t;
}

Table cmd_chaos(const RunConfig& cfg) {
  const auto& p = require_params(cfg);
  const auto& spec = require_spec(cfg);
  const json c = cfg.raw.value("chaos", json::object());
  const int n_terms = get_or(c, "n_terms", 4);
  Table t{{"sequence", "n", "estimate", "std_err", "samples", "seed"}, {}};
  for (const auto& e : spde::chaos_norms(p, spec, n_terms, cfg.mc)) {
    t.add({std::string("fn_norm_sq"), std::int64_t{e.n}, e.norm_sq_at_1.value, e.norm_sq_at_1.std_err,
           static_cast<std::int64_t>(e.norm_sq_at_1.samples), static_cast<std::int64_t>(e.norm_sq_at_1.seed)});
  }
  for (int n = 1; n <= n_terms; ++n) {
    const auto e = spde::t_n(p, spec, n, cfg.mc);
    t.add({std::string("t_n"), std::int64_t{n}, e.value, e.std_err, static_cast<std::int64_t>(e.samples),
           static_cast<std::int64_t>(e.seed)});
  }
  return t;
}

Table cmd_variational(const RunConfig& cfg) {
  const auto& p = require_params(cfg);
  const auto& noise = require_noise(cfg);
  const json v = cfg.raw.value("variational", json::object());
  spde::TrialFamily fam;
  const auto family = get_or(v, "family", std::string("generalized_gaussian"));
  if (family == "radial_spline") {
    fam.kind = spde::TrialFamilyKind::RadialSpline;
  } else if (family != "generalized_gaussian") {
    throw InputError("unknown trial family '" + family + "'");
  }
  std::optional<spde::NoiseSpec> spec;
  if (noise.kind == "riesz") spec = noise.spec;
  const auto res = spde::estimate_M_direct(p.a(), p.d(), spec, fam, {});
  Table t{{"kind", "a", "d", "alpha", "value", "evaluations", "stalled", "seed", "samples"}, {}};
  const auto alpha = res.value.alpha;
  auto row = [&](std::string_view kind, double value) {
    t.add({std::string(kind), p.a(), std::int64_t{p.d()}, alpha, value, std::int64_t{res.evaluations},
           res.stalled, static_cast<std::int64_t>(cfg.mc.seed), std::int64_t{0}});
  };
  row("M", res.value.value);
  for (auto kind : {spde::VariationalKind::Sigma, spde::VariationalKind::E, spde::VariationalKind::BoldM}) {
    try {
      row(spde::to_string(kind), spde::variational_convert(res.value, kind).value);
    } catch (const spde::Error& e) {
      if (e.kind() != spde::ErrorKind::ExponentDomain) throw;  // E needs alpha < a
    }
  }
  row("Rho", spde::rho_from_m(p.a(), alpha, res.value.value, p.nu()));
  return t;
}

spde::AsymptoticMode parse_mode(const std::string& s) {
  if (s == "general") return spde::AsymptoticMode::General;
  if (s == "fixed_p") return spde::AsymptoticMode::FixedP;
  if (s == "fixed_t") return spde::AsymptoticMode::FixedT;
  throw InputError("unknown asymptotic mode '" + s + "' (general, fixed_p, fixed_t)");
}

double variational_constant(const RunConfig& cfg, const json& section) {
  if (section.contains("M")) return section.at("M").get<double>();
  const auto& p = require_params(cfg);
  const auto& noise = require_noise(cfg);
  const auto known = spde::lookup_known_constant(p.a(), p.d(), noise.kind != "riesz");
  if (known.status != spde::KnownConstant::Status::Value) {
    throw InputError("no tabulated variational constant for these parameters; give \"M\"");
  }
  return known.value;
}

Table cmd_asymptotics(const RunConfig& cfg) {
  const auto& p = require_params(cfg);
  const auto& noise = require_noise(cfg);
  const json a = cfg.raw.value("asymptotics", json::object());
  const double m = variational_constant(cfg, a);
  const auto mode = parse_mode(get_or(a, "mode", std::string("fixed_p")));
  const double pp = get_or(a, "p", 2.0), time = get_or(a, "t", 1.0);
  const auto rep = spde::asymptotics_report(p, noise.summary.alpha, m, mode, pp, time);
  std::string residuals;
  for (const auto& [name, r] : rep.oracle_residuals) {
    std::ostringstream os;
    os << std::setprecision(17) << r;
    residuals += (residuals.empty() ? "" : ";") + name + "=" + os.str();
  }
  Table t{with_params({"alpha", "M", "mode", "p", "t", "beta", "t_p_factor", "coefficient", "oracle_residuals",
                       "seed", "samples"}),
          {}};
  t.add(concat(param_cells(p), {noise.summary.alpha, m, std::string(spde::to_string(mode)), pp, time, rep.beta,
                                rep.t_p_factor, rep.coefficient, residuals, static_cast<std::int64_t>(cfg.mc.seed),
                                std::int64_t{0}}));
  return t;
}

Table cmd_bounds(const RunConfig& cfg) {
  const auto& prm = require_params(cfg);
  const auto& spec = require_spec(cfg);
  const json b = cfg.raw.value("bounds", json::object());
  const double p = get_or(b, "p", 2.0), time = get_or(b, "t", 1.0);
  const int n_terms = get_or(b, "n_terms", 4);
  const int upper_terms = get_or(b, "upper_terms", 6);
  const auto lower = spde::optimize_lower_bound(prm, spec, p, time, n_terms, cfg.mc);
  const auto upper = spde::p_moment_upper(prm, spec, p, time, upper_terms, cfg.mc);
  Table t{with_params({"p", "t", "lower", "lower_std_err", "amplitude", "width", "h_norm_sq", "upper",
                       "upper_direct", "upper_rescaled", "seed", "samples"}),
          {}};
  t.add(concat(param_cells(prm),
               {p, time, lower.value, lower.std_err, lower.trial.amplitude, lower.trial.width, lower.h_norm_sq,
                upper.value, upper.direct, upper.rescaled, static_cast<std::int64_t>(cfg.mc.seed),
                static_cast<std::int64_t>(cfg.mc.samples)}));
  return t;
}

Table cmd_verify(const RunConfig& cfg, const std::vector<std::string>& ids, bool& all_passed) {
  spde::acceptance::Options opt;
  opt.seed = cfg.mc.seed;
  opt.threads = cfg.mc.threads;
  Table t{{"id", "title", "passed", "seconds", "detail", "seed"}, {}};
  all_passed = true;
  for (const auto& check : spde::acceptance::all_checks()) {
    if (!ids.empty() && std::find(ids.begin(), ids.end(), check.id) == ids.end()) continue;
    const auto r = spde::acceptance::run_check(check, opt);
    std::cerr << (r.passed ? "PASS " : "FAIL ") << r.id << " " << r.title << " (" << std::fixed
              << std::setprecision(2) << r.seconds << " s) " << r.detail << std::endl;
    std::cerr.unsetf(std::ios::fixed);
    all_passed = all_passed && r.passed;
    t.add({r.id, r.title, r.passed, r.seconds, r.detail, static_cast<std::int64_t>(opt.seed)});
  }
  if (t.rows.empty()) throw InputError("no acceptance check matches the requested ids");
  return t;
}

// -------------------------------------------------------------------- main

RunConfig load_config(const std::string& path, const std::string& command_arg) {
  RunConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path);
    cfg.raw = json::parse(in);
    if (!cfg.raw.is_object()) throw InputError("config must be a JSON object");
    const int version = cfg.raw.at("schema_version").get<int>();
    if (version != kSchemaVersion) {
      throw InputError("unsupported schema_version " + std::to_string(version));
    }
  } else {
    cfg.raw = json::object();
  }
  cfg.command = command_arg.empty() ? get_or(cfg.raw, "command", std::string()) : command_arg;
  if (cfg.command.empty()) throw InputError("no command given (argument or config \"command\")");
  if (cfg.raw.contains("params")) cfg.params = parse_params(cfg.raw.at("params"));
  if (cfg.raw.contains("noise")) {
    const int d = cfg.params ? cfg.params->d() : 1;
    cfg.noise = parse_noise(cfg.raw.at("noise"), d);
  }
  const json mc = cfg.raw.value("mc", json::object());
  cfg.mc.samples = get_or(mc, "samples", cfg.mc.samples);
  cfg.mc.seed = get_or(mc, "seed", cfg.mc.seed);
  cfg.mc.n_max = get_or(mc, "n_max", cfg.mc.n_max);
  cfg.mc.batches = get_or(mc, "batches", cfg.mc.batches);
  cfg.mc.time_draws = get_or(mc, "time_draws", cfg.mc.time_draws);
  cfg.mc.threads = get_or(mc, "threads", cfg.mc.threads);
  if (cfg.mc.batches < 2 || cfg.mc.samples < static_cast<std::uint64_t>(cfg.mc.batches)) {
    throw InputError("mc needs batches >= 2 and samples >= batches");
  }
  const json out = cfg.raw.value("output", json::object());
  cfg.out_path = get_or(out, "path", std::string());
  cfg.format = get_or(out, "format", cfg.format);
  return cfg;
}

int run(int argc, char** argv) {
  CLI::App app{"Fractional SPDE moment toolkit"};
  std::string command, config_path, out_path, format;
  std::optional<std::uint64_t> seed_flag;
  std::vector<std::string> only;
  app.add_option("command", command, "classify|sweep|kernel|chaos|variational|asymptotics|bounds|verify")
      ->check(CLI::IsMember({"classify", "sweep", "kernel", "chaos", "variational", "asymptotics", "bounds",
                             "verify"}));
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed_flag, "Monte Carlo seed (overrides SPDE_SEED and the config)");
  app.add_option("--out", out_path, "output file (default stdout)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--only", only, "verify: run only these check ids");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  RunConfig cfg = load_config(config_path, command);
  if (const auto env = seed_from_env()) cfg.mc.seed = *env;
  if (seed_flag) cfg.mc.seed = *seed_flag;
  if (!out_path.empty()) cfg.out_path = out_path;
  if (!format.empty()) cfg.format = format;
  if (cfg.format != "csv" && cfg.format != "json") throw InputError("format must be csv or json");

  bool passed = true;
  Table table;
  if (cfg.command == "classify") {
    table = cmd_classify(cfg);
  } else if (cfg.command == "sweep") {
    table = cmd_sweep(cfg);
  } else if (cfg.command == "kernel") {
    table = cmd_kernel(cfg);
  } else if (cfg.command == "chaos") {
    table = cmd_chaos(cfg);
  } else if (cfg.command == "variational") {
    table = cmd_variational(cfg);
  } else if (cfg.command == "asymptotics") {
    table = cmd_asymptotics(cfg);
  } else if (cfg.command == "bounds") {
    table = cmd_bounds(cfg);
  } else if (cfg.command == "verify") {
    table = cmd_verify(cfg, only, passed);
  } else {
    throw InputError("unknown command '" + cfg.command + "'");
  }

  const json meta{{"command", cfg.command},
                  {"schema_version", kSchemaVersion},
                  {"module_version", std::string(spde::kVersion)},
                  {"seed", cfg.mc.seed},
                  {"samples", cfg.mc.samples},
                  {"config", cfg.raw}};
  std::ofstream file;
  if (!cfg.out_path.empty()) {
    file.open(cfg.out_path);
    if (!file) throw InputError("cannot write " + cfg.out_path);
  }
  std::ostream& os = cfg.out_path.empty() ? std::cout : file;
  if (cfg.format == "json") {
    write_json(os, table, meta);
  } else {
    write_csv(os, table);
  }
  return passed ? kExitOk : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const spde::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return spde::is_input_error(e.kind()) ? kExitInput : kExitNumerical;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
