#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lowsnr/asymptotics.hpp"
#include "lowsnr/error.hpp"
#include "lowsnr/mi.hpp"
#include "lowsnr/prediction.hpp"
#include "lowsnr/simulate.hpp"
#include "lowsnr/table_io.hpp"

namespace lowsnr::cli {

namespace {

using Json = nlohmann::ordered_json;

struct KeyInfo {
  const char* name;
  const char* help;
};

// Every recognised key; flags are `--name`, config-file keys may use '_' for '-'.
constexpr KeyInfo kKeys[] = {
    {"model", "fading law: memoryless|ar1|bandlimited|table|line"},
    {"a", "AR1 coefficient (real part)"},
    {"a-im", "AR1 coefficient (imaginary part)"},
    {"lambda-c", "band-limited cutoff in (0, 1/2]"},
    {"table", "path to a lambda,value density table"},
    {"mass", "spectral line masses (comma list)"},
    {"line-freq", "spectral line locations (comma list, default 0)"},
    {"residual", "residual law of a line model: memoryless|ar1|bandlimited|table"},
    {"seed", "64-bit master seed"},
    {"out", "output path (default stdout)"},
    {"format", "csv|json"},
    {"delta2", "observation noise variance"},
    {"past", "inf or a past length"},
    {"method", "integral|series|limit|all"},
    {"tol", "series tolerance"},
    {"b", "block length"},
    {"alpha", "duty cycle"},
    {"A", "peak amplitude"},
    {"n", "sequence length"},
    {"sigma2", "additive noise variance"},
    {"samples", "Monte Carlo sample count"},
    {"workers", "Monte Carlo partitions"},
    {"b-list", "block lengths (comma list)"},
    {"alpha-list", "duty cycles (comma list)"},
    {"snr-list", "SNR values (comma list)"},
    {"mc", "attach Monte Carlo estimates to sweep rows (true|false)"},
};

const std::set<std::string>& common_keys() {
  static const std::set<std::string> k{"model", "a",    "a-im", "lambda-c", "table", "mass",
                                       "line-freq", "residual", "seed", "out",  "format"};
  return k;
}

std::set<std::string> allowed_keys(Command c) {
  std::set<std::string> k = common_keys();
  auto add = [&](std::initializer_list<const char*> extra) {
    for (const char* e : extra) k.insert(e);
  };
  switch (c) {
    case Command::Validate:
    case Command::Capacity: break;
    case Command::Phi: add({"method", "tol"}); break;
    case Command::Predict: add({"delta2", "past"}); break;
    case Command::Scheme: add({"b", "alpha", "A"}); break;
    case Command::Simulate: add({"n", "sigma2", "b", "alpha", "A"}); break;
    case Command::Mi: add({"b", "alpha", "A", "sigma2", "samples", "workers"}); break;
    case Command::Sweep: add({"b-list", "alpha-list", "snr-list", "mc", "samples", "workers", "A"}); break;
  }
  return k;
}

[[noreturn]] void usage(const std::string& why) { throw Error(ErrorCode::UsageError, why); }

std::string canonical_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  if (key == "command") return key;
  for (const auto& k : kKeys) {
    if (key == k.name) return key;
  }
  usage("unknown key '" + key + "'");
}

Command parse_command(const std::string& s) {
  static const std::map<std::string, Command> m{
      {"validate", Command::Validate}, {"phi", Command::Phi},           {"predict", Command::Predict},
      {"capacity", Command::Capacity}, {"scheme", Command::Scheme},     {"simulate", Command::Simulate},
      {"mi", Command::Mi},             {"sweep", Command::Sweep}};
  const auto it = m.find(s);
  if (it == m.end()) usage("unknown command '" + s + "'");
  return it->second;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(d)) usage("--" + key + ": not a number '" + v + "'");
  return d;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    usage("--" + key + ": expected a non-negative integer, got '" + v + "'");
  }
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    usage("--" + key + ": integer out of range '" + v + "'");
  }
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  return parts;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  usage("--" + key + ": expected true or false");
}

void check(bool ok, const std::string& why) {
  if (!ok) usage(why);
}

std::string fmt12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

Json config_json(const RunConfig& cfg) {
  Json j = Json::object();
  for (const auto& [k, v] : cfg.resolved) j[k] = v;
  return j;
}

void csv_header(std::ostream& out, const RunConfig& cfg) {
  for (const auto& [k, v] : cfg.resolved) out << "# " << k << "=" << v << "\n";
}

void emit_json(std::ostream& out, Json body, const RunConfig& cfg) {
  body["seed"] = cfg.seed;
  body["config"] = config_json(cfg);
  out << body.dump() << "\n";
}

// Key/value reports for commands without a tabular shape.
void emit(std::ostream& out, const Json& body, const RunConfig& cfg) {
  if (cfg.format == OutputFormat::Json) {
    emit_json(out, body, cfg);
    return;
  }
  csv_header(out, cfg);
  out << "key,value\n";
  for (const auto& [k, v] : body.items()) {
    if (v.is_number_float()) {
      out << k << "," << fmt12(v.get<double>()) << "\n";
    } else if (v.is_string()) {
      out << k << "," << v.get<std::string>() << "\n";
    } else if (v.is_array()) {
      std::string joined;
      for (const auto& e : v) {
        if (!joined.empty()) joined += ";";
        joined += e.is_number_float() ? fmt12(e.get<double>()) : (e.is_string() ? e.get<std::string>() : e.dump());
      }
      out << k << "," << joined << "\n";
    } else {
      out << k << "," << v.dump() << "\n";
    }
  }
  out << "seed," << cfg.seed << "\n";
}

int run_validate(const RunConfig& cfg, const FadingModel& model, std::ostream& out) {
  const ValidationReport rep = validate(model);
  Json j;
  j["model"] = model.describe();
  j["has_density"] = rep.has_density;
  j["spectral_line"] = rep.spectral_line;
  j["density_mass"] = rep.density_mass;
  j["line_mass"] = rep.line_mass;
  j["unit_mass_ok"] = rep.unit_mass_ok;
  j["min_eigenvalue"] = rep.min_eigenvalue;
  j["psd_ok"] = rep.psd_ok;
  j["verdict"] = model.has_density_part() ? to_string(rep.square_integrable) : std::string("no_density");
  j["square_integral_estimates"] = rep.square_integral_estimates;
  j["failures"] = rep.failures;
  emit(out, j, cfg);
  return kExitOk;
}

const std::vector<double>& default_rho_grid() {
  static const std::vector<double> g{1e-1, 1e-2, 1e-3};
  return g;
}

int run_phi(const RunConfig& cfg, const FadingModel& model, std::ostream& out) {
  Json j;
  j["model"] = model.describe();
  j["method"] = cfg.method;
  const bool all = cfg.method == "all";
  std::optional<double> integral, series, limit;
  if (all || cfg.method == "integral") integral = phi_integral(model);
  if (all || cfg.method == "series") {
    PhiSeriesOptions opts;
    opts.tol = cfg.tol;
    series = phi_series(model, opts);
  }
  if (all || cfg.method == "limit") {
    const auto est = phi_via_limit(model, default_rho_grid());
    limit = est.phi;
    j["limit_spread"] = est.spread;
  }
  if (integral) j["phi_integral"] = *integral;
  if (series) j["phi_series"] = *series;
  if (limit) j["phi_limit"] = *limit;
  j["phi"] = integral ? *integral : series ? *series : *limit;
  if (all) {
    const bool ok = std::abs(*integral - *series) <= 1e-6 && std::abs(*integral - *limit) <= 1e-3;
    j["cross_check"] = ok ? "pass" : "fail";
    if (!ok) {
      j["condition"] = std::string(to_string(ErrorCode::CrossCheckFailed));
      emit(out, j, cfg);
      return kExitNumerical;
    }
  }
  emit(out, j, cfg);
  return kExitOk;
}

int run_predict(const RunConfig& cfg, const FadingModel& model, std::ostream& out) {
  const PredictionResult r = predict({model, cfg.delta2, cfg.past});
  Json j;
  j["model"] = model.describe();
  j["epsilon2"] = r.error;
  j["delta2"] = r.noise_variance;
  j["method"] = r.method == PredictionMethod::ClosedForm ? "closed_form" : "finite_past";
  j["past"] = r.past_length ? Json(*r.past_length) : Json("inf");
  j["regularized"] = r.regularized;
  emit(out, j, cfg);
  return kExitOk;
}

int run_capacity(const RunConfig& cfg, const FadingModel& model, std::ostream& out) {
  const CapacityAsymptote c = capacity_asymptote(model);
  Json j;
  if (c.regime == MemoryRegime::SpectralLine) {
    j["regime"] = to_string(c.regime);
    j["linear_slope"] = *c.linear_slope;
    j["note"] = "low-SNR capacity grows linearly; slope is the sum of spectral jumps";
  } else {
    j["phi"] = *c.phi;
    j["regime"] = to_string(c.regime);
    j["kappa"] = *c.kappa;
    j["alpha_star"] = *c.alpha_star;
  }
  j["model"] = model.describe();
  emit(out, j, cfg);
  return kExitOk;
}

BlockScheme scheme_of(const RunConfig& cfg) {
  BlockScheme s;
  s.amplitude = cfg.amplitude;
  s.alpha = cfg.alpha;
  s.block_length = cfg.b;
  return s;
}

std::optional<double> try_phi(const FadingModel& model) {
  try {
    return phi_integral(model);
  } catch (const Error&) {
    return std::nullopt;
  }
}

int run_scheme(const RunConfig& cfg, const FadingModel& model, std::ostream& out) {
  const BlockScheme s = scheme_of(cfg);
  s.check();
  Json j;
  j["model"] = model.describe();
  j["b"] = s.block_length;
  j["alpha"] = s.alpha;
  j["A"] = s.amplitude;
  j["s_of_b"] = s_of_b(model, s.block_length);
  j["block_coeff"] = block_coefficient(model, s.block_length, s.alpha);
  j["iid_coeff"] = iid_coefficient(model, s.block_length, s.alpha);
  const auto phi = try_phi(model);
  j["upper_g"] = phi ? Json(upper_bound_g(*phi, s.alpha)) : Json(nullptr);
  if (s.block_length <= kMaxMiBlock) {
    const DiscreteInputLaw law = scheme_to_law(s);
    j["support_size"] = law.support.size();
    j["second_order_coeff_exact"] = second_order_coeff_exact(law, model);
  }
  emit(out, j, cfg);
  return kExitOk;
}

Json complex_array(const ComplexSeq& v) {
  Json a = Json::array();
  for (const auto& z : v) a.push_back(Json::array({z.real(), z.imag()}));
  return a;
}

int run_simulate(const RunConfig& cfg, const FadingModel& model, std::ostream& out) {
  const BlockScheme s = scheme_of(cfg);
  const ComplexSeq x = gen_inputs(s, cfg.n, cfg.seed);
  const ChannelTrace t = apply_channel(x, model, cfg.sigma2, cfg.seed, s.amplitude);
  if (cfg.format == OutputFormat::Csv) {
    csv_header(out, cfg);
    write_trace(out, t);
    return kExitOk;
  }
  Json j;
  j["model"] = t.model;
  j["sigma2"] = t.sigma2;
  j["A"] = *t.amplitude;
  j["snr"] = *t.snr();
  j["x"] = complex_array(t.x);
  j["h"] = complex_array(t.h);
  j["y"] = complex_array(t.y);
  emit_json(out, j, cfg);
  return kExitOk;
}

int run_mi(const RunConfig& cfg, const FadingModel& model, std::ostream& out) {
  const BlockScheme s = scheme_of(cfg);
  MonteCarloOptions opts;
  opts.partitions = cfg.workers;
  const MIEstimate e = mi_monte_carlo(s, model, cfg.sigma2, cfg.samples, cfg.seed, opts);
  if (cfg.format == OutputFormat::Csv) {
    csv_header(out, cfg);
    write_estimates_csv(out, std::span(&e, 1));
    return kExitOk;
  }
  const double coeff = second_order_coeff_exact(scheme_to_law(s), model);
  Json j;
  j["model"] = model.describe();
  j["b"] = e.b;
  j["snr"] = e.snr;
  j["alpha"] = e.alpha;
  j["estimate"] = e.estimate;
  j["std_error"] = e.std_error;
  j["n_samples"] = e.n_samples;
  j["partitions"] = e.partitions;
  j["second_order_coeff"] = coeff;
  j["second_order_prediction"] = coeff * e.snr * e.snr;
  emit_json(out, j, cfg);
  return kExitOk;
}

int run_sweep(const RunConfig& cfg, const FadingModel& model, std::ostream& out) {
  const double phi = phi_integral(model);
  const std::string label = model.describe();
  const IidGap limit = iid_gap(phi);
  MonteCarloOptions opts;
  opts.partitions = cfg.workers;

  Json rows = Json::array();
  Json per_b = Json::array();
  std::ostringstream body;
  body << "model,b,alpha,snr,upper_g,block_coeff,iid_coeff,mi_estimate,mi_stderr,seed\n";
  for (std::size_t b : cfg.b_list) {
    const double ratio = s_of_b(model, b) / static_cast<double>(b);
    const auto best_block = maximize_alpha([&](double a) { return block_coefficient_from_ratio(ratio, a); }, phi);
    const auto best_iid = maximize_alpha([&](double a) { return iid_coefficient_from_ratio(ratio, a); }, phi);
    per_b.push_back({{"b", b},
                     {"max_block_coeff", best_block.value},
                     {"argmax_block", best_block.alpha},
                     {"max_iid_coeff", best_iid.value},
                     {"argmax_iid", best_iid.alpha}});
    for (double alpha : cfg.alpha_list) {
      const double g = upper_bound_g(phi, alpha);
      const double bc = block_coefficient(model, b, alpha);
      const double ic = iid_coefficient(model, b, alpha);
      for (double snr : cfg.snr_list) {
        std::optional<MIEstimate> est;
        if (cfg.mc) {
          BlockScheme s{cfg.amplitude, alpha, b};
          est = mi_monte_carlo(s, model, cfg.amplitude * cfg.amplitude / snr, cfg.samples, cfg.seed, opts);
        }
        body << label << ',' << b << ',' << fmt12(alpha) << ',' << fmt12(snr) << ',' << fmt12(g) << ','
             << fmt12(bc) << ',' << fmt12(ic) << ',' << (est ? fmt12(est->estimate) : "") << ','
             << (est ? fmt12(est->std_error) : "") << ',' << cfg.seed << '\n';
        Json r{{"model", label}, {"b", b}, {"alpha", alpha}, {"snr", snr}, {"upper_g", g},
               {"block_coeff", bc}, {"iid_coeff", ic}};
        r["mi_estimate"] = est ? Json(est->estimate) : Json(nullptr);
        r["mi_stderr"] = est ? Json(est->std_error) : Json(nullptr);
        r["seed"] = cfg.seed;
        rows.push_back(std::move(r));
      }
    }
  }
  Json summary{{"phi", phi},
               {"kappa", kappa_of_phi(phi)},
               {"alpha_star", alpha_star_of_phi(phi)},
               {"limit_max_block_coeff", limit.block.value},
               {"limit_argmax_block", limit.block.alpha},
               {"limit_max_iid_coeff", limit.iid.value},
               {"limit_argmax_iid", limit.iid.alpha},
               {"iid_gap", limit.gap},
               {"per_b", per_b}};
  if (cfg.format == OutputFormat::Json) {
    emit_json(out, Json{{"rows", rows}, {"summary", summary}}, cfg);
    return kExitOk;
  }
  csv_header(out, cfg);
  out << "# summary: phi=" << fmt12(phi) << " kappa=" << fmt12(kappa_of_phi(phi))
      << " alpha_star=" << fmt12(alpha_star_of_phi(phi)) << "\n";
  out << "# summary: limit_max_block_coeff=" << fmt12(limit.block.value) << " at alpha=" << fmt12(limit.block.alpha)
      << " limit_max_iid_coeff=" << fmt12(limit.iid.value) << " at alpha=" << fmt12(limit.iid.alpha)
      << " iid_gap=" << fmt12(limit.gap) << "\n";
  for (const auto& p : per_b) {
    out << "# summary: b=" << p["b"].get<std::size_t>()
        << " max_block_coeff=" << fmt12(p["max_block_coeff"].get<double>())
        << " max_iid_coeff=" << fmt12(p["max_iid_coeff"].get<double>()) << "\n";
  }
  out << body.str();
  return kExitOk;
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::Validate: return "validate";
    case Command::Phi: return "phi";
    case Command::Predict: return "predict";
    case Command::Capacity: return "capacity";
    case Command::Scheme: return "scheme";
    case Command::Simulate: return "simulate";
    case Command::Mi: return "mi";
    case Command::Sweep: return "sweep";
  }
  return "unknown";
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) usage(path + ":" + std::to_string(line_no) + ": expected key=value");
    kv[canonical_key(trim(line.substr(0, eq)))] = trim(line.substr(eq + 1));
  }
  return kv;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"lowsnr: low-SNR non-coherent fading channel laboratory", "lowsnr"};
  app.allow_extras(false);
  std::optional<std::string> command;
  std::optional<std::string> config_path;
  std::map<std::string, std::optional<std::string>> flags;
  app.add_option("command", command, "validate|phi|predict|capacity|scheme|simulate|mi|sweep");
  app.add_option("--config", config_path, "flat key=value config file");
  for (const auto& k : kKeys) {
    if (std::string(k.name) == "mc") continue;
    app.add_option(std::string("--") + k.name, flags[k.name], k.help);
  }
  bool mc_flag = false;
  app.add_flag("--mc", mc_flag, "attach Monte Carlo estimates to sweep rows");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::ParseError& e) {
    usage(e.what());
  }

  std::map<std::string, std::string> kv;
  if (config_path) kv = read_config_file(*config_path);
  for (const auto& [k, v] : flags) {
    if (v) kv[k] = *v;
  }
  if (mc_flag) kv["mc"] = "true";
  if (command) kv["command"] = *command;
  if (!kv.contains("command")) usage("no command given");

  RunConfig cfg;
  cfg.command = parse_command(kv.at("command"));
  const auto allowed = allowed_keys(cfg.command);
  for (const auto& [k, v] : kv) {
    if (k != "command" && !allowed.contains(k)) usage("--" + k + " does not apply to '" + kv.at("command") + "'");
  }
  auto get = [&](const std::string& k) -> const std::string* {
    const auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };

  // Model.
  if (const auto* v = get("model")) cfg.model.kind = *v;
  static const std::set<std::string> kinds{"memoryless", "ar1", "bandlimited", "table", "line"};
  check(kinds.contains(cfg.model.kind), "--model: unknown kind '" + cfg.model.kind + "'");
  double a_re = 0.0, a_im = 0.0;
  if (const auto* v = get("a")) a_re = to_double("a", *v);
  if (const auto* v = get("a-im")) a_im = to_double("a-im", *v);
  cfg.model.a = {a_re, a_im};
  check(std::abs(cfg.model.a) < 1.0, "--a: AR1 coefficient needs |a| < 1");
  if (const auto* v = get("lambda-c")) cfg.model.lambda_c = to_double("lambda-c", *v);
  check(cfg.model.lambda_c > 0.0 && cfg.model.lambda_c <= 0.5, "--lambda-c must lie in (0, 1/2]");
  if (const auto* v = get("table")) cfg.model.table = *v;
  if (const auto* v = get("mass")) {
    for (const auto& p : split_list(*v)) cfg.model.mass.push_back(to_double("mass", p));
  }
  if (const auto* v = get("line-freq")) {
    for (const auto& p : split_list(*v)) cfg.model.line_freq.push_back(to_double("line-freq", p));
  }
  if (const auto* v = get("residual")) cfg.model.residual = *v;

  const std::string& kind = cfg.model.kind;
  const std::string& base = kind == "line" ? cfg.model.residual : kind;
  check(!(base == "ar1") || get("a"), "--model ar1 needs --a");
  check(!(base == "bandlimited") || get("lambda-c"), "--model bandlimited needs --lambda-c");
  check(!(base == "table") || !cfg.model.table.empty(), "--model table needs --table");
  if (kind == "line") {
    check(!cfg.model.mass.empty(), "--model line needs --mass");
    double total = 0.0;
    for (double m : cfg.model.mass) {
      check(m > 0.0, "--mass values must be positive");
      total += m;
    }
    check(total <= 1.0 + 1e-12, "--mass values sum above one");
    if (cfg.model.line_freq.empty()) cfg.model.line_freq.assign(cfg.model.mass.size(), 0.0);
    check(cfg.model.line_freq.size() == cfg.model.mass.size(), "--line-freq and --mass lengths differ");
    for (double f : cfg.model.line_freq) check(f >= -0.5 && f < 0.5, "--line-freq values must lie in [-1/2, 1/2)");
    check(total >= 1.0 - 1e-12 || !cfg.model.residual.empty(), "--model line with mass below one needs --residual");
    check(cfg.model.residual.empty() || cfg.model.residual == "none" ||
              (kinds.contains(cfg.model.residual) && cfg.model.residual != "line"),
          "--residual: unknown kind '" + cfg.model.residual + "'");
  }

  // Common.
  if (const auto* v = get("seed")) cfg.seed = to_u64("seed", *v);
  if (const auto* v = get("out")) cfg.out = *v;
  const bool tabular = cfg.command == Command::Sweep || cfg.command == Command::Simulate || cfg.command == Command::Mi;
  cfg.format = tabular ? OutputFormat::Csv : OutputFormat::Json;
  if (const auto* v = get("format")) {
    check(*v == "csv" || *v == "json", "--format must be csv or json");
    cfg.format = *v == "csv" ? OutputFormat::Csv : OutputFormat::Json;
  }

  // Command specific.
  if (const auto* v = get("delta2")) cfg.delta2 = to_double("delta2", *v);
  check(cfg.delta2 >= 0.0, "--delta2 must be >= 0");
  if (const auto* v = get("past")) {
    if (*v != "inf") {
      cfg.past = static_cast<std::size_t>(to_u64("past", *v));
      check(*cfg.past >= 1 && *cfg.past <= kDefaultToeplitzCap, "--past must be inf or in [1, 4096]");
    }
  }
  if (const auto* v = get("method")) cfg.method = *v;
  check(cfg.method == "integral" || cfg.method == "series" || cfg.method == "limit" || cfg.method == "all",
        "--method must be integral|series|limit|all");
  if (const auto* v = get("tol")) cfg.tol = to_double("tol", *v);
  check(cfg.tol > 0.0, "--tol must be positive");
  if (const auto* v = get("b")) cfg.b = static_cast<std::size_t>(to_u64("b", *v));
  check(cfg.b >= 1, "--b must be >= 1");
  if (const auto* v = get("alpha")) cfg.alpha = to_double("alpha", *v);
  check(cfg.alpha >= 0.0 && cfg.alpha <= 1.0, "--alpha must lie in [0, 1]");
  if (const auto* v = get("A")) cfg.amplitude = to_double("A", *v);
  check(cfg.amplitude > 0.0, "--A must be positive");
  if (const auto* v = get("sigma2")) cfg.sigma2 = to_double("sigma2", *v);
  check(cfg.sigma2 > 0.0, "--sigma2 must be positive");
  if (const auto* v = get("n")) cfg.n = static_cast<std::size_t>(to_u64("n", *v));
  check(cfg.n >= 1, "--n must be >= 1");
  if (const auto* v = get("samples")) cfg.samples = static_cast<std::size_t>(to_u64("samples", *v));
  check(cfg.samples >= kMinMiSamples, "--samples must be >= 10000");
  if (const auto* v = get("workers")) cfg.workers = static_cast<std::size_t>(to_u64("workers", *v));
  check(cfg.workers >= 1, "--workers must be >= 1");
  if (cfg.command == Command::Mi) check(cfg.b <= kMaxMiBlock, "--b must be <= 12 for mi");

  if (cfg.command == Command::Sweep) {
    check(get("b-list") && get("alpha-list") && get("snr-list"), "sweep needs --b-list, --alpha-list and --snr-list");
    for (const auto& p : split_list(*get("b-list"))) {
      const auto b = static_cast<std::size_t>(to_u64("b-list", p));
      check(b >= 1, "--b-list values must be >= 1");
      cfg.b_list.push_back(b);
    }
    for (const auto& p : split_list(*get("alpha-list"))) {
      const double a = to_double("alpha-list", p);
      check(a >= 0.0 && a <= 1.0, "--alpha-list values must lie in [0, 1]");
      cfg.alpha_list.push_back(a);
    }
    for (const auto& p : split_list(*get("snr-list"))) {
      const double s = to_double("snr-list", p);
      check(s > 0.0, "--snr-list values must be positive");
      cfg.snr_list.push_back(s);
    }
    check(!cfg.b_list.empty() && !cfg.alpha_list.empty() && !cfg.snr_list.empty(), "sweep lists must be non-empty");
    if (const auto* v = get("mc")) cfg.mc = to_bool("mc", *v);
    if (cfg.mc) {
      check(std::all_of(cfg.b_list.begin(), cfg.b_list.end(), [](std::size_t b) { return b <= kMaxMiBlock; }),
            "--mc needs every block length <= 12");
    }
  }

  kv["seed"] = std::to_string(cfg.seed);
  kv["format"] = cfg.format == OutputFormat::Csv ? "csv" : "json";
  kv["model"] = cfg.model.kind;
  kv.erase("out");
  cfg.resolved = std::move(kv);
  return cfg;
}

FadingModel build_model(const ModelSpec& spec) {
  auto base = [&](const std::string& kind) -> FadingModel {
    if (kind == "memoryless") return FadingModel::memoryless();
    if (kind == "ar1") return FadingModel::ar1(spec.a);
    if (kind == "bandlimited") return FadingModel::band_limited(spec.lambda_c);
    if (kind == "table") return load_density_model(spec.table);
    usage("unknown model kind '" + kind + "'");
  };
  if (spec.kind != "line") return base(spec.kind);
  std::vector<SpectralLine> lines;
  for (std::size_t i = 0; i < spec.mass.size(); ++i) lines.push_back({spec.line_freq.at(i), spec.mass[i]});
  std::shared_ptr<const FadingModel> residual;
  if (!spec.residual.empty() && spec.residual != "none") residual = std::make_shared<const FadingModel>(base(spec.residual));
  return FadingModel::line_plus_residual(std::move(lines), std::move(residual));
}

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const FadingModel model = build_model(cfg.model);
    switch (cfg.command) {
      case Command::Validate: return run_validate(cfg, model, out);
      case Command::Phi: return run_phi(cfg, model, out);
      case Command::Predict: return run_predict(cfg, model, out);
      case Command::Capacity: return run_capacity(cfg, model, out);
      case Command::Scheme: return run_scheme(cfg, model, out);
      case Command::Simulate: return run_simulate(cfg, model, out);
      case Command::Mi: return run_mi(cfg, model, out);
      case Command::Sweep: return run_sweep(cfg, model, out);
    }
  } catch (const Error& e) {
    err << "lowsnr: " << e.what() << "\n";
    if (e.code() == ErrorCode::IoError) return kExitIo;
    if (e.is_numerical()) {
      emit(out, Json{{"condition", std::string(to_string(e.code()))}, {"message", e.what()}}, cfg);
      return kExitNumerical;
    }
    if (e.code() == ErrorCode::UsageError || e.code() == ErrorCode::ParamOutOfRange ||
        e.code() == ErrorCode::NotNormalized || e.code() == ErrorCode::DomainError) {
      return kExitUsage;
    }
    emit(out, Json{{"condition", std::string(to_string(e.code()))}, {"message", e.what()}}, cfg);
    return kExitNumerical;
  }
  return kExitUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const HelpRequested& h) {
    out << h.text;
    return kExitOk;
  } catch (const Error& e) {
    err << "lowsnr: " << e.what() << "\n";
    return e.code() == ErrorCode::IoError ? kExitIo : kExitUsage;
  }
  if (!cfg.out) return execute(cfg, out, err);
  std::ofstream file(*cfg.out);
  if (!file) {
    err << "lowsnr: cannot write " << *cfg.out << "\n";
    return kExitIo;
  }
  const int rc = execute(cfg, file, err);
  file.flush();
  if (!file) {
    err << "lowsnr: write to " << *cfg.out << " failed\n";
    return kExitIo;
  }
  return rc;
}

}  // namespace lowsnr::cli
