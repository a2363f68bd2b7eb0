#include "markovrng/cli.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "markovrng/bounds.h"
#include "markovrng/errors.h"
#include "markovrng/extractor.h"
#include "markovrng/legendre.h"
#include "markovrng/markov_core.h"
#include "markovrng/oracle.h"
#include "markovrng/renyi.h"

namespace markovrng {

namespace {

using json = nlohmann::ordered_json;

const double kLn2 = std::log(2.0);

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Nats, or bits with --bits; applied only when printing.
struct Units {
  bool bits = false;
  double operator()(double nats) const { return bits ? nats / kLn2 : nats; }
};

TransitionModel worked_example() { return make_model({{0.9, 0.2}, {0.1, 0.8}}, {1.0, 0.0}); }

struct Sink {
  std::ostream& out;
  std::unique_ptr<std::ofstream> file;
  std::ostream& stream() { return file ? *file : out; }
};

Sink open_sink(std::ostream& out, const std::string& path) {
  Sink s{out, nullptr};
  if (!path.empty()) {
    s.file = std::make_unique<std::ofstream>(path);
    if (!*s.file) throw MalformedDocument("cannot write " + path);
  }
  return s;
}

// --- spectrum --------------------------------------------------------------

struct SpectrumOpts {
  std::string model, grid = "-0.5:2:0.25", format = "csv", out;
};

int cmd_spectrum(const SpectrumOpts& o, const Units& u, std::ostream& out) {
  const TransitionModel model = load_model(o.model);
  const auto thetas = parse_grid(o.grid);
  const bool joint = !model.single_terminal();
  std::optional<RenyiProfile> single(std::in_place, model, Variant::kSingle), lower, upper;
  if (joint && check_assumption(model, Assumption::kA1).holds) lower.emplace(model, Variant::kLower);
  if (joint && check_assumption(model, Assumption::kA2).holds) upper.emplace(model, Variant::kUpper);
  const double variance = single->variance();
  double h_inf = std::nan("");
  try {
    h_inf = min_entropy_rate(model, MinVariant::kPlain).rate;
  } catch (const StateSpaceTooLarge&) {
  }
  auto rate = [](const std::optional<RenyiProfile>& p, double t) { return p ? p->rate(t) : std::nan(""); };

  Sink sink = open_sink(out, o.out);
  std::ostream& os = sink.stream();
  if (o.format == "json") {
    json rows = json::array();
    for (double t : thetas) {
      rows.push_back({{"theta", t},
                      {"H", jnum(u(rate(single, t)))},
                      {"H_lower", jnum(u(rate(lower, t)))},
                      {"H_upper", jnum(u(rate(upper, t)))}});
    }
    json j = {{"entropy_rate", u(single->entropy_rate())},
              {"variance", variance},
              {"min_entropy_rate", jnum(u(h_inf))},
              {"rows", rows}};
    os << j.dump(2) << "\n";
  } else {
    os << "theta,H,H_lower,H_upper,V,H_inf\n";
    for (double t : thetas) {
      os << fmt(t) << ',' << fmt(u(rate(single, t))) << ',' << fmt(u(rate(lower, t))) << ','
         << fmt(u(rate(upper, t))) << ',' << fmt(variance) << ',' << fmt(u(h_inf)) << "\n";
    }
  }
  return kExitOk;
}

// --- assumptions -----------------------------------------------------------

json assumption_json(const AssumptionReport& r) {
  json j = {{"assumption", r.assumption == Assumption::kA1 ? "A1" : "A2"},
            {"holds", r.holds},
            {"max_deviation", r.max_deviation}};
  if (r.has_witness) j["witness"] = {r.witness[0], r.witness[1], r.witness[2], r.witness[3]};
  else j["witness"] = nullptr;
  return j;
}

int cmd_assumptions(const std::string& path, std::ostream& out) {
  const TransitionModel model = load_model(path);
  json j = {{"x_size", model.x_size},
            {"y_size", model.y_size},
            {"period", model.period},
            {"reports", {assumption_json(check_assumption(model, Assumption::kA1)),
                         assumption_json(check_assumption(model, Assumption::kA2))}}};
  out << j.dump(2) << "\n";
  return kExitOk;
}

// --- bound -----------------------------------------------------------------

struct BoundOpts {
  std::string model, theorem = "ach", format = "json", dist, kind, out;
  int64_t n = 0;
  std::optional<double> rate, log2m, epsilon, theta;
  double nu = 0.5, M = 2.0;
};

void print_report(std::ostream& os, const BoundReport& r, const std::string& format, const Units& u) {
  BoundReport shown = r;
  if (shown.value) shown.value = u(*shown.value);
  shown.rate = u(shown.rate);
  if (format == "csv") {
    os << "n,R,epsilon,theorem,value,theta_star,s_star,feasible,clamped\n";
    os << shown.n << ',' << fmt(shown.rate) << ',' << fmt(shown.epsilon) << ',' << shown.theorem << ','
       << (shown.value ? fmt(*shown.value) : "") << ',' << fmt(shown.theta_star) << ',' << fmt(shown.s_star) << ','
       << (shown.feasible ? "true" : "false") << ',' << (shown.clamped ? "true" : "false") << "\n";
  } else {
    os << report_to_json(shown) << "\n";
  }
}

int cmd_bound(const BoundOpts& o, const Units& u, std::ostream& out) {
  Sink sink = open_sink(out, o.out);
  std::ostream& os = sink.stream();
  if (!o.kind.empty()) {
    // single-shot lemma on an explicit distribution
    std::vector<double> p;
    std::stringstream ss(o.dist);
    for (std::string tok; std::getline(ss, tok, ',');) p.push_back(std::stod(tok));
    if (p.empty()) throw MalformedDocument("--dist needs a comma-separated distribution");
    SingleShotOptions opt;
    opt.nu = o.nu;
    const SingleShotKind kind = parse_single_shot_kind(o.kind);
    const SingleShotResult r = single_shot_bound(p, o.M, kind, opt);
    json j = {{"kind", single_shot_kind_name(kind)},
              {"bound", is_converse(kind) ? "lower" : "upper"},
              {"value", r.value},
              {"gamma_star", u(r.gamma_star)},
              {"theta_star", r.theta_star},
              {"clamped", r.clamped}};
    os << j.dump(2) << "\n";
    return kExitOk;
  }
  const TransitionModel model = load_model(o.model);
  if (o.n < 2) throw MalformedDocument("--n must be at least 2");
  if (o.rate.has_value() == o.log2m.has_value()) throw MalformedDocument("give exactly one of --rate and --log2M");
  const double R = o.rate ? *o.rate : *o.log2m * kLn2 / static_cast<double>(o.n);

  BoundReport report;
  const std::string& t = o.theorem;
  if (t == "rer_upper" || t == "rer_lower") {
    report = urng_rer_bound(model, o.n, R, t == "rer_upper" ? RateDirection::kUpper : RateDirection::kLower, o.theta);
  } else if (t == "mmir_upper" || t == "mmir_lower") {
    report =
        surng_mmir_bound(model, o.n, R, t == "mmir_upper" ? RateDirection::kUpper : RateDirection::kLower, o.theta);
  } else {
    BoundQuery q = BoundQuery::from_rate(o.n, R);
    q.nu = o.nu;
    if (o.epsilon) q.epsilon = *o.epsilon;
    report = markov_bound(model, parse_theorem(t), q);
  }
  print_report(os, report, o.format, u);
  return report.feasible ? kExitOk : kExitInfeasible;
}

// --- sweep -----------------------------------------------------------------

struct SweepOpts {
  std::string model, theorems, out;
  int64_t n = 10000;
  double eps_min = 2.0, eps_max = 60.0, eps_step = 2.0;
};

int cmd_sweep(const SweepOpts& o, const Units& u, std::ostream& out) {
  const TransitionModel model = load_model(o.model);
  std::vector<Theorem> theorems;
  if (!o.theorems.empty()) {
    std::stringstream ss(o.theorems);
    for (std::string tok; std::getline(ss, tok, ',');) theorems.push_back(parse_theorem(tok));
  } else if (model.single_terminal()) {
    theorems = {Theorem::kAch, Theorem::kConvSphere, Theorem::kConvStrong};
  } else {
    if (check_assumption(model, Assumption::kA1).holds) theorems.insert(theorems.end(), {Theorem::kAchA1, Theorem::kConvA1});
    if (check_assumption(model, Assumption::kA2).holds) theorems.insert(theorems.end(), {Theorem::kAchA2, Theorem::kConvA2});
    if (theorems.empty()) throw AssumptionViolated("joint model satisfies neither A1 nor A2");
  }
  std::vector<double> exponents;
  for (double e = o.eps_min; e <= o.eps_max + 1e-9; e += o.eps_step) exponents.push_back(e);

  Sink sink = open_sink(out, o.out);
  std::ostream& os = sink.stream();
  os << "n,R,epsilon,theorem,value,theta_star,s_star,feasible,clamped\n";
  // Rows are ordered by (theorem, -log10 epsilon).
  for (Theorem th : theorems) {
    for (double e : exponents) {
      const double eps = std::pow(10.0, -e);
      std::string rate, value, theta, s, feasible = "false", clamped = "false";
      try {
        const RatePoint rp = rate_for_epsilon(model, o.n, eps, th);
        rate = fmt(u(rp.rate));
        value = rp.report.value ? fmt(u(*rp.report.value)) : "";
        theta = fmt(rp.report.theta_star);
        s = fmt(rp.report.s_star);
        feasible = rp.report.feasible ? "true" : "false";
        clamped = rp.report.clamped ? "true" : "false";
      } catch (const Error& err) {
        if (!err.is_infeasible()) throw;
      }
      os << o.n << ',' << rate << ',' << fmt(eps) << ',' << theorem_name(th) << ',' << value << ',' << theta << ','
         << s << ',' << feasible << ',' << clamped << "\n";
    }
  }
  return kExitOk;
}

// --- asymptotic ------------------------------------------------------------

struct AsymptoticOpts {
  std::string model, regime = "ld_ach", source = "plain";
  double R = 0.0, delta = 0.0, epsilon = 0.5;
  int64_t n = 0;
};

int cmd_asymptotic(const AsymptoticOpts& o, const Units& u, std::ostream& out) {
  const TransitionModel model = load_model(o.model);
  AsymptoticParams p;
  p.R = o.R;
  p.delta = o.delta;
  p.n = o.n;
  p.epsilon = o.epsilon;
  if (o.source == "plain") p.source = Source::kPlain;
  else if (o.source == "lower") p.source = Source::kLowerCond;
  else if (o.source == "upper") p.source = Source::kUpperCond;
  else throw MalformedDocument("--source must be plain, lower or upper");
  const Regime regime = parse_regime(o.regime);
  const AsymptoticResult r = asymptotic(model, regime, p);
  // exponents and log M scale with the unit; theta does not
  json j = {{"regime", regime_name(regime)},
            {"value", u(r.value)},
            {"theta_star", jnum(r.theta_star)},
            {"critical_rate", jnum(u(r.critical_rate))},
            {"matches_above_critical", r.matches_above_critical}};
  out << j.dump(2) << "\n";
  return kExitOk;
}

// --- extract ---------------------------------------------------------------

struct ExtractOpts {
  std::string model, input, seed_hex, audit = "none", out;
  int n = 0, m = 0;
  int64_t blocks = 0;
  uint64_t sample_seed = 1;
};

int cmd_extract(const ExtractOpts& o, std::ostream& out) {
  if (o.model.empty() == o.input.empty()) throw MalformedDocument("give exactly one of --model and --input");
  if (o.seed_hex.empty()) throw MalformedDocument("--seed-hex is required");
  const ToeplitzSpec spec = toeplitz_from_hex(o.n, o.m, o.seed_hex);
  Audit audit = Audit::kNone;
  if (o.audit == "exact") audit = Audit::kExact;
  else if (o.audit == "mc") audit = Audit::kMonteCarlo;
  else if (o.audit != "none") throw MalformedDocument("--audit must be none, exact or mc");

  std::optional<TransitionModel> model;
  Bits input;
  if (!o.model.empty()) {
    model = load_model(o.model);
    const int b = bits_per_symbol(*model);
    if (o.n % b) throw LengthMismatch("--n must be a multiple of the bits per symbol");
    if (o.blocks < 1) throw MalformedDocument("--blocks must be positive with --model");
    input = sample_bits(*model, o.n / b, o.blocks, o.sample_seed);
  } else {
    input = read_bit_file(o.input);
    if (audit != Audit::kNone) throw MalformedDocument("--audit needs --model");
  }
  const ExtractionResult res = extract_stream(input, spec, model ? &*model : nullptr, audit);
  if (!o.out.empty()) write_bit_file(o.out, res.output);
  out << extraction_report_to_json(res.report) << "\n";
  return kExitOk;
}

// --- verify ----------------------------------------------------------------

int cmd_verify(const std::string& path, std::ostream& out) {
  const TransitionModel model = path.empty() ? worked_example() : load_model(path);
  json checks = json::array();
  bool all = true;
  auto record = [&](const std::string& name, const SandwichReport& r) {
    checks.push_back({{"check", name}, {"holds", r.holds}, {"slack_low", r.slack_low}, {"slack_high", r.slack_high}});
    all = all && r.holds;
  };
  auto fits = [&](int n) {
    double size = 1.0;
    for (int i = 0; i < n; ++i) size *= model.states();
    return size <= static_cast<double>(kEnumerationBudget);
  };
  for (int n : {8, 10, 12}) {
    if (!fits(n)) continue;
    for (double t : {-0.5, -0.2, 0.3, 1.0, 2.0}) {
      record("delta n=" + std::to_string(n) + " theta=" + fmt(t), verify_sandwich(model, n, t, CorrectionKind::kDelta));
    }
    if (model.single_terminal() && model.states() <= kMaxCycleStates) {
      record("delta_inf n=" + std::to_string(n), verify_sandwich(model, n, 0.0, CorrectionKind::kDeltaInf));
    }
  }
  if (!model.single_terminal() && check_assumption(model, Assumption::kA2).holds) {
    for (int n : {6, 8}) {
      if (!fits(n)) continue;
      for (double t : {-0.5, 0.3, 1.0}) {
        record("xi n=" + std::to_string(n) + " theta=" + fmt(t), verify_sandwich(model, n, t, CorrectionKind::kXi));
        for (double tp : {0.0, 0.5}) {
          record("zeta n=" + std::to_string(n) + " theta=" + fmt(t) + " theta'=" + fmt(tp),
                 verify_sandwich(model, n, t, CorrectionKind::kZeta, tp));
        }
      }
    }
  }
  // Two-universality of the Toeplitz family at n=6, m=2.
  {
    const int n = 6, m = 2;
    const uint64_t seeds = uint64_t{1} << (n + m - 1);
    double worst = 0.0;
    for (uint64_t d = 1; d < (uint64_t{1} << n); ++d) {
      uint64_t collide = 0;
      for (uint64_t s = 0; s < seeds; ++s)
        if (ToeplitzHash(toeplitz_from_index(n, m, s)).apply_word(d) == 0) ++collide;
      worst = std::max(worst, static_cast<double>(collide) / seeds);
    }
    const bool ok = worst <= 1.0 / (1 << m) + 1e-15;
    checks.push_back({{"check", "toeplitz two-universality n=6 m=2"}, {"holds", ok}, {"max_collision", worst}});
    all = all && ok;
  }
  json j = {{"all_pass", all}, {"checks", checks}};
  out << j.dump(2) << "\n";
  return all ? kExitOk : kExitVerifyFailed;
}

}  // namespace

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(spec);
    for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(std::stod(tok));
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
      throw MalformedDocument("grid must be start:stop:step with step > 0");
    }
    const int count = static_cast<int>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    for (int i = 0; i <= count; ++i) out.push_back(parts[0] + i * parts[2]);
  } else {
    std::stringstream ss(spec);
    for (std::string tok; std::getline(ss, tok, ',');) out.push_back(std::stod(tok));
  }
  if (out.empty()) throw MalformedDocument("empty grid");
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-length bounds for random number generation from Markov sources"};
  app.require_subcommand(1);
  bool bits = false;
  app.add_flag("--bits", bits, "Report entropies, rates and exponents in bits");

  SpectrumOpts so;
  auto* spectrum = app.add_subcommand("spectrum", "Renyi entropy rates over a theta grid");
  spectrum->add_option("--model", so.model, "Model JSON")->required();
  spectrum->add_option("--theta-grid", so.grid, "start:stop:step or comma list");
  spectrum->add_option("--format", so.format)->check(CLI::IsMember({"csv", "json"}));
  spectrum->add_option("--out", so.out);

  std::string assumptions_model;
  auto* assumptions = app.add_subcommand("assumptions", "Check assumptions A1 and A2");
  assumptions->add_option("--model", assumptions_model)->required();

  BoundOpts bo;
  auto* bound = app.add_subcommand("bound", "Evaluate one bound");
  bound->add_option("--model", bo.model);
  bound->add_option("--n", bo.n);
  bound->add_option("--rate", bo.rate, "Rate in nats per symbol");
  bound->add_option("--log2M", bo.log2m, "log2 of the output size");
  bound->add_option("--epsilon", bo.epsilon);
  bound->add_option("--theorem", bo.theorem);
  bound->add_option("--theta", bo.theta, "Fixed theta for RER/MMIR bounds");
  bound->add_option("--nu", bo.nu);
  bound->add_option("--dist", bo.dist, "Explicit distribution for single-shot kinds");
  bound->add_option("--M", bo.M, "Output size for single-shot kinds");
  bound->add_option("--kind", bo.kind, "Single-shot bound kind");
  bound->add_option("--format", bo.format)->check(CLI::IsMember({"csv", "json"}));
  bound->add_option("--out", bo.out);

  SweepOpts wo;
  auto* sweep = app.add_subcommand("sweep", "Rate versus -log10 epsilon for each theorem");
  sweep->add_option("--model", wo.model)->required();
  sweep->add_option("--n", wo.n);
  sweep->add_option("--eps-min", wo.eps_min, "Smallest -log10 epsilon");
  sweep->add_option("--eps-max", wo.eps_max, "Largest -log10 epsilon");
  sweep->add_option("--eps-step", wo.eps_step);
  sweep->add_option("--theorems", wo.theorems, "Comma-separated theorem names");
  sweep->add_option("--out", wo.out);

  AsymptoticOpts ao;
  auto* asym = app.add_subcommand("asymptotic", "Asymptotic regime values");
  asym->add_option("--model", ao.model)->required();
  asym->add_option("--regime", ao.regime);
  asym->add_option("--rate", ao.R);
  asym->add_option("--delta", ao.delta);
  asym->add_option("--n", ao.n);
  asym->add_option("--epsilon", ao.epsilon);
  asym->add_option("--source", ao.source);

  ExtractOpts eo;
  auto* extract = app.add_subcommand("extract", "Toeplitz hashing of a bit stream");
  extract->add_option("--model", eo.model);
  extract->add_option("--input", eo.input, "Packed little-endian bit file");
  extract->add_option("--n", eo.n, "Input bits per block")->required();
  extract->add_option("--m", eo.m, "Output bits per block")->required();
  extract->add_option("--seed-hex", eo.seed_hex);
  extract->add_option("--audit", eo.audit);
  extract->add_option("--blocks", eo.blocks, "Blocks to sample with --model");
  extract->add_option("--sample-seed", eo.sample_seed);
  extract->add_option("--out", eo.out);

  std::string verify_model;
  auto* verify = app.add_subcommand("verify", "Exact oracle checks");
  verify->add_option("--model", verify_model);

  std::vector<std::string> argv_store = {"markovrng"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitValidation;
  }

  const Units u{bits};
  try {
    if (spectrum->parsed()) return cmd_spectrum(so, u, out);
    if (assumptions->parsed()) return cmd_assumptions(assumptions_model, out);
    if (bound->parsed()) return cmd_bound(bo, u, out);
    if (sweep->parsed()) return cmd_sweep(wo, u, out);
    if (asym->parsed()) return cmd_asymptotic(ao, u, out);
    if (extract->parsed()) return cmd_extract(eo, out);
    if (verify->parsed()) return cmd_verify(verify_model, out);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.is_infeasible() ? kExitInfeasible : kExitValidation;
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace markovrng
