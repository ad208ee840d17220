// Command-line front end: analyze / curve / interval / simulate / calibrate.
// JSON summaries go to --out PREFIX.json (stdout when --out is omitted);
// tabular side files go to PREFIX_*.csv.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "extsens/analysis.hpp"
#include "extsens/exact_binary.hpp"
#include "extsens/io.hpp"
#include "extsens/oracle.hpp"
#include "extsens/qp.hpp"
#include "extsens/simulation.hpp"

using nlohmann::json;
using namespace extsens;

namespace {

constexpr int kSchemaVersion = 1;

struct CommonOpts {
  std::string input;
  std::string out;
  double gamma = 1.0;
  double gammabar = 1.0;
  double alpha = 0.05;
  double beta = -1.0;  // default alpha/10
  std::string side = "greater";
  std::string frame = "super";
  std::string set;  // defaults to clt, or sample under --frame sample
  std::string stat = "dim";
  std::string hypothesis = "sharp";
  double tau = 1.0;
  bool adjust = false;
  bool oracle = false;
  unsigned threads = 1;

  void resolve_set() {
    if (set.empty()) set = frame == "sample" ? "sample" : "clt";
  }
};

Side parse_side(const std::string& s) {
  if (s == "greater") return Side::greater;
  if (s == "less") return Side::less;
  if (s == "two") return Side::two_sided;
  throw ValidationError("cli_side", "side must be greater, less, or two");
}

InferenceFrame parse_frame(const std::string& s) {
  if (s == "super") return InferenceFrame::superpopulation;
  if (s == "sample") return InferenceFrame::study_population;
  throw ValidationError("cli_frame", "frame must be super or sample");
}

UncertaintyKind parse_set(const std::string& s) {
  if (s == "clt") return UncertaintyKind::clt;
  if (s == "hoeffding") return UncertaintyKind::hoeffding;
  if (s == "bennett") return UncertaintyKind::bennett;
  if (s == "sample") return UncertaintyKind::sample;
  throw ValidationError("cli_set", "set must be clt, hoeffding, bennett, or sample");
}

StatisticKind parse_stat(const std::string& s) {
  if (s == "dim") return StatisticKind::difference_in_means;
  if (s == "wsr") return StatisticKind::wilcoxon_signed_rank;
  if (s == "mcnemar") return StatisticKind::mcnemar;
  throw ValidationError("cli_stat", "stat must be dim, wsr, or mcnemar");
}

HypothesisModel parse_hypothesis(const std::string& s, double tau) {
  if (s == "sharp") return HypothesisModel::fisher();
  if (s == "additive") return HypothesisModel::additive(tau);
  if (s == "multiplicative") return HypothesisModel::multiplicative(tau);
  throw ValidationError("cli_hypothesis",
                        "hypothesis must be sharp, additive, or multiplicative");
}

SensitivityBudget budget_from(const CommonOpts& o) {
  SensitivityBudget b;
  b.gamma = o.gamma;
  b.gammabar = o.gammabar;
  b.alpha = o.alpha;
  b.beta = o.beta < 0.0 ? o.alpha / 10.0 : o.beta;
  b.side = parse_side(o.side);
  b.frame = parse_frame(o.frame);
  if (b.frame == InferenceFrame::study_population) b.beta = 0.005;  // unused
  return b;
}

json budget_json(const SensitivityBudget& b, const CommonOpts& o) {
  return json{{"gamma", std::isinf(b.gamma) ? json("inf") : json(b.gamma)},
              {"gammabar", b.gammabar},
              {"alpha", b.alpha},
              {"beta", b.effective_beta()},
              {"side", o.side},
              {"frame", o.frame},
              {"set", o.set}};
}

void emit(const json& summary, const std::string& out_prefix) {
  if (out_prefix.empty()) {
    std::cout << summary.dump(2) << std::endl;
  } else {
    std::ofstream f(out_prefix + ".json");
    if (!f) throw ValidationError("file_open", "cannot write " + out_prefix + ".json");
    f << summary.dump(2) << std::endl;
  }
}

std::vector<PairRecord> load_pairs(const CommonOpts& o) {
  return io::parse_paired_records(io::read_csv_file(o.input));
}

PairedSample scored_sample(const std::vector<PairRecord>& records,
                           const CommonOpts& o) {
  PairedSample s = build_scores(records, parse_hypothesis(o.hypothesis, o.tau),
                                parse_stat(o.stat));
  if (o.adjust) {
    auto rows = covariate_rows(s);
    if (rows.empty() || rows.front().empty())
      throw ValidationError("cli_adjust",
                            "--adjust needs x_s covariate columns");
    s = adjust_scores(s, rows);
  }
  return s;
}

int cmd_analyze(const CommonOpts& o) {
  auto records = load_pairs(o);
  SensitivityBudget budget = budget_from(o);
  UncertaintySetSpec spec{parse_set(o.set), records.size()};

  json out{{"schema_version", kSchemaVersion},
           {"command", "analyze"},
           {"budget", budget_json(budget, o)},
           {"pairs", records.size()},
           {"statistic", o.stat}};

  bool binary = true;
  for (const auto& p : records)
    binary &= (p.r[0] == 0.0 || p.r[0] == 1.0) && (p.r[1] == 0.0 || p.r[1] == 1.0);

  if (parse_stat(o.stat) == StatisticKind::mcnemar && binary) {
    McNemarSummary summary = summarize_mcnemar(records);
    McNemarResult res = mcnemar_pvalue(summary, budget, spec);
    out["path"] = res.qp_fallback ? "qp_fallback" : "exact_binomial";
    out["discordant"] = summary.discordant;
    out["concordant"] = summary.concordant;
    out["t_obs"] = summary.t_obs;
    out["pi_d"] = res.pi_d;
    out["p_beta"] = res.p_beta;
    out["reject"] = res.p_beta <= budget.alpha;
    out["warnings"] = res.warnings;
    if (summary.discordant > 0)
      out["crossover_gammabar"] =
          crossover_gammabar(summary.discordant, summary.concordant, budget, spec);
    emit(out, o.out);
    return 0;
  }

  PairedSample s = scored_sample(records, o);
  AnalysisResult res = run_analysis(s, budget, spec);
  out["path"] = res.conventional_path ? "conventional" : "extended_qp";
  out["t_obs"] = s.t_obs;
  out["reject"] = res.rejected;
  out["p_beta"] = res.p_beta;
  out["deviate_sq"] = res.deviate_sq;
  out["objective"] = res.objective;
  out["kkt_residual"] = res.kkt_residual;
  out["hajek_ratio"] = res.hajek_ratio;
  out["worst_mean"] = res.worst_mean;
  out["guard_ok"] = res.guard_ok;
  out["rejects_at_identity"] = res.rejects_at_identity;
  out["warnings"] = res.warnings;

  if (o.oracle) {
    json oracle_out;
    OrientedSample oriented = orient_for_test(s, budget.side);
    if (!res.conventional_path && s.size() <= 10) {
      auto grid = oracle::grid_search_min_deviate(oriented, budget, spec, 0.01);
      oracle_out["grid_objective"] = grid.objective;
      oracle_out["grid_points"] = grid.evaluated;
    }
    if (s.size() <= 16 && !res.worst_pi.empty()) {
      // exact tail of the randomization distribution at the worst-case
      // allocation, for comparison with the normal-approximation bound
      oracle_out["exact_tail_at_worst_pi"] = oracle::exact_tail(
          oriented.sample, res.worst_pi, oriented.sample.t_obs);
    }
    if (oracle_out.empty())
      out["oracle"] = "input too large for the brute-force oracles";
    else
      out["oracle"] = oracle_out;
  }

  if (!o.out.empty())
    io::write_csv_file(o.out + "_worst_pi.csv",
                       io::worst_pi_csv(records, res.worst_pi));
  emit(out, o.out);
  return 0;
}

int cmd_curve(const CommonOpts& o, const std::vector<double>& gamma_grid,
              double gammabar_cap) {
  auto records = load_pairs(o);
  CommonOpts oo = o;
  oo.gamma = 1.0;
  oo.gammabar = 1.0;
  SensitivityBudget proto = budget_from(oo);
  UncertaintySetSpec spec{parse_set(o.set), records.size()};
  PairedSample s = scored_sample(records, o);

  std::vector<double> grid = gamma_grid.empty() ? default_gamma_grid() : gamma_grid;
  SensitivityCurve curve =
      sensitivity_curve(s, proto, spec, grid, gammabar_cap, o.threads);

  json out{{"schema_version", kSchemaVersion},
           {"command", "curve"},
           {"budget", budget_json(proto, o)},
           {"gamma_star", curve.gamma_star},
           {"gammabar_limit", curve.gammabar_limit},
           {"points", json::array()}};
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const CurvePoint& p = curve.points[i];
    out["points"].push_back(
        {{"gamma", std::isinf(p.gamma) ? json("inf") : json(p.gamma)},
         {"gammabar_star", p.gammabar_star},
         {"saturated", p.saturated},
         {"no_reject", p.no_reject},
         {"scanned", p.scanned}});
  }
  if (!o.out.empty())
    io::write_csv_file(o.out + "_curve.csv", io::curve_csv(curve, grid));
  emit(out, o.out);
  return 0;
}

int cmd_interval(const CommonOpts& o, double tau_lo, double tau_hi) {
  auto records = load_pairs(o);
  SensitivityBudget budget = budget_from(o);
  budget.side = Side::two_sided;
  UncertaintySetSpec spec{parse_set(o.set), records.size()};
  HypothesisKind kind = parse_hypothesis(o.hypothesis, std::max(o.tau, 1e-6)).kind;

  TauBracket bracket;
  if (tau_lo < tau_hi) {
    bracket.provided = true;
    bool log_scale = kind == HypothesisKind::multiplicative;
    bracket.lo = log_scale ? std::log(tau_lo) : tau_lo;
    bracket.hi = log_scale ? std::log(tau_hi) : tau_hi;
  }
  SensitivityInterval iv = sensitivity_interval(
      records, parse_stat(o.stat), kind, budget, spec, bracket);

  json out{{"schema_version", kSchemaVersion},
           {"command", "interval"},
           {"budget", budget_json(budget, o)},
           {"hypothesis", o.hypothesis},
           {"log_scale", iv.log_scale},
           {"empty", iv.empty},
           {"lo", iv.lo},
           {"hi", iv.hi}};
  emit(out, o.out);
  return 0;
}

int cmd_simulate(const CommonOpts& o, const SimDesign& proto,
                 const std::string& model,
                 std::vector<double> gammas, std::vector<double> gammabars) {
  SimDesign design = proto;
  design.alpha = o.alpha;
  design.beta = o.beta < 0.0 ? o.alpha / 10.0 : o.beta;
  design.outcome = model == "biased" ? OutcomeModel::biased : OutcomeModel::unbiased;
  if (model != "biased" && model != "unbiased")
    throw ValidationError("cli_model", "model must be unbiased or biased");
  if (gammas.empty()) gammas = {1.0, 1.1, 1.25, 1.5, 2.0};
  if (gammabars.empty())
    gammabars = {1.0, 1.05, 1.1, 1.15, 1.2, 1.25, 1.3, 1.35,
                 1.4, 1.45, 1.5, 1.6, 1.7, 1.8, 1.9, 2.0};

  SimTable table = run_table(design, gammas, gammabars, parse_set(o.set), o.threads);

  json out{{"schema_version", kSchemaVersion},
           {"command", "simulate"},
           {"model", model},
           {"pairs", design.pairs},
           {"replicates", design.replicates},
           {"tau", design.tau},
           {"alpha", design.alpha},
           {"beta", design.beta},
           {"seed", design.seed},
           {"set", o.set},
           {"gammas", gammas},
           {"gammabars", gammabars}};
  json rates = json::array();
  for (const auto& row : table.rates) {
    json r = json::array();
    for (double v : row) r.push_back(std::isnan(v) ? json(nullptr) : json(v));
    rates.push_back(r);
  }
  out["rates"] = rates;
  if (!o.out.empty())
    io::write_csv_file(o.out + "_table.csv", io::sim_table_csv(table));
  emit(out, o.out);
  return 0;
}

int cmd_calibrate(const CommonOpts& o) {
  auto records = io::parse_calibration_records(io::read_csv_file(o.input));
  CalibrationFit fit = calibrate(records);
  json out{{"schema_version", kSchemaVersion},
           {"command", "calibrate"},
           {"pairs", records.size()},
           {"beta_z", fit.treatment.beta_z},
           {"beta_z_flat", fit.treatment.flat},
           {"beta_y", fit.outcome.beta},
           {"sigma2", fit.outcome.sigma2},
           {"gamma_hat",
            std::isinf(fit.gamma_hat) ? json("inf") : json(fit.gamma_hat)},
           {"gammabar_hat", fit.gammabar_hat}};
  if (!o.out.empty())
    io::write_csv_file(
        o.out + "_pairs.csv",
        io::calibration_pairs_csv(records, fit.pi_star,
                                  bias_odds_ratios(fit.pi_star)));
  emit(out, o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extended sensitivity analysis for paired observational studies"};
  app.require_subcommand(1);

  CommonOpts o;
  SimDesign sim;
  std::string sim_model = "unbiased";
  std::vector<double> gamma_grid, gammabar_grid;
  double gammabar_cap = 50.0, tau_lo = 0.0, tau_hi = 0.0;
  std::string gamma_str;

  auto add_common = [&](CLI::App* c, bool needs_input) {
    if (needs_input)
      c->add_option("--input", o.input, "input CSV path")->required();
    c->add_option("--out", o.out, "output prefix (JSON to stdout if omitted)");
    c->add_option("--alpha", o.alpha, "test level");
    c->add_option("--beta", o.beta, "uncertainty tail mass (default alpha/10)");
    c->add_option("--side", o.side, "greater, less, or two");
    c->add_option("--frame", o.frame, "super or sample");
    c->add_option("--set", o.set,
                  "clt, hoeffding, bennett, or sample (default clt, or "
                  "sample under --frame sample)");
    c->add_option("--threads", o.threads, "worker threads");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "one extended analysis");
  add_common(analyze, true);
  analyze->add_option("--gamma", gamma_str, "maximal bias bound (inf allowed)");
  analyze->add_option("--gammabar", o.gammabar, "typical bias bound");
  analyze->add_option("--stat", o.stat, "dim, wsr, or mcnemar");
  analyze->add_option("--hypothesis", o.hypothesis, "sharp, additive, multiplicative");
  analyze->add_option("--tau", o.tau, "hypothesized effect");
  analyze->add_flag("--adjust", o.adjust, "project scores off x_s covariates");
  analyze->add_flag("--oracle", o.oracle, "attach brute-force cross-checks");

  CLI::App* curve = app.add_subcommand("curve", "rejection frontier over (gamma, gammabar)");
  add_common(curve, true);
  curve->add_option("--stat", o.stat, "dim, wsr, or mcnemar");
  curve->add_option("--hypothesis", o.hypothesis, "sharp, additive, multiplicative");
  curve->add_option("--tau", o.tau, "hypothesized effect");
  curve->add_flag("--adjust", o.adjust, "project scores off x_s covariates");
  curve->add_option("--gamma-grid", gamma_grid, "explicit gamma grid");
  curve->add_option("--gammabar-cap", gammabar_cap, "upper cap for the frontier search");

  CLI::App* interval = app.add_subcommand("interval", "sensitivity interval for tau");
  add_common(interval, true);
  interval->add_option("--gamma", gamma_str, "maximal bias bound (inf allowed)");
  interval->add_option("--gammabar", o.gammabar, "typical bias bound");
  interval->add_option("--stat", o.stat, "dim or wsr");
  interval->add_option("--hypothesis", o.hypothesis, "additive or multiplicative")
      ->required();
  interval->add_option("--tau-lo", tau_lo, "bracket lower end (tau scale)");
  interval->add_option("--tau-hi", tau_hi, "bracket upper end (tau scale)");

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo level/power table");
  add_common(simulate, false);
  simulate->add_option("--model", sim_model, "unbiased or biased");
  simulate->add_option("--I", sim.pairs, "pairs per replicate");
  simulate->add_option("--nsim", sim.replicates, "replicates per cell");
  simulate->add_option("--tau", sim.tau, "true effect");
  simulate->add_option("--seed", sim.seed, "stream seed");
  simulate->add_option("--gamma-grid", gamma_grid, "gamma grid");
  simulate->add_option("--gammabar-grid", gammabar_grid, "gammabar grid");

  CLI::App* calibrate_cmd = app.add_subcommand("calibrate", "estimate (gamma, gammabar)");
  calibrate_cmd->add_option("--input", o.input, "long-format CSV")->required();
  calibrate_cmd->add_option("--out", o.out, "output prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    o.resolve_set();
    if (!gamma_str.empty())
      o.gamma = gamma_str == "inf" ? kInf : io::parse_double(gamma_str, "gamma");
    if (analyze->parsed()) return cmd_analyze(o);
    if (curve->parsed()) return cmd_curve(o, gamma_grid, gammabar_cap);
    if (interval->parsed()) return cmd_interval(o, tau_lo, tau_hi);
    if (simulate->parsed())
      return cmd_simulate(o, sim, sim_model, gamma_grid, gammabar_grid);
    if (calibrate_cmd->parsed()) return cmd_calibrate(o);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << " (residual " << e.residual() << ")"
              << std::endl;
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 3;
  }
  return 2;
}
