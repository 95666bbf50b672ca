// Command-line front end: ingestion -> fitting -> GLM -> mixing diagnostics,
// emitting the report tables as TSV (or JSON with --format json).
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "hgmix/dataio.hpp"
#include "hgmix/mixfit.hpp"
#include "hgmix/properties.hpp"
#include "hgmix/reports.hpp"

namespace {

using namespace hgmix;

struct RunConfig {
  std::string data_path;
  std::string out_dir = ".";
  std::string format = "tsv";
};

std::string default_data_path() {
  if (const char* env = std::getenv("HGMIX_DATA")) return env;
  return "data/motorins.tsv";
}

ParseResult load(const RunConfig& cfg) {
  ParseResult res = parse_dataset(cfg.data_path);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
  return res;
}

void ensure_out_dir(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
}

int cmd_summarize(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  const ParseResult data = load(cfg);
  const CountSample claims = claims_sample(data.records);
  std::vector<double> claim_values(claims.counts.begin(), claims.counts.end());
  const std::vector<double> exposures = exposure_values(data.records);

  Table summary;
  summary.name = "summary";
  summary.header = {"variable", "n", "min", "max", "mean", "sd", "skewness", "kurtosis"};
  for (const auto& [label, values] : {std::pair{std::string("claims"), claim_values},
                                      std::pair{std::string("exposure"), exposures}}) {
    const SummaryStats s = summary_stats(values);
    summary.add_row({label, std::to_string(s.n), format_full(s.min), format_full(s.max),
                     format_full(s.mean), format_full(s.sd), format_full(s.skewness),
                     format_full(s.kurtosis)});
    std::cout << label << ": n=" << s.n << " min=" << format_fixed(s.min, 2)
              << " max=" << format_fixed(s.max, 2) << " mean=" << format_fixed(s.mean, 2)
              << " sd=" << format_fixed(s.sd, 2) << " skew=" << format_fixed(s.skewness, 2)
              << " kurt=" << format_fixed(s.kurtosis, 2) << "\n";
  }
  write_table(summary, cfg.out_dir, cfg.format);

  Table hist;
  hist.name = "histogram";
  hist.header = {"variable", "bin_lo", "bin_hi", "count"};
  for (const auto& b : empirical_histogram(claim_values, {true, 0}))
    hist.add_row({"claims", format_full(b.lo), format_full(b.hi), std::to_string(b.count)});
  for (const auto& b : empirical_histogram(exposures, {false, 50}))
    hist.add_row({"exposure", format_full(b.lo), format_full(b.hi), std::to_string(b.count)});
  write_table(hist, cfg.out_dir, cfg.format);

  Table hazard;
  hazard.name = "hazard";
  hazard.header = {"x", "count_at", "count_at_least", "hazard"};
  for (const auto& h : empirical_hazard(claims))
    hazard.add_row({std::to_string(h.x), std::to_string(h.at_value),
                    std::to_string(h.at_least), format_full(h.hazard)});
  write_table(hazard, cfg.out_dir, cfg.format);
  return 0;
}

int cmd_fit(const RunConfig& cfg, std::vector<std::string> families) {
  ensure_out_dir(cfg);
  const ParseResult data = load(cfg);
  const CountSample claims = claims_sample(data.records);
  if (families.empty()) families = hg_family_names();

  Table fits, gof;
  fits.name = "fits";
  fits.header = {"family", "a", "b", "c", "d", "se_a", "se_b", "se_c", "se_d",
                 "loglik", "aic", "bic", "status"};
  gof.name = "gof";
  gof.header = {"family", "statistic", "cells", "df", "p_value", "aic", "bic"};

  int successes = 0;
  for (const auto& fam : families) {
    FitResult fit;
    try {
      fit = mle_fit(fam, claims);
    } catch (const std::exception& e) {
      fits.add_row({fam, "", "", "", "", "", "", "", "", "", "", "", e.what()});
      continue;
    }
    std::vector<std::string> row{fam};
    for (int i = 0; i < 4; ++i)
      row.push_back(i < static_cast<int>(fit.estimates.size()) && fit.converged
                        ? format_full(fit.estimates[i])
                        : "");
    for (int i = 0; i < 4; ++i)
      row.push_back(i < static_cast<int>(fit.std_errors.size()) ? format_full(fit.std_errors[i])
                                                                : "");
    if (fit.converged) {
      row.push_back(format_full(fit.log_likelihood));
      row.push_back(format_full(fit.aic));
      row.push_back(format_full(fit.bic));
      row.push_back("converged");
      ++successes;
    } else {
      row.push_back("");
      row.push_back("");
      row.push_back("");
      row.push_back(fit.boundary_flag ? "no interior maximum" : "did not converge");
    }
    fits.add_row(row);
    std::cout << fam << ": "
              << (fit.converged ? "loglik " + format_fixed(fit.log_likelihood, 2)
                                : "fails to converge")
              << "\n";

    if (fit.converged) {
      try {
        const GofReport rep = chisq_gof(make_count_model(fam, fit.estimates), claims);
        const bool rejected = rep.p_value < 0.05;
        gof.add_row({fam, format_full(rep.statistic), std::to_string(rep.cells.size()),
                     std::to_string(rep.df), format_full(rep.p_value),
                     rejected ? "" : format_full(fit.aic), rejected ? "" : format_full(fit.bic)});
      } catch (const std::exception& e) {
        gof.add_row({fam, "", "", "", "", "", std::string("error: ") + e.what()});
      }
    }
  }
  write_table(fits, cfg.out_dir, cfg.format);
  write_table(gof, cfg.out_dir, cfg.format);
  return successes > 0 ? 0 : 1;
}

int cmd_glm(const RunConfig& cfg, const std::string& model) {
  ensure_out_dir(cfg);
  const ParseResult data = load(cfg);
  const bool model_two = model == "II";

  GLMFit fit;
  try {
    fit = model_two ? fit_negbin(data.records) : fit_poisson(data.records);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  Table coef;
  coef.name = "coefficients";
  coef.header = {"parameter", "estimate", "std_error", "z_value"};
  if (fit.r_hat)
    coef.add_row({"r", format_full(*fit.r_hat), format_full(fit.r_se.value_or(0.0)),
                  format_full(fit.r_z.value_or(0.0))});
  for (long j = 0; j < fit.beta.size(); ++j)
    coef.add_row({fit.coef_names[j] == "Intercept" ? "beta0" : fit.coef_names[j],
                  format_full(fit.beta(j)), format_full(fit.se(j)), format_full(fit.z(j))});
  write_table(coef, cfg.out_dir, cfg.format);

  Table stats;
  stats.name = "fitstats";
  stats.header = {"family", "loglik", "deviance", "df", "p_value"};
  stats.add_row({fit.family, format_full(fit.log_likelihood), format_full(fit.deviance),
                 std::to_string(fit.df), format_full(fit.deviance_p)});
  write_table(stats, cfg.out_dir, cfg.format);

  const MixingSample sample = derive_mixing_sample(
      fit, model_two ? MixingSample::Kind::p : MixingSample::Kind::lambda);
  Table mix;
  mix.name = "mixing_sample";
  mix.header = {model_two ? "p_hat" : "lambda_hat"};
  for (double v : sample.values) mix.add_row({format_full(v)});
  write_table(mix, cfg.out_dir, cfg.format);

  std::cout << fit.family << ": loglik " << format_fixed(fit.log_likelihood, 2) << ", deviance "
            << format_fixed(fit.deviance, 2) << " on " << fit.df << " df (p "
            << format_fixed(fit.deviance_p, 4) << ")";
  if (fit.r_hat) std::cout << ", r " << format_fixed(*fit.r_hat, 4);
  std::cout << "\n";
  return 0;
}

int cmd_mixfit(const RunConfig& cfg, std::vector<std::string> families, const std::string& kind,
               double r_value, bool r_given) {
  ensure_out_dir(cfg);
  const bool is_p = kind == "p";
  if (is_p && !r_given) {
    std::cerr << "error: --kind p requires --r <value>\n";
    return 2;
  }
  const ParseResult data = load(cfg);
  const GLMFit glm = is_p ? fit_negbin(data.records) : fit_poisson(data.records);
  MixingSample sample =
      derive_mixing_sample(glm, is_p ? MixingSample::Kind::p : MixingSample::Kind::lambda);
  if (is_p) sample.r_hat = r_value;

  if (families.empty()) families = {"HGZY", "GZY", "Waring"};

  Table fits, gof;
  fits.name = "mixfits";
  fits.header = {"family", "kind", "a", "b", "c", "d", "se_a", "se_b", "se_c", "se_d", "loglik"};
  gof.name = "mixgof";
  gof.header = {"family", "kind", "statistic", "cells", "df", "p_value", "aic", "bic"};

  for (const auto& fam : families) {
    MixingTarget target;
    target.family = fam;
    target.kind = is_p ? MixingSample::Kind::p : MixingSample::Kind::lambda;
    if (is_p) target.r_hat = r_value;
    FitResult fit;
    try {
      fit = fit_mixing(sample, target);
    } catch (const std::exception& e) {
      fits.add_row({fam, kind, "", "", "", "", "", "", "", "", std::string("error: ") + e.what()});
      continue;
    }
    std::vector<std::string> row{fam, kind};
    for (int i = 0; i < 4; ++i)
      row.push_back(i < static_cast<int>(fit.estimates.size()) ? format_full(fit.estimates[i])
                                                               : "");
    for (int i = 0; i < 4; ++i)
      row.push_back(i < static_cast<int>(fit.std_errors.size()) ? format_full(fit.std_errors[i])
                                                                : "");
    row.push_back(format_full(fit.log_likelihood));
    fits.add_row(row);
    std::cout << fam << " (" << kind << "): loglik " << format_fixed(fit.log_likelihood, 2)
              << "\n";

    try {
      const GofReport rep = interval_chisq(sample, target, fit);
      gof.add_row({fam, kind, format_full(rep.statistic), std::to_string(rep.cells.size()),
                   std::to_string(rep.df), format_full(rep.p_value), format_full(fit.aic),
                   format_full(fit.bic)});
    } catch (const std::exception& e) {
      gof.add_row({fam, kind, "", "", "", "", "", std::string("error: ") + e.what()});
    }
  }
  write_table(fits, cfg.out_dir, cfg.format);
  write_table(gof, cfg.out_dir, cfg.format);
  return 0;
}

int cmd_verify(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  const auto results = run_property_suite();
  Table t;
  t.name = "properties";
  t.header = {"property", "status", "measured", "threshold", "detail"};
  bool all = true;
  for (const auto& r : results) {
    t.add_row({r.name, r.passed ? "pass" : "FAIL", format_full(r.measured),
               format_full(r.threshold), r.detail});
    std::cout << (r.passed ? "pass  " : "FAIL  ") << r.name << " (" << r.measured << " vs "
              << r.threshold << ")\n";
    all = all && r.passed;
  }
  write_table(t, cfg.out_dir, cfg.format);
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heavy-tailed count mixtures: fitting and diagnostics"};
  app.require_subcommand(1);

  RunConfig cfg;
  cfg.data_path = default_data_path();
  app.add_option("--data", cfg.data_path, "dataset path (or HGMIX_DATA env var)");
  app.add_option("--out", cfg.out_dir, "output directory");
  app.add_option("--format", cfg.format, "output format")
      ->check(CLI::IsMember({"tsv", "json"}));

  auto* summarize = app.add_subcommand("summarize", "summary statistics, histogram, hazard");
  summarize->fallthrough();

  std::vector<std::string> families;
  auto* fit = app.add_subcommand("fit", "maximum-likelihood fits + chi-square GoF");
  fit->fallthrough();
  fit->add_option("--families", families, "subset of families to fit")->delimiter(',');

  std::string model = "I";
  auto* glm = app.add_subcommand("glm", "Poisson / Negative Binomial regression");
  glm->fallthrough();
  glm->add_option("--model", model, "I (Poisson) or II (Negative Binomial)")
      ->check(CLI::IsMember({"I", "II"}));

  std::string kind = "lambda";
  double r_value = 0.0;
  auto* mixfit_cmd = app.add_subcommand("mixfit", "fit theoretical mixing densities");
  mixfit_cmd->fallthrough();
  std::vector<std::string> mix_families;
  mixfit_cmd->add_option("--families", mix_families, "Waring, GZY, HGZY")->delimiter(',');
  mixfit_cmd->add_option("--kind", kind, "lambda or p")->check(CLI::IsMember({"lambda", "p"}));
  auto* r_opt = mixfit_cmd->add_option("--r", r_value, "fixed r for --kind p");

  auto* verify = app.add_subcommand("verify", "run the cross-module property suite");
  verify->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (summarize->parsed()) return cmd_summarize(cfg);
    if (fit->parsed()) return cmd_fit(cfg, families);
    if (glm->parsed()) return cmd_glm(cfg, model);
    if (mixfit_cmd->parsed()) return cmd_mixfit(cfg, mix_families, kind, r_value, !r_opt->empty());
    if (verify->parsed()) return cmd_verify(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
