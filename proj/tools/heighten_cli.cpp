#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "heighten/io.hpp"
#include "heighten/pipeline.hpp"

using namespace heighten;

namespace {

pipeline::RunConfig configure(const std::string& path, std::optional<std::uint64_t> seed,
                              const std::string& output) {
  auto c = pipeline::load_config(path);
  if (seed) {
    c.mcmc_seed = c.sow_seed = c.sweep_seed = c.sensitivity_seed = *seed;
    c.mcmc.seed = *seed;
  }
  if (!output.empty()) c.output_dir = std::filesystem::absolute(output);
  c.raw = pipeline::config_json(c);
  return c;
}

void print_analysis(const pipeline::HouseAnalysis& an) {
  const double v = an.house.value;
  fmt::print("{:<22}{:>7}{:>10}{:>10}{:>8}{:>8}{:>8}\n", "strategy", "h_ft", "upfront/V", "total/V", "BCR", "rel",
             "robust");
  for (const auto& s : an.strategies)
    fmt::print("{:<22}{:>7.1f}{:>10.3f}{:>10.3f}{:>8.2f}{:>8.3f}{:>8.3f}\n", s.name, s.h, s.result.upfront / v,
               s.result.total.mean / v, s.result.bcr_mean, s.result.rel_mean, s.robustness.joint);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flood-risk house elevation decision engine"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config = "config/default.json";
  std::optional<std::uint64_t> seed;
  std::string output;
  bool with_deps = false;
  app.add_option("-c,--config", config, "run configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "override every seed in the config");
  app.add_option("-o,--output", output, "override the output directory");
  app.add_flag("--with-deps", with_deps, "run missing or stale upstream stages");

  auto* ingest = app.add_subcommand("ingest", "discharge records -> annual maximum water levels");
  auto* fit_hazard = app.add_subcommand("fit-hazard", "Bayesian GEV fit by MCMC");
  auto* fit_discount = app.add_subcommand("fit-discount", "fit the three AR(3) discount-rate models");
  auto* analyze = app.add_subcommand("analyze", "objectives, optima and strategies for the configured house");
  auto* sweep = app.add_subcommand("sweep", "optimal elevations over the hypothetical house pool");
  auto* sens = app.add_subcommand("sensitivity", "Sobol indices of lifetime expected damages");
  std::string variant = "scenario", scenario = "HAZUS+BackgroundTrend";
  sens->add_option("--variant", variant, "scenario | deep | fixed-rate | exposure | ishigami")
      ->check(CLI::IsMember({"scenario", "deep", "fixed-rate", "exposure", "ishigami"}));
  sens->add_option("--scenario", scenario, "e.g. HAZUS+BackgroundTrend, or all");
  auto* rob = app.add_subcommand("robustness", "satisficing robustness and trade-off front");
  auto* plots = app.add_subcommand("export-plots", "plot-ready CSV files");

  CLI11_PARSE(app, argc, argv);

  try {
    pipeline::Pipeline p(configure(config, seed, output));
    p.set_run_dependencies(with_deps);
    auto report = [&](const char* rel) {
      return nlohmann::json::parse(io::read_file(p.output_dir() / rel));
    };
    if (*ingest) {
      p.ingest();
      const auto r = report("ingest/report.json");
      fmt::print("annual maxima {}-{}: {} years used, {} excluded below coverage {}\n", r["first_year"].get<int>(),
                 r["last_year"].get<int>(), r["years_used"].get<int>(), r["excluded_years"].size(),
                 r["min_coverage"].get<double>());
    } else if (*fit_hazard) {
      p.fit_hazard();
      const auto r = report("hazard/summary.json");
      const auto m = report("hazard/posterior.json");
      fmt::print("posterior: {} samples, acceptance {:.3f}; MAP mu={:.3f} sigma={:.3f} xi={:.4f}; BFE {:.2f} ft\n",
                 m["n_samples"].get<int>(), m["acceptance_rate"].get<double>(), r["map"]["mu"].get<double>(),
                 r["map"]["sigma"].get<double>(), r["map"]["xi"].get<double>(), r["bfe"].get<double>());
      for (const auto& w : m["warnings"]) fmt::print("warning: {}\n", w.get<std::string>());
    } else if (*fit_discount) {
      p.fit_discount();
      fmt::print("{}", io::read_file(p.output_dir() / "discount/selection.csv"));
    } else if (*analyze) {
      print_analysis(p.analyze());
    } else if (*sweep) {
      const auto r = p.sweep();
      fmt::print("houses {}: optimum above FEMA {:.3f}, zero optimum {:.3f}, FEMA passes CB {:.3f}\n",
                 r.summary.houses, r.summary.share_above_fema, r.summary.share_zero_optimal,
                 r.summary.share_fema_passes_cb);
    } else if (*sens) {
      for (const auto& f : p.sensitivity(variant, scenario)) fmt::print("{}\n", f.string());
    } else if (*rob) {
      p.robustness();
      fmt::print("{}\n", (p.output_dir() / "robustness").string());
    } else if (*plots) {
      p.export_plots();
      fmt::print("{}\n", (p.output_dir() / "plots").string());
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
