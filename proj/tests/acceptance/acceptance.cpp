// Runs the full pipeline on the shipped data and checks every headline
// criterion. Prints one PASS/FAIL line per criterion. The exit status is
// non-zero only when the run itself breaks; a FAIL line is a measured result.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "heighten/io.hpp"
#include "heighten/pipeline.hpp"
#include "support.hpp"

using namespace heighten;
using pipeline::Pipeline;

namespace {

struct Check {
  bool pass = true;
  std::vector<std::string> parts;

  void in(const std::string& what, double v, double lo, double hi) {
    add(what, v >= lo && v <= hi, fmt::format("{}={:.4g} in [{}, {}]", what, v, lo, hi));
  }
  void add(const std::string& /*what*/, bool ok, const std::string& text) {
    pass = pass && ok;
    parts.push_back((ok ? "" : "!") + text);
  }
};

struct Row {
  std::string name;
  Check check;
  double seconds;
};

std::vector<Row> rows;
std::string transcript;

void report(const std::string& name, const Check& c, double seconds) {
  rows.push_back({name, c, seconds});
  std::string detail;
  for (const auto& p : c.parts) detail += (detail.empty() ? "" : "; ") + p;
  const auto line = fmt::format("{}  {:<28} {:7.1f}s  {}\n", c.pass ? "PASS" : "FAIL", name, seconds, detail);
  transcript += line;
  std::fputs(line.c_str(), stdout);
  std::fflush(stdout);
}

template <class F>
double timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[std::filesystem::relative(e.path(), dir).string()] = io::read_file(e.path());
  return files;
}

bool is_gev(const std::string& f) { return f == "mu" || f == "sigma" || f == "xi"; }

std::size_t top(const std::vector<double>& v) { return std::max_element(v.begin(), v.end()) - v.begin(); }

}  // namespace

int main() {
  try {
    support::TempDir dir("acceptance");
    const auto cfg = support::default_config(dir.path);
    Pipeline p(cfg);

    {
      Check c;
      const auto cost = pipeline::load_cost_model(cfg);
      double v = 0;
      const double s = timed([&] { v = exposure::elevation_cost(cost, 1500, 5.5); });
      c.add("cost", std::abs(v - 144495) < 0.5, fmt::format("cost(1500 sqft, 5.5 ft)={:.2f} == 144495", v));
      c.add("paper", std::abs(v - 145000) <= 1000, "within 1000 of 145000");
      report("cost model", c, s);
    }

    {
      Check c;
      std::vector<discount::Ar3Model> m;
      const double s = timed([&] {
        p.fit_discount();
        const auto series = discount::parse_discount_csv(io::read_file(cfg.discount_series));
        for (auto kind : discount::kAllKinds) m.push_back(discount::fit_ar3(series, kind));
      });
      const auto& rw = m[static_cast<int>(discount::ModelKind::RandomWalk)];
      const auto& mr = m[static_cast<int>(discount::ModelKind::MeanReverting)];
      const auto& bt = m[static_cast<int>(discount::ModelKind::BackgroundTrend)];
      c.add("order", bt.aic < rw.aic && bt.aic < mr.aic,
            fmt::format("AIC BT={:.2f} < RW={:.2f}, MR={:.2f}", bt.aic, rw.aic, mr.aic));
      c.add("gap", std::abs(rw.aic - mr.aic) < 2, fmt::format("|RW-MR|={:.3f} < 2", std::abs(rw.aic - mr.aic)));
      c.add("eta", std::abs(bt.eta - 1.9289) <= 2 * bt.eta_se,
            fmt::format("intercept {:.4f} (se {:.4f}) vs 1.9289", bt.eta, bt.eta_se));
      c.add("beta", std::abs(bt.beta + 0.0058) <= 2 * bt.beta_se,
            fmt::format("trend {:.5f} (se {:.5f}) vs -0.0058", bt.beta, bt.beta_se));
      c.add("time", s < 10, fmt::format("{:.2f}s < 10s", s));
      report("discount model selection", c, s);
    }

    pipeline::Artifacts art;
    {
      Check c;
      const double s = timed([&] {
        p.ingest();
        p.fit_hazard();
        art = p.load_artifacts();
      });
      c.add("samples", art.posterior.size() == 50000, fmt::format("{} posterior samples", art.posterior.size()));
      for (double t : {100.0, 500.0}) {
        const auto r = hazard::return_level_summary(art.posterior, t);
        c.add("bias", r.mean_level > r.map_level,
              fmt::format("{:.0f}-yr mean {:.2f} > MAP {:.2f}", t, r.mean_level, r.map_level));
      }
      c.add("time", s < 300, fmt::format("{:.2f}s < 300s", s));
      report("hazard bias direction", c, s);
    }

    pipeline::HouseAnalysis an;
    {
      Check c;
      const double s = timed([&] { an = p.analyze(); });
      const double v = an.house.value;
      const auto& none = an.strategies[0].result;
      const auto& fema = an.strategies[1].result;
      const auto& ign = an.strategies[2];
      const auto& opt = an.strategies[3];
      c.in("h_opt", opt.h, 7.5, 10.0);
      c.in("total_opt", opt.result.total.mean / v, 0.50, 0.70);
      c.in("total_h0", none.total.mean / v, 0.58, 0.78);
      c.add("interval", none.total.q05 / v <= 0.25 && none.total.q95 / v >= 1.4,
            fmt::format("h0 90% [{:.3f}, {:.3f}] covers [0.25, 1.4]", none.total.q05 / v, none.total.q95 / v));
      c.in("bcr_opt", opt.result.bcr_mean, 1.0, 1.35);
      c.in("bcr_fema", fema.bcr_mean, 0.9, 1.2);
      c.in("rel_h0", none.rel_mean, 0.10, 0.22);
      c.in("rel_fema", fema.rel_mean, 0.50, 0.70);
      c.add("h_ign", ign.h == 0.0, fmt::format("ignoring h_opt={} == 0", ign.h));
      c.add("time", s < 600, fmt::format("{:.1f}s < 600s at {} SOWs", s, an.options.ensemble_size));
      report("sample house", c, s);
    }

    {
      Check c;
      double s = timed([&] { p.robustness(); });
      c.add("h0", an.strategies[0].robustness.joint == 0.0,
            fmt::format("joint(h=0)={} == 0", an.strategies[0].robustness.joint));
      c.in("joint_fema", an.strategies[1].robustness.joint, 0.07, 0.21);
      c.in("joint_opt", an.strategies[3].robustness.joint, 0.27, 0.47);
      double worst = 1;
      for (const auto& r : an.robustness)
        if (r.h >= 10 - 1e-9) worst = std::min(worst, r.reliability);
      c.add("rel", worst >= 0.8, fmt::format("min reliability satisficing for h>=10 {:.3f} >= 0.8", worst));
      report("robustness", c, s);
    }

    {
      Check c;
      pipeline::SweepResult res;
      const double s = timed([&] { res = p.sweep(); });
      const auto& m = res.summary;
      c.add("n", m.houses == 1000, fmt::format("{} houses", m.houses));
      c.in("above_fema", m.share_above_fema, 0.58, 0.78);
      c.in("zero_opt", m.share_zero_optimal, 0.15, 0.31);
      c.in("fema_cb", m.share_fema_passes_cb, 0.28, 0.48);
      c.add("opt_cb", m.share_nonzero_opt_passing_cb == 1.0,
            fmt::format("nonzero optima passing CB {:.3f} == 1", m.share_nonzero_opt_passing_cb));
      c.add("time", s < 3600, fmt::format("{:.1f}s < 3600s", s));
      report("exposure sweep", c, s);
    }

    {
      Check c;
      double s = timed([&] {
        const auto ish = pipeline::ishigami_self_test(std::size_t{1} << 14, cfg.sensitivity_seed);
        c.add("ishigami", ish.max_error <= 0.02,
              fmt::format("ishigami S1={:.3f} S2={:.3f} S3={:.3f} ST1={:.3f} max err {:.4f} <= 0.02", ish.s1, ish.s2,
                          ish.s3, ish.st1, ish.max_error));

        sensitivity::DamageModelInputs in{&art.posterior, &art.models, &art.curves, art.bfe, pipeline::ead_grid(cfg)};
        sensitivity::SensitivityConfig sc;
        sc.scenario = cfg.scenario;
        sc.house = cfg.house;
        sc.n = cfg.sensitivity_n;
        sc.seed = cfg.sensitivity_seed;
        sc.bootstrap = cfg.bootstrap;
        sc.bank_size = cfg.bank_size;
        sc.horizon = cfg.bank_horizon;
        sc.lifetime = cfg.lifetime;
        const auto r = sensitivity::damage_sensitivity(in, sc);
        const auto& f = r.factors;
        const auto& ix = r.indices;
        c.add("xi", f[top(ix.first)] == "xi", fmt::format("top first-order {} ({:.3f})", f[top(ix.first)], ix.first[top(ix.first)]));
        std::size_t bi = 0, bj = 1;
        double gev_max = -1, other_max = -1;
        std::string other_pair;
        for (std::size_t i = 0; i < ix.k; ++i)
          for (std::size_t j = i + 1; j < ix.k; ++j) {
            const double v = ix.s2(i, j);
            if (v > ix.s2(bi, bj)) bi = i, bj = j;
            if (is_gev(f[i]) && is_gev(f[j])) gev_max = std::max(gev_max, v);
            else if (v > other_max) other_max = v, other_pair = f[i] + ":" + f[j];
          }
        c.add("s2", is_gev(f[bi]) && is_gev(f[bj]),
              fmt::format("top second-order {}:{} ({:.4f}); best GEV pair {:.4f} vs best other {} {:.4f}", f[bi], f[bj],
                          ix.s2(bi, bj), gev_max, other_pair, other_max));

        auto fc = sc;
        fc.variant = sensitivity::Variant::FixedRate;
        fc.rate_min = cfg.rate_min;
        fc.rate_max = cfg.rate_max;
        const auto fr = sensitivity::damage_sensitivity(in, fc);
        const auto t = top(fr.indices.first);
        c.add("fixed", fr.factors[t] == "discount_rate", fmt::format("fixed-rate top {} ({:.3f})", fr.factors[t], fr.indices.first[t]));
      });
      s += timed([&] {
        p.sensitivity("scenario", "all");
        p.sensitivity("deep", "");
        p.sensitivity("fixed-rate", "");
        p.sensitivity("exposure", "");
      });
      report("sensitivity", c, s);
    }

    {
      Check c;
      const double s = timed([&] {
        // ead trapezoid against a Monte Carlo expectation
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const auto& curve = art.curves[0];
        const auto& house = cfg.house;
        double worst = 0;
        for (const hazard::GevParams g : {art.map, hazard::GevParams{art.map.mu, art.map.sigma, 0.15}}) {
          const std::size_t n = 1000000;
          double sum = 0;
          for (std::size_t i = 0; i < n; ++i) {
            const double y = -std::log((static_cast<double>(i) + u(rng)) / n);
            const double level = g.xi == 0 ? g.mu - g.sigma * std::log(y) : g.mu + g.sigma * (std::pow(y, -g.xi) - 1) / g.xi;
            sum += exposure::flood_damage(curve, house, level - art.bfe, 0.0, 0.0);
          }
          const double mc = sum / n;
          const double trap = objectives::ead(g, art.bfe, curve, 0.0, house, 0.0, pipeline::ead_grid(cfg));
          worst = std::max(worst, std::abs(trap - mc) / mc);
        }
        c.add("ead", worst < 0.02, fmt::format("EAD vs MC rel err {:.4f} < 0.02", worst));

        // reliability power formula against simulated lifetimes
        const auto& g = art.map;
        const double z = art.bfe + house.floor_rel_bfe + 6.0;
        const double r = objectives::reliability(g, art.bfe, house, 6.0, 30);
        const int trials = 200000;
        int dry = 0;
        for (int i = 0; i < trials; ++i) {
          bool wet = false;
          for (int yr = 0; yr < 30 && !wet; ++yr) {
            const double y = -std::log(u(rng));
            wet = (g.xi == 0 ? g.mu - g.sigma * std::log(y) : g.mu + g.sigma * (std::pow(y, -g.xi) - 1) / g.xi) > z;
          }
          dry += !wet;
        }
        const double sim = static_cast<double>(dry) / trials, se = std::sqrt(r * (1 - r) / trials);
        c.add("rel", std::abs(sim - r) < 3 * se, fmt::format("reliability {:.4f} vs sim {:.4f} (3se {:.4f})", r, sim, 3 * se));

        // latin hypercube stratification
        Rng lrng(2);
        bool strat = true;
        for (std::size_t n : {10u, 997u, 4096u}) {
          const auto smp = sow::lhs_sample(6, n, lrng);
          for (std::size_t col = 0; col < 6; ++col) {
            std::vector<int> hits(n, 0);
            for (std::size_t row = 0; row < n; ++row) ++hits[static_cast<std::size_t>(smp(row, col) * n)];
            strat = strat && std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; });
          }
        }
        c.add("lhs", strat, "LHS one point per stratum");

        // pareto front against the quadratic dominance filter
        std::vector<std::vector<double>> pts(1500);
        for (auto& q : pts) q = {u(rng), u(rng), std::floor(u(rng) * 10)};
        const std::vector<robustness::Sense> senses{robustness::Sense::Minimize, robustness::Sense::Maximize,
                                                    robustness::Sense::Minimize};
        std::vector<std::size_t> oracle;
        for (std::size_t i = 0; i < pts.size(); ++i) {
          bool dom = false;
          for (std::size_t j = 0; j < pts.size() && !dom; ++j) {
            const bool le = pts[j][0] <= pts[i][0] && pts[j][1] >= pts[i][1] && pts[j][2] <= pts[i][2];
            const bool lt = pts[j][0] < pts[i][0] || pts[j][1] > pts[i][1] || pts[j][2] < pts[i][2];
            dom = le && lt;
          }
          if (!dom) oracle.push_back(i);
        }
        auto front = robustness::pareto_front(pts, senses);
        std::sort(front.begin(), front.end());
        c.add("pareto", front == oracle, fmt::format("pareto front {} points == oracle {}", front.size(), oracle.size()));

        // discount factors: ensemble mean factor never below the factor at the mean rate
        bool jensen = true;
        for (const auto& m : art.models) {
          const std::size_t h = 200;
          const auto paths = discount::simulate_rates(m, h, 3000, 77);
          std::vector<double> mean_rate(h, 0.0), mean_factor(h, 0.0);
          for (const auto& path : paths) {
            const auto f = discount::discount_factors_stochastic(path);
            for (std::size_t t = 0; t < h; ++t) {
              mean_rate[t] += path[t] / paths.size();
              mean_factor[t] += f[t] / paths.size();
            }
          }
          const auto at_mean = discount::discount_factors_stochastic(mean_rate);
          for (std::size_t t = 0; t < h; ++t) jensen = jensen && mean_factor[t] >= at_mean[t] * (1 - 1e-12);
        }
        c.add("jensen", jensen, "E[F_t] >= F_t(E[r]) for all models");

        // every command again from scratch: byte-identical outputs
        p.export_plots();
        const auto first = snapshot(dir.path);
        std::filesystem::remove_all(dir.path);
        Pipeline again(cfg);
        again.ingest();
        again.fit_hazard();
        again.fit_discount();
        again.analyze();
        again.robustness();
        again.sweep();
        again.sensitivity("scenario", "all");
        again.sensitivity("deep", "");
        again.sensitivity("fixed-rate", "");
        again.sensitivity("exposure", "");
        again.export_plots();
        const auto second = snapshot(dir.path);
        std::size_t differ = first.size() == second.size() ? 0 : 1;
        for (const auto& [name, text] : first) {
          const auto it = second.find(name);
          differ += it == second.end() || it->second != text;
        }
        c.add("determinism", differ == 0, fmt::format("{} files reproduced, {} differ", first.size(), differ));
      });
      report("property suites", c, s);
    }

    std::size_t passed = 0;
    for (const auto& r : rows) passed += r.check.pass;
    const auto tail = fmt::format("{} of {} criteria pass\n", passed, rows.size());
    std::fputs(tail.c_str(), stdout);
    io::write_file("acceptance_report.txt", transcript + tail);
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance run failed: %s\n", e.what());
    return 1;
  }
}
