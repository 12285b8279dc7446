#include "heighten/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "heighten/io.hpp"
#include "heighten/parallel.hpp"

namespace heighten::sensitivity {

std::vector<double> SaltelliDesign::point(std::size_t row) const {
  const std::size_t block = row / n, i = row % n;
  std::vector<double> x(k);
  const bool from_b = block == 1 || block >= k + 2;
  for (std::size_t c = 0; c < k; ++c) x[c] = from_b ? b(i, c) : a(i, c);
  if (block >= 2 && block < k + 2) x[block - 2] = b(i, block - 2);
  if (block >= k + 2) x[block - k - 2] = a(i, block - k - 2);
  return x;
}

SaltelliDesign saltelli_design(std::size_t k, std::size_t n, Sampler sampler, std::uint64_t seed) {
  if (k < 2 || n < 1) throw std::invalid_argument("saltelli_design: need k >= 2 and n >= 1");
  auto rng = derive_rng(seed, 0x5a17e111ULL);
  const auto u = sampler == Sampler::LatinHypercube ? sow::lhs_sample(2 * k, n, rng) : sow::random_sample(2 * k, n, rng);
  SaltelliDesign d;
  d.k = k;
  d.n = n;
  d.a = {n, k, std::vector<double>(n * k)};
  d.b = {n, k, std::vector<double>(n * k)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) {
      d.a(i, c) = u(i, c);
      d.b(i, c) = u(i, k + c);
    }
  return d;
}

double clamp_index(double v) { return std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : v; }

namespace {

struct Blocks {
  std::size_t n, k;
  const double* f;
  double fa(std::size_t i) const { return f[i]; }
  double fb(std::size_t i) const { return f[n + i]; }
  double fab(std::size_t j, std::size_t i) const { return f[(2 + j) * n + i]; }
  double fba(std::size_t j, std::size_t i) const { return f[(2 + k + j) * n + i]; }
};

SobolIndices estimate(const Blocks& bl, const std::vector<std::size_t>& rows) {
  const std::size_t k = bl.k;
  SobolIndices s;
  s.k = k;
  s.first.assign(k, std::numeric_limits<double>::quiet_NaN());
  s.total = s.first;
  s.second.assign(k * k, std::numeric_limits<double>::quiet_NaN());

  std::vector<double> buf(2 * rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    buf[r] = bl.fa(rows[r]);
    buf[rows.size() + r] = bl.fb(rows[r]);
  }
  const double mean = io::mean(buf);
  for (auto& v : buf) v = (v - mean) * (v - mean);
  s.variance = io::mean(buf);
  if (!(s.variance > 1e-24 * std::max(1.0, mean * mean))) {  // rounding noise of a constant output
    s.degenerate = true;
    return s;
  }
  const double V = s.variance;
  std::vector<double> t1(rows.size()), t2(rows.size());
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::size_t i = rows[r];
      const double d = bl.fab(j, i) - bl.fa(i);
      t1[r] = (bl.fb(i) - mean) * d;
      t2[r] = d * d;
    }
    s.first[j] = io::mean(t1) / V;
    s.total[j] = 0.5 * io::mean(t2) / V;
  }
  for (std::size_t r = 0; r < rows.size(); ++r) t1[r] = (bl.fa(rows[r]) - mean) * (bl.fb(rows[r]) - mean);
  const double f0sq = io::mean(t1);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t l = j + 1; l < k; ++l) {
      for (std::size_t r = 0; r < rows.size(); ++r)
        t2[r] = (bl.fba(j, rows[r]) - mean) * (bl.fab(l, rows[r]) - mean);
      const double vc = (io::mean(t2) - f0sq) / V;
      s.second[j * k + l] = vc - s.first[j] - s.first[l];
      s.second[l * k + j] = s.second[j * k + l];
    }
  return s;
}

void check_outputs(const SaltelliDesign& d, const std::vector<double>& y) {
  if (y.size() != d.evaluations())
    throw std::invalid_argument(fmt::format("expected {} outputs, got {}", d.evaluations(), y.size()));
  for (double v : y)
    if (!std::isfinite(v)) throw std::invalid_argument("model outputs must be finite");
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = i;
  return r;
}

}  // namespace

SobolIndices sobol_indices(const SaltelliDesign& d, const std::vector<double>& y) {
  check_outputs(d, y);
  auto s = estimate({d.n, d.k, y.data()}, all_rows(d.n));
  s.first_ci.assign(d.k, {});
  s.total_ci.assign(d.k, {});
  s.second_ci.assign(d.k * d.k, {});
  return s;
}

SobolIndices bootstrap_significance(const SaltelliDesign& d, const std::vector<double>& y, std::size_t resamples,
                                    double level, std::uint64_t seed) {
  if (resamples < 100) throw std::invalid_argument("bootstrap needs at least 100 resamples");
  if (!(level > 0 && level < 1)) throw std::invalid_argument("confidence level must be in (0, 1)");
  auto s = sobol_indices(d, y);
  if (s.degenerate) return s;
  const std::size_t k = d.k;
  const Blocks bl{d.n, k, y.data()};
  std::vector<std::vector<double>> first(k), total(k), second(k * k);
  std::vector<SobolIndices> reps(resamples);
  parallel_for(resamples, [&](std::size_t b) {
    auto rng = derive_rng(seed, b);
    std::vector<std::size_t> rows(d.n);
    for (auto& r : rows) r = std::min(d.n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(d.n)));
    reps[b] = estimate(bl, rows);
  }, 4);
  const double lo_q = 0.5 * (1 - level), hi_q = 1 - lo_q;
  auto interval = [&](auto get) {
    std::vector<double> v;
    v.reserve(resamples);
    for (const auto& r : reps)
      if (!r.degenerate) v.push_back(get(r));
    if (v.empty()) return Interval{};
    Interval it{io::quantile(v, lo_q), io::quantile(v, hi_q), false};
    it.significant = it.lo > 0 || it.hi < 0;
    return it;
  };
  for (std::size_t j = 0; j < k; ++j) {
    s.first_ci[j] = interval([j](const SobolIndices& r) { return r.first[j]; });
    s.total_ci[j] = interval([j](const SobolIndices& r) { return r.total[j]; });
    for (std::size_t l = j + 1; l < k; ++l) {
      s.second_ci[j * k + l] = interval([&](const SobolIndices& r) { return r.second[j * k + l]; });
      s.second_ci[l * k + j] = s.second_ci[j * k + l];
    }
  }
  return s;
}

std::string indices_csv(const SobolIndices& s, const std::vector<std::string>& names) {
  std::string out = "factor_or_pair,order,estimate,clamped,ci_lo,ci_hi,significant\n";
  auto row = [&](const std::string& name, const char* order, double v, const Interval& ci) {
    out += fmt::format("{},{},{},{},{},{},{}\n", name, order, io::fmt_double(v), io::fmt_double(clamp_index(v)),
                       io::fmt_double(ci.lo), io::fmt_double(ci.hi), ci.significant ? 1 : 0);
  };
  for (std::size_t j = 0; j < s.k; ++j) row(names.at(j), "first", s.first[j], s.first_ci.at(j));
  for (std::size_t j = 0; j < s.k; ++j) row(names.at(j), "total", s.total[j], s.total_ci.at(j));
  for (std::size_t j = 0; j < s.k; ++j)
    for (std::size_t l = j + 1; l < s.k; ++l)
      row(names.at(j) + ":" + names.at(l), "second", s.s2(j, l), s.s2_ci(j, l));
  return out;
}

std::vector<double> evaluate(const SaltelliDesign& d, const std::function<double(const std::vector<double>&)>& f) {
  std::vector<double> y(d.evaluations());
  parallel_for(y.size(), [&](std::size_t r) { y[r] = f(d.point(r)); });
  return y;
}

double ishigami(const std::vector<double>& u, double a, double b) {
  const double pi = std::numbers::pi;
  const double x1 = -pi + 2 * pi * u.at(0), x2 = -pi + 2 * pi * u.at(1), x3 = -pi + 2 * pi * u.at(2);
  const double s2 = std::sin(x2);
  return std::sin(x1) + a * s2 * s2 + b * std::pow(x3, 4) * std::sin(x1);
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Scenario: return "scenario";
    case Variant::DeepChoice: return "deep";
    case Variant::FixedRate: return "fixed-rate";
  }
  return "?";
}

std::vector<std::string> factor_names(Variant v) {
  std::vector<std::string> names{"mu", "sigma", "xi", "lifetime", v == Variant::FixedRate ? "discount_rate" : "discount_path",
                                 "damage_error"};
  if (v == Variant::DeepChoice) {
    names.push_back("discount_model");
    names.push_back("damage_model");
  }
  return names;
}

std::vector<exposure::House> house_presets() {
  return {{300000, 1500, -4.0, "sample"},
          {300000, 1500, -8.0, "deep_floor"},
          {300000, 1500, -1.0, "shallow_floor"},
          {1000000, 5000, -4.0, "large_valuable"}};
}

namespace {

struct PathBank {
  std::vector<std::vector<double>> cumsum;  // cumulative factor sums, sorted by present value

  double sum(double u, int lifetime) const {
    const std::size_t i = std::min(cumsum.size() - 1, static_cast<std::size_t>(u * static_cast<double>(cumsum.size())));
    const auto& c = cumsum[i];
    return c[std::min<std::size_t>(c.size() - 1, static_cast<std::size_t>(lifetime))];
  }
};

PathBank make_bank(const discount::Ar3Model& m, const SensitivityConfig& cfg, std::uint64_t seed) {
  const auto paths = discount::simulate_rates(m, cfg.horizon, cfg.bank_size, seed);
  PathBank bank;
  bank.cumsum.reserve(paths.size());
  for (const auto& p : paths) {
    auto f = discount::discount_factors_stochastic(p);
    for (std::size_t t = 1; t < f.size(); ++t) f[t] += f[t - 1];
    bank.cumsum.push_back(std::move(f));
  }
  std::stable_sort(bank.cumsum.begin(), bank.cumsum.end(),
                   [](const auto& a, const auto& b) { return a.back() < b.back(); });
  return bank;
}

double marginal_quantile(const std::vector<double>& sorted, double u) {
  const double x = u * static_cast<double>(sorted.size() - 1);
  const std::size_t i = static_cast<std::size_t>(x);
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + (x - static_cast<double>(i)) * (sorted[i + 1] - sorted[i]);
}

}  // namespace

SensitivityResult damage_sensitivity(const DamageModelInputs& in, const SensitivityConfig& cfg) {
  if (!in.posterior || in.posterior->samples.empty() || !in.curves || in.curves->size() < 2)
    throw std::invalid_argument("damage_sensitivity: missing posterior or damage curves");
  exposure::validate(cfg.house);
  const bool fixed_rate = cfg.variant == Variant::FixedRate;
  const bool deep = cfg.variant == Variant::DeepChoice;

  std::vector<double> mu, sigma, xi;
  for (const auto& s : in.posterior->samples) {
    mu.push_back(s.params.mu);
    sigma.push_back(s.params.sigma);
    xi.push_back(s.params.xi);
  }
  std::sort(mu.begin(), mu.end());
  std::sort(sigma.begin(), sigma.end());
  std::sort(xi.begin(), xi.end());

  std::vector<PathBank> banks(3);
  if (!fixed_rate) {
    if (!in.models || in.models->size() != 3) throw std::invalid_argument("damage_sensitivity: missing discount models");
    for (auto kind : discount::kAllKinds) {
      const int ki = static_cast<int>(kind);
      if (deep || kind == cfg.scenario.discount) {
        if ((*in.models)[ki].n_params == 0)
          throw std::invalid_argument(fmt::format("{} model not fitted", discount::kind_name(kind)));
        banks[ki] = make_bank((*in.models)[ki], cfg, derive_rng(cfg.seed, 0xBA4C + ki)());
      }
    }
  }

  SensitivityResult res;
  res.factors = factor_names(cfg.variant);
  res.design = saltelli_design(res.factors.size(), cfg.n, cfg.sampler, cfg.seed);
  const double z = cfg.house.floor_rel_bfe;
  const auto& grid = in.grid;
  auto model = [&](const std::vector<double>& x) {
    const hazard::GevParams g{marginal_quantile(mu, x[0]), marginal_quantile(sigma, x[1]), marginal_quantile(xi, x[2])};
    const int life = exposure::lifetime_from_uniform(cfg.lifetime, x[3]);
    const double err = -0.3 + 0.6 * x[5];
    sow::Scenario sc = cfg.scenario;
    if (deep) {
      sc.discount = static_cast<discount::ModelKind>(std::min(2, static_cast<int>(x[6] * 3)));
      sc.damage = static_cast<exposure::DamageModel>(std::min(1, static_cast<int>(x[7] * 2)));
    }
    double dsum;
    if (fixed_rate) {
      const double r = cfg.rate_min + (cfg.rate_max - cfg.rate_min) * x[4];
      const auto f = discount::discount_factors_fixed(r, static_cast<std::size_t>(life) + 1);
      dsum = discount::factor_sum(f, life);
    } else {
      dsum = banks[static_cast<int>(sc.discount)].sum(x[4], life);
    }
    const auto& curve = (*in.curves)[static_cast<int>(sc.damage)];
    double e = 0;
    for (std::size_t j = 0; j < grid.p.size(); ++j) {
      const double level = hazard::gev_quantile(g, 1.0 - grid.p[j]) - in.bfe;
      e += grid.weight[j] * exposure::damage_fraction(curve, level - z, err);
    }
    return e * dsum;
  };
  res.outputs = evaluate(res.design, model);
  res.indices = bootstrap_significance(res.design, res.outputs, cfg.bootstrap, 0.95, cfg.seed);
  return res;
}

}  // namespace heighten::sensitivity
