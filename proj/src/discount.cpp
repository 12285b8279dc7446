#include "heighten/discount.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <json.hpp>

#include "heighten/io.hpp"
#include "heighten/parallel.hpp"

namespace heighten::discount {

DiscountSeries parse_discount_csv(std::string_view text, std::string provenance) {
  const auto t = io::parse_csv(text);
  const auto yc = t.column("year"), rc = t.column("rate_percent");
  DiscountSeries s;
  s.provenance = std::move(provenance);
  for (const auto& row : t.rows) {
    const int year = static_cast<int>(io::parse_int(row[yc]));
    const double r = io::parse_double(row[rc]);
    if (!(r > 0)) throw io::IoError(fmt::format("discount series: non-positive rate {} in {}", r, year));
    if (!s.years.empty() && year != s.years.back() + 1)
      throw io::IoError(fmt::format("discount series: years not contiguous at {}", year));
    s.years.push_back(year);
    s.rate_percent.push_back(r);
  }
  return s;
}

std::string discount_csv(const DiscountSeries& s) {
  std::string out = "year,rate_percent\n";
  for (std::size_t i = 0; i < s.size(); ++i) out += fmt::format("{},{}\n", s.years[i], s.rate_percent[i]);
  return out;
}

DiscountSeries moving_average(const DiscountSeries& raw, int window) {
  if (window < 1) throw std::invalid_argument("moving_average: window must be >= 1");
  DiscountSeries out;
  out.provenance = raw.provenance;
  const std::size_t w = static_cast<std::size_t>(window);
  for (std::size_t i = w - 1; i < raw.size(); ++i) {
    double sum = 0;
    for (std::size_t j = i + 1 - w; j <= i; ++j) sum += raw.rate_percent[j];
    out.years.push_back(raw.years[i]);
    out.rate_percent.push_back(sum / static_cast<double>(w));
  }
  return out;
}

std::string_view kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::RandomWalk: return "RandomWalk";
    case ModelKind::MeanReverting: return "MeanReverting";
    case ModelKind::BackgroundTrend: return "BackgroundTrend";
  }
  return "?";
}

ModelKind parse_kind(std::string_view name) {
  for (auto k : kAllKinds)
    if (kind_name(k) == name) return k;
  throw std::invalid_argument(fmt::format("unknown discount model '{}'", name));
}

namespace {

struct Ols {
  Eigen::VectorXd coef;
  Eigen::MatrixXd cov;  // coefficient covariance with the unbiased residual variance
  double rss;
};

Ols ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Ols r;
  const Eigen::MatrixXd xtx = X.transpose() * X;
  const auto ldlt = xtx.ldlt();
  r.coef = ldlt.solve(X.transpose() * y);
  r.rss = (y - X * r.coef).squaredNorm();
  const double s2 = r.rss / static_cast<double>(X.rows() - X.cols());
  r.cov = ldlt.solve(Eigen::MatrixXd::Identity(X.cols(), X.cols())) * s2;
  return r;
}

double se_of(const Eigen::RowVectorXd& grad, const Eigen::MatrixXd& cov) {
  return std::sqrt(std::max(0.0, (grad * cov * grad.transpose())(0, 0)));
}

}  // namespace

Ar3Model fit_ar3(const DiscountSeries& series, ModelKind kind) {
  const std::size_t n = series.size();
  if (n < 30) throw FitError(fmt::format("fit_ar3: need at least 30 observations, got {}", n));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::log(series.rate_percent[i]);
  const Eigen::Index m = static_cast<Eigen::Index>(n - 3);

  Ar3Model out;
  out.kind = kind;
  out.n_obs = n - 3;
  out.last_x = {x[n - 3], x[n - 2], x[n - 1]};
  out.last_t = static_cast<int>(n);

  Eigen::VectorXd y(m);
  Eigen::MatrixXd X;
  double rss = 0;
  switch (kind) {
    case ModelKind::RandomWalk: {
      // x_t - x_{t-3} = rho1 (x_{t-1} - x_{t-3}) + rho2 (x_{t-2} - x_{t-3})
      X.resize(m, 2);
      for (Eigen::Index i = 0; i < m; ++i) {
        const std::size_t t = static_cast<std::size_t>(i) + 3;
        y[i] = x[t] - x[t - 3];
        X(i, 0) = x[t - 1] - x[t - 3];
        X(i, 1) = x[t - 2] - x[t - 3];
      }
      const auto f = ols(X, y);
      rss = f.rss;
      out.rho = {f.coef[0], f.coef[1], 1.0 - f.coef[0] - f.coef[1]};
      out.rho_se = {std::sqrt(f.cov(0, 0)), std::sqrt(f.cov(1, 1)),
                    std::sqrt(std::max(0.0, f.cov(0, 0) + f.cov(1, 1) + 2 * f.cov(0, 1)))};
      out.n_params = 4;
      break;
    }
    case ModelKind::MeanReverting: {
      X.resize(m, 4);
      for (Eigen::Index i = 0; i < m; ++i) {
        const std::size_t t = static_cast<std::size_t>(i) + 3;
        y[i] = x[t];
        X(i, 0) = 1.0;
        X(i, 1) = x[t - 1];
        X(i, 2) = x[t - 2];
        X(i, 3) = x[t - 3];
      }
      const auto f = ols(X, y);
      rss = f.rss;
      const double S = f.coef[1] + f.coef[2] + f.coef[3];
      if (S >= 1.0)
        throw FitError(fmt::format("MeanReverting fit infeasible: sum(rho) = {:.6f} >= 1 (unit root)", S));
      out.rho = {f.coef[1], f.coef[2], f.coef[3]};
      out.eta = f.coef[0] / (1 - S);
      for (int j = 0; j < 3; ++j) out.rho_se[j] = std::sqrt(f.cov(j + 1, j + 1));
      Eigen::RowVectorXd g(4);
      const double d = out.eta / (1 - S);
      g << 1 / (1 - S), d, d, d;
      out.eta_se = se_of(g, f.cov);
      out.n_params = 5;
      break;
    }
    case ModelKind::BackgroundTrend: {
      // x_t = c + b t + sum rho_i x_{t-i}; beta = b/(1-S), eta = (c - beta sum i rho_i)/(1-S)
      X.resize(m, 5);
      for (Eigen::Index i = 0; i < m; ++i) {
        const std::size_t t = static_cast<std::size_t>(i) + 3;
        y[i] = x[t];
        X(i, 0) = 1.0;
        X(i, 1) = static_cast<double>(t + 1);
        X(i, 2) = x[t - 1];
        X(i, 3) = x[t - 2];
        X(i, 4) = x[t - 3];
      }
      const auto f = ols(X, y);
      rss = f.rss;
      const double c = f.coef[0], b = f.coef[1];
      const double r1 = f.coef[2], r2 = f.coef[3], r3 = f.coef[4];
      const double S = r1 + r2 + r3;
      if (S >= 1.0)
        throw FitError(fmt::format("BackgroundTrend fit infeasible: sum(rho) = {:.6f} >= 1 (unit root)", S));
      const double D = 1 - S;
      const double W = r1 + 2 * r2 + 3 * r3;
      out.rho = {r1, r2, r3};
      out.beta = b / D;
      out.eta = (c - out.beta * W) / D;
      for (int j = 0; j < 3; ++j) out.rho_se[j] = std::sqrt(f.cov(j + 2, j + 2));
      Eigen::RowVectorXd gb(5), ge(5);
      gb << 0, 1 / D, b / (D * D), b / (D * D), b / (D * D);
      for (int i = 1; i <= 3; ++i) {
        // d eta / d rho_i
        const double dbeta = b / (D * D);
        ge[i + 1] = (-dbeta * W - out.beta * i) / D + (c - out.beta * W) / (D * D);
      }
      ge[0] = 1 / D;
      ge[1] = -W / (D * D);
      out.beta_se = se_of(gb, f.cov);
      out.eta_se = se_of(ge, f.cov);
      out.n_params = 6;
      break;
    }
  }
  const double md = static_cast<double>(m);
  out.sigma2 = rss / md;
  if (!(out.sigma2 > 0)) throw FitError("fit_ar3: zero residual variance");
  out.log_likelihood = -0.5 * md * (std::log(2 * std::numbers::pi * out.sigma2) + 1.0);
  out.aic = -2 * out.log_likelihood + 2 * out.n_params;
  out.bic = -2 * out.log_likelihood + out.n_params * std::log(md);
  return out;
}

std::string model_json(const Ar3Model& m) {
  nlohmann::ordered_json j;
  j["kind"] = kind_name(m.kind);
  j["rho"] = m.rho;
  j["eta"] = m.eta;
  j["beta"] = m.beta;
  j["sigma2"] = m.sigma2;
  j["log_likelihood"] = m.log_likelihood;
  j["n_params"] = m.n_params;
  j["n_obs"] = m.n_obs;
  j["aic"] = m.aic;
  j["bic"] = m.bic;
  j["stderrs"] = {{"rho", m.rho_se}, {"eta", m.eta_se}, {"beta", m.beta_se}};
  j["last_x"] = m.last_x;
  j["last_t"] = m.last_t;
  return j.dump(2) + "\n";
}

Ar3Model parse_model_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  Ar3Model m;
  m.kind = parse_kind(j.at("kind").get<std::string>());
  m.rho = j.at("rho").get<std::array<double, 3>>();
  m.eta = j.at("eta").get<double>();
  m.beta = j.at("beta").get<double>();
  m.sigma2 = j.at("sigma2").get<double>();
  m.log_likelihood = j.at("log_likelihood").get<double>();
  m.n_params = j.at("n_params").get<int>();
  m.n_obs = j.at("n_obs").get<std::size_t>();
  m.aic = j.at("aic").get<double>();
  m.bic = j.at("bic").get<double>();
  const auto& se = j.at("stderrs");
  m.rho_se = se.at("rho").get<std::array<double, 3>>();
  m.eta_se = se.at("eta").get<double>();
  m.beta_se = se.at("beta").get<double>();
  m.last_x = j.at("last_x").get<std::array<double, 3>>();
  m.last_t = j.at("last_t").get<int>();
  return m;
}

std::vector<SelectionRow> model_selection_table(const std::vector<Ar3Model>& models) {
  std::vector<SelectionRow> rows;
  if (models.empty()) return rows;
  double best = models.front().aic;
  for (const auto& m : models) best = std::min(best, m.aic);
  for (const auto& m : models)
    rows.push_back({m.kind, m.log_likelihood, m.n_params, m.aic, m.bic, m.aic == best, m.aic - best < 2.0});
  return rows;
}

std::vector<SelectionRow> model_selection_table(const DiscountSeries& series) {
  std::vector<Ar3Model> models;
  for (auto k : kAllKinds) models.push_back(fit_ar3(series, k));
  return model_selection_table(models);
}

namespace {

double trend(const Ar3Model& m, double t) {
  switch (m.kind) {
    case ModelKind::RandomWalk: return 0.0;
    case ModelKind::MeanReverting: return m.eta;
    case ModelKind::BackgroundTrend: return m.eta + m.beta * t;
  }
  return 0.0;
}

template <class Noise>
std::vector<double> run(const Ar3Model& m, std::size_t horizon, Noise&& noise) {
  std::vector<double> x(horizon);
  std::array<double, 3> hist = m.last_x;  // x_{t-3}, x_{t-2}, x_{t-1}
  for (std::size_t j = 0; j < horizon; ++j) {
    const double t = static_cast<double>(m.last_t) + 1.0 + static_cast<double>(j);
    double v = trend(m, t);
    for (int i = 1; i <= 3; ++i) v += m.rho[i - 1] * (hist[3 - i] - trend(m, t - i));
    v += noise();
    x[j] = v;
    hist = {hist[1], hist[2], v};
  }
  return x;
}

}  // namespace

RatePath simulate_path(const Ar3Model& m, std::size_t horizon, Rng& rng) {
  const double sd = std::sqrt(m.sigma2);
  auto x = run(m, horizon, [&] { return sd * standard_normal(rng); });
  for (auto& v : x) v = std::exp(v) / 100.0;
  return x;
}

std::vector<RatePath> simulate_rates(const Ar3Model& m, std::size_t horizon, std::size_t n_paths,
                                     std::uint64_t seed) {
  std::vector<RatePath> paths(n_paths);
  parallel_for(n_paths, [&](std::size_t i) {
    auto rng = derive_rng(seed, i);
    paths[i] = simulate_path(m, horizon, rng);
  });
  return paths;
}

std::vector<double> expected_log_path(const Ar3Model& m, std::size_t horizon) {
  return run(m, horizon, [] { return 0.0; });
}

std::vector<double> discount_factors_fixed(double r, std::size_t horizon, FactorConvention c) {
  if (!(r >= 0)) throw std::domain_error("discount rate must be non-negative");
  return discount_factors_stochastic(RatePath(horizon, r), c);
}

std::vector<double> discount_factors_stochastic(const RatePath& path, FactorConvention c) {
  std::vector<double> f(path.size());
  double cum = 0;
  for (std::size_t t = 0; t < path.size(); ++t) {
    if (c == FactorConvention::DiscountFirstYear) {
      cum += path[t];
      f[t] = std::exp(-cum);
    } else {
      f[t] = std::exp(-cum);
      cum += path[t];
    }
  }
  return f;
}

double factor_sum(const std::vector<double>& factors, int lifetime) {
  if (lifetime < 0 || factors.size() < static_cast<std::size_t>(lifetime) + 1)
    throw std::domain_error(
        fmt::format("need {} discount factors for a {}-year lifetime, have {}", lifetime + 1, lifetime, factors.size()));
  double s = 0;
  for (int t = 0; t <= lifetime; ++t) s += factors[static_cast<std::size_t>(t)];
  return s;
}

}  // namespace heighten::discount
