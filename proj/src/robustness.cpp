#include "heighten/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "heighten/io.hpp"

namespace heighten::robustness {

void validate(const AcceptableRanges& r) {
  if (!(r.bcr_min <= r.bcr_max) || !(r.total_cost_ratio_min <= r.total_cost_ratio_max) ||
      !(r.reliability_min <= r.reliability_max))
    throw std::invalid_argument("acceptable ranges must be non-empty");
}

RobustnessResult domain_measure(const objectives::ObjectiveSurface& s, const AcceptableRanges& r, std::size_t i) {
  const auto& p = s.policies.at(i);
  const std::size_t n = p.led.size();
  if (n == 0) throw std::domain_error("domain_measure: empty ensemble");
  const double v = s.house.value;
  std::size_t nb = 0, nc = 0, nr = 0, nj = 0;
  for (std::size_t k = 0; k < n; ++k) {
    bool b;
    if (p.h == 0.0) {
      b = !r.bcr_fails_at_zero;
    } else {
      b = p.bcr[k] >= r.bcr_min && p.bcr[k] <= r.bcr_max;
    }
    const double tc = (p.upfront + p.led[k]) / v;
    const bool c = tc >= r.total_cost_ratio_min && tc <= r.total_cost_ratio_max;
    const bool rl = p.rel[k] >= r.reliability_min && p.rel[k] <= r.reliability_max;
    nb += b;
    nc += c;
    nr += rl;
    nj += b && c && rl;
  }
  const double dn = static_cast<double>(n);
  return {p.h, nb / dn, nc / dn, nr / dn, nj / dn};
}

std::vector<RobustnessResult> robustness_curves(const objectives::ObjectiveSurface& s, const AcceptableRanges& r) {
  validate(r);
  std::vector<RobustnessResult> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back(domain_measure(s, r, i));
  return out;
}

namespace {
double oriented(double v, Sense s) { return s == Sense::Minimize ? v : -v; }
}  // namespace

bool dominates(const std::vector<double>& a, const std::vector<double>& b, const std::vector<Sense>& senses) {
  bool strict = false;
  for (std::size_t d = 0; d < senses.size(); ++d) {
    const double x = oriented(a[d], senses[d]), y = oriented(b[d], senses[d]);
    if (x > y) return false;
    if (x < y) strict = true;
  }
  return strict;
}

std::vector<std::size_t> pareto_front(const std::vector<std::vector<double>>& pts, const std::vector<Sense>& senses) {
  for (const auto& p : pts)
    if (p.size() != senses.size()) throw std::invalid_argument("pareto_front: inconsistent dimensionality");
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  // a dominator always precedes what it dominates in lexicographic order
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t d = 0; d < senses.size(); ++d) {
      const double x = oriented(pts[a][d], senses[d]), y = oriented(pts[b][d], senses[d]);
      if (x != y) return x < y;
    }
    return false;
  });
  std::vector<std::size_t> front;
  for (std::size_t i : order) {
    bool dominated = false;
    for (std::size_t f : front)
      if (dominates(pts[f], pts[i], senses)) {
        dominated = true;
        break;
      }
    if (!dominated) front.push_back(i);
  }
  std::stable_sort(front.begin(), front.end(), [&](std::size_t a, std::size_t b) {
    const double x = oriented(pts[a][0], senses[0]), y = oriented(pts[b][0], senses[0]);
    return x < y || (x == y && a < b);
  });
  return front;
}

std::vector<TradeoffRow> tradeoff_table(const objectives::ObjectiveSurface& s,
                                        const std::vector<RobustnessResult>& rob) {
  std::vector<std::vector<double>> pts;
  for (const auto& p : s.policies) pts.push_back({p.upfront, p.rel_mean});
  std::vector<bool> on(s.size(), false);
  for (auto i : pareto_front(pts, {Sense::Minimize, Sense::Maximize})) on[i] = true;
  std::vector<TradeoffRow> rows;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& p = s.policies[i];
    rows.push_back({p.h, p.upfront, p.rel_mean, p.led_mean, p.bcr_mean, p.h > 0 && p.bcr_mean >= 1.0,
                    i < rob.size() ? rob[i].joint : std::nan(""), on[i]});
  }
  return rows;
}

std::string tradeoff_csv(const std::vector<TradeoffRow>& rows) {
  std::string out = "h,upfront_usd,reliability,expected_damages_usd,bcr,passes_cb_test,joint_robustness,on_front\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{},{},{}\n", io::fmt_double(r.h), io::fmt_double(r.upfront),
                       io::fmt_double(r.reliability), io::fmt_double(r.expected_damages), io::fmt_double(r.bcr),
                       r.passes_cb_test ? 1 : 0, io::fmt_double(r.joint_robustness), r.on_front ? 1 : 0);
  return out;
}

std::string robustness_csv(const std::vector<RobustnessResult>& rob) {
  std::string out = "h,bcr,total_cost,reliability,joint\n";
  for (const auto& r : rob)
    out += fmt::format("{},{},{},{},{}\n", io::fmt_double(r.h), io::fmt_double(r.bcr), io::fmt_double(r.total_cost),
                       io::fmt_double(r.reliability), io::fmt_double(r.joint));
  return out;
}

}  // namespace heighten::robustness
