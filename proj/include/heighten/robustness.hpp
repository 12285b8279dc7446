#pragma once

// Satisficing robustness over SOW ensembles and Pareto trade-offs.

#include <limits>
#include <string>
#include <vector>

#include "heighten/objectives.hpp"

namespace heighten::robustness {

struct AcceptableRanges {
  double bcr_min = 1.0;
  double bcr_max = std::numeric_limits<double>::infinity();
  double total_cost_ratio_min = 0.0;
  double total_cost_ratio_max = 0.75;
  double reliability_min = 0.5;
  double reliability_max = 1.0;
  /// Without an investment there is no benefit-to-cost ratio; by default
  /// h = 0 fails the BCR criterion.
  bool bcr_fails_at_zero = true;
};
void validate(const AcceptableRanges& r);

struct RobustnessResult {
  double h = 0;
  double bcr = 0;
  double total_cost = 0;
  double reliability = 0;
  double joint = 0;
};

/// Fractions of SOWs inside each acceptable range, and in all of them at once.
RobustnessResult domain_measure(const objectives::ObjectiveSurface& s, const AcceptableRanges& r, std::size_t policy);
std::vector<RobustnessResult> robustness_curves(const objectives::ObjectiveSurface& s, const AcceptableRanges& r);

enum class Sense { Minimize, Maximize };

/// Indices of points that no other point dominates, ordered by the
/// first axis (best first), ties in input order.
std::vector<std::size_t> pareto_front(const std::vector<std::vector<double>>& points, const std::vector<Sense>& senses);

bool dominates(const std::vector<double>& a, const std::vector<double>& b, const std::vector<Sense>& senses);

struct TradeoffRow {
  double h;
  double upfront;
  double reliability;
  double expected_damages;
  double bcr;
  bool passes_cb_test;
  double joint_robustness;
  bool on_front;  // upfront vs reliability front
};
std::vector<TradeoffRow> tradeoff_table(const objectives::ObjectiveSurface& s,
                                        const std::vector<RobustnessResult>& rob);
std::string tradeoff_csv(const std::vector<TradeoffRow>& rows);
std::string robustness_csv(const std::vector<RobustnessResult>& rob);

}  // namespace heighten::robustness
