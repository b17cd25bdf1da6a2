#pragma once

#include <cmath>
#include <ostream>
#include <string>

#include "json.hpp"

#include "l1sgd/data.hpp"
#include "l1sgd/engine.hpp"
#include "l1sgd/model.hpp"

namespace l1sgd {

inline constexpr const char* report_csv_header = "T,T_eff,t,M,J_approx,J_exact,L_T,gap,seconds";

namespace detail {

// Non-finite cells (objective columns before they were evaluated) stay blank.
inline std::string csv_cell(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

}  // namespace detail

/// One row per completed epoch (for the random variant, per block of m
/// steps). Columns: epoch count T, single-presentation-equivalent epoch
/// count T_eff, step count t, margin errors M, then the objective columns,
/// blank where the value was not computed that epoch, and cumulative wall
/// seconds.
inline void write_report_csv(std::ostream& out, const train_report& rep) {
  out << report_csv_header << '\n';
  for (const epoch_metrics& r : rep.rows) {
    out << r.epoch << ',' << r.epoch_eff << ',' << r.steps << ',' << r.margin_errors << ','
        << detail::csv_cell(r.approx_obj) << ',' << detail::csv_cell(r.exact_obj) << ','
        << detail::csv_cell(r.lower_bound) << ',' << detail::csv_cell(r.gap) << ','
        << detail::format_double(r.seconds) << '\n';
  }
}

inline nlohmann::json summary_json(const dataset& ds, const hyperparams& hp,
                                   const train_result& res) {
  const train_report& rep = res.report;
  nlohmann::json j{
      {"variant", std::string(1, variant_code(hp.schedule))},
      {"C", hp.cost},
      {"lambda", hp.lambda},
      {"rho", hp.rho},
      {"epsilon", hp.epsilon},
      {"f", hp.approx_factor},
      {"ell", hp.multiplicity},
      {"seed", hp.seed},
      {"permute_each_epoch", hp.permute_each_epoch},
      {"m", ds.size()},
      {"dim", ds.dim},
      {"max_pattern_norm", ds.max_norm},
      {"stop_reason", stop_reason_name(rep.reason)},
      {"epochs", res.state.epochs},
      {"epochs_eff", res.state.epochs_eff},
      {"steps", res.state.steps},
      {"margin_errors", res.state.margin_errors},
      {"wall_seconds", rep.wall_seconds},
  };
  if (std::isfinite(rep.final_objective)) j["objective"] = rep.final_objective;
  if (std::isfinite(rep.final_lower_bound)) j["lower_bound"] = rep.final_lower_bound;
  if (std::isfinite(rep.final_gap)) j["gap"] = rep.final_gap;
  if (std::isfinite(rep.box_excess)) j["box_excess"] = rep.box_excess;
  return j;
}

}  // namespace l1sgd
