#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "genreg/bench.hpp"

namespace genreg {

/// 17 significant digits ("%.17g"); round-trips every double.
std::string format_double(double v);

namespace bench {

// CSV columns:
//   trials.csv:    method,seed,success,rre_deg,rte_m,n_matches,n_inliers,n_correct,precision_at_radius
//   pr_curves.csv: method,seed,threshold,precision,recall,raw_precision,n_emitted,n_correct
std::string trials_csv(const Report& r);
std::string pr_curves_csv(const Report& r);
std::string pr_curve_csv(const PRCurve& c);
nlohmann::json summary_json(const Report& r);

/// Writes trials.csv, pr_curves.csv and summary.json into `dir` (created if needed).
void write_report(const Report& r, const std::filesystem::path& dir);

}  // namespace bench
}  // namespace genreg
