#include "genreg/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "genreg/config.hpp"
#include "genreg/io_error.hpp"
#include "genreg/rng.hpp"

namespace genreg {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace bench {

using nlohmann::json;

std::string trials_csv(const Report& r) {
  std::ostringstream os;
  os << "method,seed,success,rre_deg,rte_m,n_matches,n_inliers,n_correct,precision_at_radius\n";
  for (const TrialRow& t : r.trials) {
    os << to_string(t.method) << ',' << t.seed << ',' << (t.success ? 1 : 0) << ','
       << format_double(t.rre_deg) << ',' << format_double(t.rte_m) << ',' << t.n_matches << ','
       << t.n_inliers << ',' << t.n_correct << ',' << format_double(t.precision) << '\n';
  }
  return os.str();
}

namespace {

void curve_rows(std::ostringstream& os, const PRCurve& c, const std::string& prefix) {
  for (const PRPoint& p : c.points) {
    os << prefix << format_double(p.threshold) << ',' << format_double(p.precision) << ','
       << format_double(p.recall) << ',' << format_double(p.raw_precision) << ',' << p.n_emitted
       << ',' << p.n_correct << '\n';
  }
}

// nlohmann serializes doubles in shortest round-trip form; non-finite values become null.
json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string pr_curve_csv(const PRCurve& c) {
  std::ostringstream os;
  os << "threshold,precision,recall,raw_precision,n_emitted,n_correct\n";
  curve_rows(os, c, "");
  return os.str();
}

std::string pr_curves_csv(const Report& r) {
  std::ostringstream os;
  os << "method,seed,threshold,precision,recall,raw_precision,n_emitted,n_correct\n";
  for (const CurveRow& row : r.curves) {
    std::ostringstream prefix;
    prefix << to_string(row.method) << ',' << row.seed << ',';
    curve_rows(os, row.curve, prefix.str());
  }
  return os.str();
}

json summary_json(const Report& r) {
  json j;
  j["generator"] = std::string(CounterRng::kName);
  j["seeds"] = {{"first", r.config.first_seed}, {"count", r.config.n_seeds}};
  j["note"] =
      "Synthetic scenes and simulated descriptors; branch noise levels are benchmark "
      "parameters, not measured properties of any feature extractor.";
  j["config"] = to_json(r.config);

  json methods = json::array();
  for (const MethodSummary& s : r.summaries) {
    json m;
    m["method"] = std::string(to_string(s.method));
    m["trials"] = s.trials;
    m["failures"] = s.failures;
    m["mean_rre_deg"] = s.mean_rre;
    m["median_rre_deg"] = s.median_rre;
    m["mean_rte_m"] = s.mean_rte;
    m["median_rte_m"] = s.median_rte;
    m["mean_precision_at_radius"] = s.mean_precision;
    json rre_acc = json::object(), rte_acc = json::object();
    for (std::size_t i = 0; i < s.rre_accuracy.size(); ++i)
      rre_acc[format_double(r.config.rre_thresholds[i])] = s.rre_accuracy[i];
    for (std::size_t i = 0; i < s.rte_accuracy.size(); ++i)
      rte_acc[format_double(r.config.rte_thresholds[i])] = s.rte_accuracy[i];
    m["rre_accuracy"] = rre_acc;
    m["rte_accuracy"] = rte_acc;
    json grid = json::array();
    for (std::size_t i = 0; i < s.recall_grid.size(); ++i)
      grid.push_back({{"recall", s.recall_grid[i]}, {"precision", optional_number(s.mean_precision_at_recall[i])}});
    m["precision_at_recall"] = grid;
    methods.push_back(m);
  }
  j["methods"] = methods;

  if (r.and_vs_or) {
    const AndOrComparison& c = *r.and_vs_or;
    json grid = json::array();
    for (std::size_t i = 0; i < c.recall.size(); ++i)
      grid.push_back({{"recall", c.recall[i]}, {"seeds", c.seeds_compared[i]}, {"noisy_and", c.and_precision[i]}, {"noisy_or", c.or_precision[i]}});
    j["and_vs_or"] = {{"grid", grid},
                      {"holds_on_mean", c.holds_on_mean},
                      {"violating_seeds", c.violating_seeds}};
  }
  return j;
}

void write_report(const Report& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    out << text;
  };
  write("trials.csv", trials_csv(r));
  write("pr_curves.csv", pr_curves_csv(r));
  write("summary.json", summary_json(r).dump(2) + "\n");
}

}  // namespace bench
}  // namespace genreg
