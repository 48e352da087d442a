#pragma once

// Batch report model: per-case rows plus mean/median/std aggregates per
// region and metric, emitted as CSV and JSON carrying identical numbers.

#include <array>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "segeval/metrics.hpp"

namespace segeval {

struct CaseRow {
  std::string case_id;
  std::optional<CaseMetrics> metrics;  // empty on failure
  std::string error;                   // empty on success
};

struct Aggregate {
  double mean = 0;
  double median = 0;
  double stddev = 0;  // population
  std::size_t n = 0;
};

constexpr std::array<const char*, 4> kMetricNames = {"dice", "hd95", "lw_dice",
                                                     "lw_hd95"};

struct DatasetReport {
  std::vector<CaseRow> rows;  // sorted by case_id
  // aggregates[region][metric], metric order per kMetricNames
  std::array<std::array<Aggregate, 4>, 3> aggregates{};
  nlohmann::json run_config;
  std::string tool_version;
  std::string timestamp;

  std::size_t failed_cases() const;
};

// shortest round-trip decimal form of a double (>= 9 significant digits)
std::string format_double(double v);

DatasetReport build_report(std::vector<CaseRow> rows, nlohmann::json run_config);

// columns: case_id,region,dice,hd95,lw_dice,lw_hd95,n_gt_lesions,n_tp,n_fn,n_fp,error
void write_csv(const DatasetReport& report, std::ostream& os);
nlohmann::json report_to_json(const DatasetReport& report);

}  // namespace segeval
