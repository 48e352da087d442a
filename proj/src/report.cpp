#include "segeval/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace segeval {

std::size_t DatasetReport::failed_cases() const {
  std::size_t n = 0;
  for (const CaseRow& r : rows) n += !r.error.empty();
  return n;
}

std::string format_double(double v) {
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

namespace {

double metric_value(const RegionMetrics& rm, std::size_t metric) {
  switch (metric) {
    case 0: return rm.dice_percent;
    case 1: return rm.hd95_mm;
    case 2: return rm.lesionwise_dice_percent;
    default: return rm.lesionwise_hd95_mm;
  }
}

Aggregate aggregate_of(std::vector<double> values) {
  Aggregate a;
  a.n = values.size();
  if (values.empty()) return a;
  double sum = 0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(a.n);
  double var = 0;
  for (double v : values) var += (v - a.mean) * (v - a.mean);
  a.stddev = std::sqrt(var / static_cast<double>(a.n));
  std::sort(values.begin(), values.end());
  const std::size_t mid = a.n / 2;
  a.median = (a.n % 2) ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  return a;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

const char* kind_name(LesionKind k) {
  switch (k) {
    case LesionKind::TP: return "TP";
    case LesionKind::FN: return "FN";
    case LesionKind::FP: return "FP";
  }
  return "?";
}

}  // namespace

DatasetReport build_report(std::vector<CaseRow> rows, nlohmann::json run_config) {
  std::sort(rows.begin(), rows.end(),
            [](const CaseRow& a, const CaseRow& b) { return a.case_id < b.case_id; });

  DatasetReport rep;
  rep.rows = std::move(rows);
  rep.run_config = std::move(run_config);
  for (std::size_t r = 0; r < 3; r++) {
    for (std::size_t m = 0; m < 4; m++) {
      std::vector<double> values;
      for (const CaseRow& row : rep.rows)
        if (row.metrics) values.push_back(metric_value(row.metrics->regions[r], m));
      rep.aggregates[r][m] = aggregate_of(std::move(values));
    }
  }
  return rep;
}

void write_csv(const DatasetReport& report, std::ostream& os) {
  os << "case_id,region,dice,hd95,lw_dice,lw_hd95,n_gt_lesions,n_tp,n_fn,n_fp,error\n";
  for (const CaseRow& row : report.rows) {
    if (!row.error.empty()) {
      os << csv_escape(row.case_id) << ",,,,,,,,,," << csv_escape(row.error)
         << "\n";
      continue;
    }
    for (RegionId region : kAllRegions) {
      const RegionMetrics& rm = row.metrics->region(region);
      os << csv_escape(row.case_id) << ',' << region_name(region) << ','
         << format_double(rm.dice_percent) << ',' << format_double(rm.hd95_mm)
         << ',' << format_double(rm.lesionwise_dice_percent) << ','
         << format_double(rm.lesionwise_hd95_mm) << ',' << rm.n_gt_lesions()
         << ',' << rm.n_tp() << ',' << rm.n_fn() << ',' << rm.n_fp() << ",\n";
    }
  }
}

nlohmann::json report_to_json(const DatasetReport& report) {
  nlohmann::json j;
  j["tool"] = "segeval";
  j["version"] = report.tool_version;
  j["timestamp"] = report.timestamp;
  j["config"] = report.run_config;

  nlohmann::json cases = nlohmann::json::array();
  for (const CaseRow& row : report.rows) {
    nlohmann::json cj;
    cj["case_id"] = row.case_id;
    if (!row.error.empty()) {
      cj["error"] = row.error;
    } else {
      nlohmann::json regions;
      for (RegionId region : kAllRegions) {
        const RegionMetrics& rm = row.metrics->region(region);
        nlohmann::json rj;
        rj["dice"] = rm.dice_percent;
        rj["hd95"] = rm.hd95_mm;
        rj["lw_dice"] = rm.lesionwise_dice_percent;
        rj["lw_hd95"] = rm.lesionwise_hd95_mm;
        rj["n_gt_lesions"] = rm.n_gt_lesions();
        rj["n_tp"] = rm.n_tp();
        rj["n_fn"] = rm.n_fn();
        rj["n_fp"] = rm.n_fp();
        nlohmann::json lesions = nlohmann::json::array();
        for (const LesionRecord& rec : rm.lesions) {
          lesions.push_back({{"kind", kind_name(rec.kind)},
                             {"gt_lesion_id", rec.gt_lesion_id},
                             {"gt_voxels", rec.gt_voxels},
                             {"matched_pred_components", rec.matched_pred_components},
                             {"dice", rec.dice_percent},
                             {"hd95", rec.hd95_mm}});
        }
        rj["lesions"] = std::move(lesions);
        regions[region_name(region)] = std::move(rj);
      }
      cj["regions"] = std::move(regions);
    }
    cases.push_back(std::move(cj));
  }
  j["cases"] = std::move(cases);

  nlohmann::json aggregates;
  for (std::size_t r = 0; r < 3; r++) {
    nlohmann::json rj;
    for (std::size_t m = 0; m < 4; m++) {
      const Aggregate& a = report.aggregates[r][m];
      rj[kMetricNames[m]] = {
          {"mean", a.mean}, {"median", a.median}, {"stddev", a.stddev}, {"n", a.n}};
    }
    aggregates[region_name(kAllRegions[r])] = std::move(rj);
  }
  j["aggregates"] = std::move(aggregates);
  return j;
}

}  // namespace segeval
