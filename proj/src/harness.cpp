#include "segeval/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "segeval/fixtures.hpp"
#include "segeval/version.hpp"

namespace segeval {

namespace fs = std::filesystem;

namespace {

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string two_decimals(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

// intersect case ids across the probability directories; each case keeps
// one path per fold
std::vector<std::pair<std::string, std::vector<std::string>>> pair_prob_dirs(
    const RunConfig& cfg, std::ostream& log) {
  if (cfg.pred_dirs.empty())
    throw ConfigError(cfg.command + " needs at least one --pred-dir");
  std::vector<std::pair<std::string, std::vector<std::string>>> cases;
  for (std::size_t d = 0; d < cfg.pred_dirs.size(); d++) {
    const auto vols = list_volumes(cfg.pred_dirs[d], cfg.pattern);
    if (d == 0) {
      for (const auto& [id, path] : vols) cases.push_back({id, {path}});
      continue;
    }
    std::map<std::string, std::string> by_id(vols.begin(), vols.end());
    std::vector<std::pair<std::string, std::vector<std::string>>> kept;
    for (auto& [id, paths] : cases) {
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        log << "warning: case " << id << " missing from " << cfg.pred_dirs[d]
            << ", skipped\n";
        continue;
      }
      paths.push_back(it->second);
      kept.push_back({id, std::move(paths)});
    }
    cases = std::move(kept);
  }
  if (cases.empty())
    throw NoPairsFound("no cases shared by all probability directories");
  return cases;
}

}  // namespace

nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["command"] = cfg.command;
  j["pred_dirs"] = cfg.pred_dirs;
  j["gt_dir"] = cfg.gt_dir;
  j["out"] = cfg.out;
  j["pattern"] = cfg.pattern;
  j["format"] = cfg.format;
  j["workers"] = cfg.workers;
  j["dilation_mm"] = cfg.lesionwise.dilation_radius_mm;
  j["connectivity"] = static_cast<int>(cfg.lesionwise.connectivity);
  if (cfg.lesionwise.fn_fp_hd95_penalty_mm)
    j["penalty_mm"] = *cfg.lesionwise.fn_fp_hd95_penalty_mm;
  else
    j["penalty_mm"] = nullptr;  // volume diagonal
  j["percentile"] = cfg.lesionwise.percentile;
  j["rules"] = {{"min_mm3", {{"ncr", cfg.rules.min_mm3_ncr},
                             {"ed", cfg.rules.min_mm3_ed},
                             {"et", cfg.rules.min_mm3_et}}},
                {"confidence", cfg.rules.confidence_ceiling},
                {"thresholds", {{"wt", cfg.rules.threshold_wt},
                                {"tc", cfg.rules.threshold_tc},
                                {"et", cfg.rules.threshold_et}}},
                {"region_removal", cfg.rules.region_removal},
                {"center_fill", cfg.rules.center_fill},
                {"connectivity", static_cast<int>(cfg.rules.connectivity)}};
  nlohmann::json remap = nlohmann::json::object();
  for (const auto& [from, to] : cfg.remap) remap[std::to_string(from)] = to;
  j["remap"] = std::move(remap);
  j["channel_order"] = {region_name(cfg.channel_order[0]),
                        region_name(cfg.channel_order[1]),
                        region_name(cfg.channel_order[2])};
  j["vote_labels"] = cfg.vote_labels;
  return j;
}

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn) {
  if (workers < 1) throw ConfigError("worker count must be >= 1");
  const std::size_t pool_size =
      std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  if (pool_size <= 1) {
    for (std::size_t i = 0; i < n; i++) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(pool_size);
  for (std::size_t w = 0; w < pool_size; w++) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (std::thread& t : pool) t.join();
}

int run_evaluate(const RunConfig& cfg, std::ostream& log) {
  if (cfg.pred_dirs.size() != 1)
    throw ConfigError("evaluate needs exactly one --pred-dir");
  if (cfg.gt_dir.empty()) throw ConfigError("evaluate needs --gt-dir");
  if (cfg.out.empty()) throw ConfigError("evaluate needs --out");
  if (cfg.format != "csv" && cfg.format != "json" && cfg.format != "both")
    throw ConfigError("--format must be csv, json or both");

  const PairResult pairing = pair_cases(cfg.pred_dirs[0], cfg.gt_dir, cfg.pattern);
  for (const std::string& id : pairing.unmatched_pred)
    log << "warning: prediction " << id << " has no ground-truth twin\n";
  for (const std::string& id : pairing.unmatched_gt)
    log << "warning: ground truth " << id << " has no prediction\n";

  std::vector<CaseRow> rows(pairing.pairs.size());
  parallel_for(pairing.pairs.size(), cfg.workers, [&](std::size_t i) {
    const CasePair& pair = pairing.pairs[i];
    rows[i].case_id = pair.case_id;
    try {
      const LabelVolume pred = read_label_volume(pair.pred_path, cfg.remap);
      const LabelVolume gt = read_label_volume(pair.gt_path, cfg.remap);
      rows[i].metrics = evaluate_case(pred, gt, cfg.lesionwise, pair.case_id);
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  });

  DatasetReport report = build_report(std::move(rows), config_to_json(cfg));
  report.tool_version = kToolVersion;
  report.timestamp = utc_timestamp();

  ensure_parent_dir(cfg.out);
  if (cfg.format == "csv" || cfg.format == "both") {
    std::ofstream f(cfg.out + ".csv", std::ios::trunc);
    if (!f) throw IoFailure("cannot write " + cfg.out + ".csv");
    write_csv(report, f);
  }
  if (cfg.format == "json" || cfg.format == "both") {
    std::ofstream f(cfg.out + ".json", std::ios::trunc);
    if (!f) throw IoFailure("cannot write " + cfg.out + ".json");
    f << report_to_json(report).dump(2) << "\n";
  }

  log << "evaluated " << report.rows.size() << " case(s), "
      << report.failed_cases() << " failed\n";
  log << "region   dice     hd95     lw_dice  lw_hd95  (means)\n";
  for (std::size_t r = 0; r < 3; r++) {
    log << region_name(kAllRegions[r]);
    for (std::size_t m = 0; m < 4; m++) {
      const std::string v = two_decimals(report.aggregates[r][m].mean);
      log << std::string(9 - std::min<std::size_t>(v.size(), 8), ' ') << v;
    }
    log << "\n";
  }
  return report.failed_cases() ? 1 : 0;
}

int run_postprocess(const RunConfig& cfg, std::ostream& log) {
  if (cfg.out.empty()) throw ConfigError("postprocess needs --out");
  const auto cases = pair_prob_dirs(cfg, log);
  fs::create_directories(cfg.out);

  std::vector<std::string> errors(cases.size());
  parallel_for(cases.size(), cfg.workers, [&](std::size_t i) {
    const auto& [id, paths] = cases[i];
    try {
      std::vector<ProbVolume> folds;
      folds.reserve(paths.size());
      for (const std::string& p : paths)
        folds.push_back(read_prob_volume(p, cfg.channel_order));
      const LabelVolume out = cfg.vote_labels
                                  ? run_pipeline_vote(folds, cfg.rules)
                                  : run_pipeline(folds, cfg.rules);
      write_label_volume((fs::path(cfg.out) / (id + ".nii.gz")).string(), out);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  int failed = 0;
  for (std::size_t i = 0; i < cases.size(); i++) {
    if (!errors[i].empty()) {
      failed++;
      log << "error: case " << cases[i].first << ": " << errors[i] << "\n";
    }
  }
  log << "post-processed " << (cases.size() - failed) << " of " << cases.size()
      << " case(s)\n";
  return failed ? 1 : 0;
}

int run_ensemble(const RunConfig& cfg, std::ostream& log) {
  if (cfg.out.empty()) throw ConfigError("ensemble needs --out");
  const auto cases = pair_prob_dirs(cfg, log);
  fs::create_directories(cfg.out);

  std::vector<std::string> errors(cases.size());
  parallel_for(cases.size(), cfg.workers, [&](std::size_t i) {
    const auto& [id, paths] = cases[i];
    try {
      std::vector<ProbVolume> folds;
      folds.reserve(paths.size());
      for (const std::string& p : paths)
        folds.push_back(read_prob_volume(p, cfg.channel_order));
      const ProbVolume mean = ensemble_mean(folds);
      write_prob_volume((fs::path(cfg.out) / (id + ".nii.gz")).string(), mean,
                        cfg.channel_order);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  int failed = 0;
  for (std::size_t i = 0; i < cases.size(); i++) {
    if (!errors[i].empty()) {
      failed++;
      log << "error: case " << cases[i].first << ": " << errors[i] << "\n";
    }
  }
  log << "ensembled " << (cases.size() - failed) << " of " << cases.size()
      << " case(s)\n";
  return failed ? 1 : 0;
}

int run_fixtures(const RunConfig& cfg, std::ostream& log) {
  if (cfg.fixture_spec.empty()) throw ConfigError("fixtures needs --spec");
  if (cfg.out.empty()) throw ConfigError("fixtures needs --out");
  const auto cases = fixture_cases_from_json_file(cfg.fixture_spec);
  fs::create_directories(fs::path(cfg.out) / "labels");
  fs::create_directories(fs::path(cfg.out) / "probs");

  std::vector<std::string> errors(cases.size());
  parallel_for(cases.size(), cfg.workers, [&](std::size_t i) {
    const auto& [id, spec] = cases[i];
    try {
      const Fixture fx = generate(spec);
      write_label_volume(
          (fs::path(cfg.out) / "labels" / (id + ".nii.gz")).string(), fx.labels);
      write_prob_volume((fs::path(cfg.out) / "probs" / (id + ".nii.gz")).string(),
                        fx.probs, cfg.channel_order);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < cases.size(); i++) {
    if (!errors[i].empty())
      throw ConfigError("fixture case " + cases[i].first + ": " + errors[i]);
  }
  log << "wrote " << cases.size() << " fixture case(s) under " << cfg.out << "\n";
  return 0;
}

}  // namespace segeval
