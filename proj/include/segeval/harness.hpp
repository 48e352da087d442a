#pragma once

// Batch commands behind the CLI: dataset evaluation, post-processing and
// ensembling with a fixed-size worker pool, plus fixture generation.
// Exit codes: 0 success, 1 at least one case failed, 2 usage/config error.

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "segeval/dataset.hpp"
#include "segeval/metrics.hpp"
#include "segeval/nifti.hpp"
#include "segeval/postproc.hpp"
#include "segeval/report.hpp"

namespace segeval {

struct RunConfig {
  std::string command;
  std::vector<std::string> pred_dirs;  // evaluate reads pred_dirs[0]
  std::string gt_dir;
  std::string out;      // evaluate: report path prefix; otherwise output dir
  std::string pattern;  // case-id regex, capture group 1; empty = stem
  std::string format = "both";  // csv | json | both
  int workers = 1;
  LesionwiseParams lesionwise;
  PostprocRules rules;
  LabelRemap remap = default_label_remap();
  ChannelOrder channel_order = kDefaultChannelOrder;
  bool vote_labels = false;      // fuse folds by label vote instead of
                                 // probability averaging
  std::string fixture_spec;      // fixtures command input
};

nlohmann::json config_to_json(const RunConfig& cfg);

// dispatch i = 0..n-1 over the pool; fn must handle its own errors
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& fn);

int run_evaluate(const RunConfig& cfg, std::ostream& log);
int run_postprocess(const RunConfig& cfg, std::ostream& log);
int run_ensemble(const RunConfig& cfg, std::ostream& log);
int run_fixtures(const RunConfig& cfg, std::ostream& log);

}  // namespace segeval
