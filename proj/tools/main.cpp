// segeval: lesion-wise evaluation and post-processing of volumetric
// brain-tumor segmentations stored as NIfTI-1 label/probability maps.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "segeval/harness.hpp"
#include "segeval/version.hpp"

namespace {

using segeval::ConfigError;
using segeval::RunConfig;

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, delim)) out.push_back(item);
  return out;
}

// "ncr=75,et=75,ed=500"
void apply_min_mm3(const std::string& text, segeval::PostprocRules& rules) {
  for (const std::string& part : split(text, ',')) {
    const std::size_t eq = part.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--min-mm3 expects class=value pairs, got \"" + part + "\"");
    const std::string key = part.substr(0, eq);
    const double value = std::stod(part.substr(eq + 1));
    if (value < 0) throw ConfigError("--min-mm3 values must be >= 0");
    if (key == "ncr")
      rules.min_mm3_ncr = value;
    else if (key == "ed")
      rules.min_mm3_ed = value;
    else if (key == "et")
      rules.min_mm3_et = value;
    else
      throw ConfigError("--min-mm3 class must be ncr, ed or et, got \"" + key + "\"");
  }
}

// "4=3,5=1"
segeval::LabelRemap parse_remap(const std::string& text) {
  segeval::LabelRemap remap;
  if (text == "none") return remap;
  for (const std::string& part : split(text, ',')) {
    const std::size_t eq = part.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--remap expects from=to pairs, got \"" + part + "\"");
    remap[std::stoi(part.substr(0, eq))] = std::stoi(part.substr(eq + 1));
  }
  return remap;
}

segeval::ChannelOrder parse_channel_order(const std::string& text) {
  const std::vector<std::string> parts = split(text, ',');
  if (parts.size() != 3)
    throw ConfigError("--channel-order expects three comma-separated regions");
  segeval::ChannelOrder order;
  for (int i = 0; i < 3; i++) {
    if (parts[i] == "wt" || parts[i] == "WT")
      order[i] = segeval::RegionId::WT;
    else if (parts[i] == "tc" || parts[i] == "TC")
      order[i] = segeval::RegionId::TC;
    else if (parts[i] == "et" || parts[i] == "ET")
      order[i] = segeval::RegionId::ET;
    else
      throw ConfigError("unknown region \"" + parts[i] + "\" in --channel-order");
  }
  return order;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "segeval - lesion-wise Dice/HD95 evaluation and post-processing of "
      "volumetric tumor segmentations (NIfTI-1)"};
  app.set_version_flag("--version", segeval::kToolVersion);
  app.set_config("--config", "", "read options from a key=value file");
  app.require_subcommand(0, 1);

  RunConfig cfg;
  std::string min_mm3_text, remap_text = "4=3", channel_order_text = "wt,tc,et";
  int connectivity = 26;
  double penalty_mm = -1;  // <0 keeps the volume-diagonal default
  bool dump_config = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--pred-dir", cfg.pred_dirs,
                    "directory of prediction volumes (repeatable where folds "
                    "are ensembled)");
    sub->add_option("--out", cfg.out, "output path prefix or directory");
    sub->add_option("--pattern", cfg.pattern,
                    "case-id regex (capture group 1); default: stem before "
                    "the first '.'");
    sub->add_option("--workers", cfg.workers, "parallel case workers")
        ->check(CLI::PositiveNumber);
    sub->add_option("--connectivity", connectivity,
                    "component adjacency: 6, 18 or 26")
        ->check(CLI::IsMember({6, 18, 26}));
    sub->add_flag("--dump-config", dump_config,
                  "print the effective configuration as JSON and exit");
    return sub;
  };

  CLI::App* evaluate = add_common(app.add_subcommand(
      "evaluate", "score predictions against ground truth labels"));
  evaluate->add_option("--gt-dir", cfg.gt_dir, "directory of ground-truth labels");
  evaluate->add_option("--format", cfg.format, "report formats: csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  evaluate->add_option("--dilation-mm", cfg.lesionwise.dilation_radius_mm,
                       "ground-truth dilation radius for lesion matching");
  evaluate->add_option("--penalty-mm", penalty_mm,
                       "HD95 charged to FN/FP lesions (default: volume diagonal)");
  evaluate->add_option("--percentile", cfg.lesionwise.percentile,
                       "surface-distance percentile");
  evaluate->add_option("--remap", remap_text,
                       "label ingestion remap, e.g. 4=3 (use 'none' to disable)");

  CLI::App* postprocess = add_common(app.add_subcommand(
      "postprocess", "turn probability maps into post-processed label maps"));
  postprocess->add_option("--t-wt", cfg.rules.threshold_wt, "WT probability threshold")
      ->check(CLI::Range(0.0, 1.0));
  postprocess->add_option("--t-tc", cfg.rules.threshold_tc, "TC probability threshold")
      ->check(CLI::Range(0.0, 1.0));
  postprocess->add_option("--t-et", cfg.rules.threshold_et, "ET probability threshold")
      ->check(CLI::Range(0.0, 1.0));
  postprocess->add_option("--min-mm3", min_mm3_text,
                          "component volume floors, e.g. ncr=75,et=75,ed=500");
  postprocess->add_option("--confidence", cfg.rules.confidence_ceiling,
                          "mean-confidence ceiling below which small components "
                          "are removed")
      ->check(CLI::Range(0.0, 1.0));
  postprocess->add_flag_callback(
      "--no-region-removal", [&] { cfg.rules.region_removal = false; },
      "skip the small-component removal stage");
  postprocess->add_flag_callback(
      "--no-center-fill", [&] { cfg.rules.center_fill = false; },
      "skip relabeling of enclosed enhancing-tumor cores");
  postprocess->add_flag("--vote-labels", cfg.vote_labels,
                        "fuse folds by per-voxel label vote instead of "
                        "probability averaging");
  postprocess->add_option("--channel-order", channel_order_text,
                          "region order of probability channels");

  CLI::App* ensemble = add_common(app.add_subcommand(
      "ensemble", "average probability maps across folds"));
  ensemble->add_option("--channel-order", channel_order_text,
                       "region order of probability channels");

  CLI::App* fixtures = add_common(app.add_subcommand(
      "fixtures", "write synthetic label/probability volumes from a spec"));
  fixtures->add_option("--spec", cfg.fixture_spec, "fixture spec JSON file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    cfg.remap = parse_remap(remap_text);
    cfg.channel_order = parse_channel_order(channel_order_text);
    if (!min_mm3_text.empty()) apply_min_mm3(min_mm3_text, cfg.rules);
    cfg.lesionwise.connectivity = segeval::connectivity_from_int(connectivity);
    cfg.rules.connectivity = cfg.lesionwise.connectivity;
    if (penalty_mm >= 0) cfg.lesionwise.fn_fp_hd95_penalty_mm = penalty_mm;

    if (app.got_subcommand(evaluate)) cfg.command = "evaluate";
    else if (app.got_subcommand(postprocess)) cfg.command = "postprocess";
    else if (app.got_subcommand(ensemble)) cfg.command = "ensemble";
    else if (app.got_subcommand(fixtures)) cfg.command = "fixtures";
    else {
      std::cerr << app.help();
      return 2;
    }

    if (dump_config) {
      std::cout << segeval::config_to_json(cfg).dump(2) << "\n";
      return 0;
    }
    if (cfg.command == "evaluate") return segeval::run_evaluate(cfg, std::cerr);
    if (cfg.command == "postprocess") return segeval::run_postprocess(cfg, std::cerr);
    if (cfg.command == "ensemble") return segeval::run_ensemble(cfg, std::cerr);
    return segeval::run_fixtures(cfg, std::cerr);
  } catch (const segeval::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
