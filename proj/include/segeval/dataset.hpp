#pragma once

// Directory pairing of prediction and ground-truth volumes by case id.

#include <string>
#include <vector>

#include "segeval/volume.hpp"

namespace segeval {

struct CasePair {
  std::string case_id;
  std::string pred_path;
  std::string gt_path;
};

struct PairResult {
  std::vector<CasePair> pairs;  // sorted by case_id
  std::vector<std::string> unmatched_pred;
  std::vector<std::string> unmatched_gt;
};

// Case ids come from the file name: by default the stem before the first
// '.', otherwise capture group 1 of the given regex. Only .nii / .nii.gz
// files are considered. Throws NoPairsFound when nothing matches and
// DuplicateCaseId when two files in one directory share an id.
PairResult pair_cases(const std::string& pred_dir, const std::string& gt_dir,
                      const std::string& id_pattern = "");

// id extraction for a single file name (exposed for the postprocess and
// ensemble commands, which pair probability directories the same way)
std::string case_id_from_filename(const std::string& filename,
                                  const std::string& id_pattern = "");

std::vector<std::pair<std::string, std::string>> list_volumes(
    const std::string& dir, const std::string& id_pattern = "");

}  // namespace segeval
