#include "segeval/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <map>
#include <regex>

namespace segeval {

namespace fs = std::filesystem;

namespace {

bool is_nifti_name(const std::string& name) {
  auto ends_with = [&](const char* suffix) {
    const std::size_t len = std::strlen(suffix);
    return name.size() >= len &&
           name.compare(name.size() - len, len, suffix) == 0;
  };
  return ends_with(".nii") || ends_with(".nii.gz");
}

}  // namespace

std::string case_id_from_filename(const std::string& filename,
                                  const std::string& id_pattern) {
  if (id_pattern.empty()) {
    const std::size_t dot = filename.find('.');
    return dot == std::string::npos ? filename : filename.substr(0, dot);
  }
  std::regex re;
  try {
    re = std::regex(id_pattern);
  } catch (const std::regex_error& e) {
    throw ConfigError("bad case-id pattern \"" + id_pattern + "\": " + e.what());
  }
  std::smatch m;
  if (!std::regex_search(filename, m, re)) return "";
  return m.size() > 1 ? m[1].str() : m[0].str();
}

std::vector<std::pair<std::string, std::string>> list_volumes(
    const std::string& dir, const std::string& id_pattern) {
  if (!fs::is_directory(dir)) throw IoFailure(dir + " is not a directory");
  std::map<std::string, std::string> by_id;
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (!is_nifti_name(name)) continue;
    const std::string id = case_id_from_filename(name, id_pattern);
    if (id.empty()) continue;
    auto [it, inserted] = by_id.emplace(id, entry.path().string());
    if (!inserted)
      throw DuplicateCaseId("case id \"" + id + "\" maps to both " +
                            it->second + " and " + entry.path().string());
  }
  out.assign(by_id.begin(), by_id.end());
  return out;
}

PairResult pair_cases(const std::string& pred_dir, const std::string& gt_dir,
                      const std::string& id_pattern) {
  const auto preds = list_volumes(pred_dir, id_pattern);
  const auto gts = list_volumes(gt_dir, id_pattern);
  std::map<std::string, std::string> gt_by_id(gts.begin(), gts.end());

  PairResult res;
  std::map<std::string, bool> gt_used;
  for (const auto& [id, path] : preds) {
    auto it = gt_by_id.find(id);
    if (it == gt_by_id.end()) {
      res.unmatched_pred.push_back(id);
    } else {
      res.pairs.push_back(CasePair{id, path, it->second});
      gt_used[id] = true;
    }
  }
  for (const auto& [id, path] : gts)
    if (!gt_used.count(id)) res.unmatched_gt.push_back(id);

  if (res.pairs.empty())
    throw NoPairsFound("no prediction/ground-truth pairs between " + pred_dir +
                       " and " + gt_dir);
  return res;  // maps iterate sorted, so pairs are ordered by case_id
}

}  // namespace segeval
