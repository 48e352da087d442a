#include "segeval/postproc.hpp"

#include <algorithm>

namespace segeval {

double PostprocRules::min_mm3(std::uint8_t class_code) const {
  switch (class_code) {
    case labels::ncr: return min_mm3_ncr;
    case labels::ed: return min_mm3_ed;
    case labels::et: return min_mm3_et;
  }
  return 0.0;
}

LabelVolume threshold_compose(const ProbVolume& probs,
                              const PostprocRules& rules) {
  LabelVolume out = make_label_volume(probs.dims, probs.spacing);
  const std::vector<float>& wt = probs.channel(RegionId::WT);
  const std::vector<float>& tc = probs.channel(RegionId::TC);
  const std::vector<float>& et = probs.channel(RegionId::ET);
  const float t_wt = static_cast<float>(rules.threshold_wt);
  const float t_tc = static_cast<float>(rules.threshold_tc);
  const float t_et = static_cast<float>(rules.threshold_et);
  for (std::size_t i = 0; i < out.voxels.size(); i++) {
    if (et[i] >= t_et)
      out.voxels[i] = labels::et;
    else if (tc[i] >= t_tc)
      out.voxels[i] = labels::ncr;
    else if (wt[i] >= t_wt)
      out.voxels[i] = labels::ed;
  }
  return out;
}

namespace {

// confidence channel per class: the tightest region containing it
RegionId confidence_region(std::uint8_t class_code) {
  switch (class_code) {
    case labels::et: return RegionId::ET;
    case labels::ncr: return RegionId::TC;
    default: return RegionId::WT;
  }
}

}  // namespace

LabelVolume remove_small_regions(const LabelVolume& lv, const ProbVolume* probs,
                                 const PostprocRules& rules) {
  require_canonical(lv);
  if (probs) require_same_geometry(lv, *probs, "remove_small_regions");

  LabelVolume out = lv;
  for (std::uint8_t cls : {labels::ncr, labels::ed, labels::et}) {
    BinaryMask mask = make_mask(lv.dims, lv.spacing);
    bool any = false;
    for (std::size_t i = 0; i < lv.voxels.size(); i++) {
      mask.voxels[i] = lv.voxels[i] == cls;
      any |= mask.voxels[i] != 0;
    }
    if (!any) continue;

    const ComponentMap cm = connected_components(mask, rules.connectivity);
    const std::vector<float>* conf =
        probs ? &probs->channel(confidence_region(cls)) : nullptr;

    std::vector<double> mean_conf(cm.count(), 0.0);
    if (conf) {
      for (std::size_t i = 0; i < lv.voxels.size(); i++) {
        const std::uint32_t id = cm.ids[i];
        if (id) mean_conf[id - 1] += static_cast<double>((*conf)[i]);
      }
      for (std::uint32_t k = 0; k < cm.count(); k++)
        mean_conf[k] /= static_cast<double>(cm.stats[k].voxel_count);
    }

    std::vector<std::uint8_t> remove(cm.count(), 0);
    for (std::uint32_t k = 0; k < cm.count(); k++) {
      const bool small = cm.stats[k].volume_mm3 < rules.min_mm3(cls);
      const bool weak = !conf || mean_conf[k] < rules.confidence_ceiling;
      remove[k] = small && weak;
    }
    for (std::size_t i = 0; i < lv.voxels.size(); i++) {
      const std::uint32_t id = cm.ids[i];
      if (id && remove[id - 1]) out.voxels[i] = labels::background;
    }
  }
  return out;
}

LabelVolume center_fill(const LabelVolume& lv) {
  require_canonical(lv);
  BinaryMask et = make_mask(lv.dims, lv.spacing);
  for (std::size_t i = 0; i < lv.voxels.size(); i++)
    et.voxels[i] = lv.voxels[i] == labels::et;

  const BinaryMask holes = interior_holes(et);
  LabelVolume out = lv;
  for (std::size_t i = 0; i < lv.voxels.size(); i++)
    if (holes.voxels[i]) out.voxels[i] = labels::ncr;
  return out;
}

ProbVolume ensemble_mean(const std::vector<ProbVolume>& inputs) {
  if (inputs.empty()) throw EmptyEnsemble("ensemble needs at least one input");
  for (std::size_t k = 1; k < inputs.size(); k++)
    require_same_geometry(inputs[0], inputs[k], "ensemble_mean");

  ProbVolume out = make_prob_volume(inputs[0].dims, inputs[0].spacing);
  const std::size_t n = out.dims.count();
  const double scale = 1.0 / static_cast<double>(inputs.size());
  for (int c = 0; c < 3; c++) {
    std::vector<float>& dst = out.channels[c];
    for (std::size_t i = 0; i < n; i++) {
      double sum = 0;
      for (const ProbVolume& pv : inputs) sum += pv.channels[c][i];
      dst[i] = static_cast<float>(sum * scale);
    }
  }
  return out;
}

LabelVolume run_pipeline(const ProbVolume& probs, const PostprocRules& rules) {
  LabelVolume lv = threshold_compose(probs, rules);
  if (rules.region_removal) lv = remove_small_regions(lv, &probs, rules);
  if (rules.center_fill) lv = center_fill(lv);
  return lv;
}

LabelVolume run_pipeline(const std::vector<ProbVolume>& inputs,
                         const PostprocRules& rules) {
  if (inputs.empty()) throw EmptyEnsemble("ensemble needs at least one input");
  if (inputs.size() == 1) return run_pipeline(inputs[0], rules);
  return run_pipeline(ensemble_mean(inputs), rules);
}

LabelVolume run_pipeline_vote(const std::vector<ProbVolume>& inputs,
                              const PostprocRules& rules) {
  if (inputs.empty()) throw EmptyEnsemble("ensemble needs at least one input");
  std::vector<LabelVolume> folds;
  folds.reserve(inputs.size());
  for (const ProbVolume& pv : inputs) folds.push_back(run_pipeline(pv, rules));

  LabelVolume out = folds[0];
  for (std::size_t i = 0; i < out.voxels.size(); i++) {
    std::array<int, 4> votes{};
    for (const LabelVolume& f : folds) votes[f.voxels[i]]++;
    int best = 0;
    for (int c = 1; c <= kMaxLabelCode; c++)
      if (votes[c] > votes[best]) best = c;
    out.voxels[i] = static_cast<std::uint8_t>(best);
  }
  return out;
}

}  // namespace segeval
