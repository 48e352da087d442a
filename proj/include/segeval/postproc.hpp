#pragma once

// Post-processing of predicted region probabilities: threshold cascade to
// hard labels, small low-confidence component removal, filling of enclosed
// enhancing-tumor cores, and probability ensembling.

#include <vector>

#include "segeval/morphology.hpp"
#include "segeval/volume.hpp"

namespace segeval {

struct PostprocRules {
  // per-class component volume floors, mm^3
  double min_mm3_ncr = 75.0;
  double min_mm3_ed = 500.0;
  double min_mm3_et = 75.0;
  // components below the floor survive when their mean confidence reaches this
  double confidence_ceiling = 0.9;
  // region probability thresholds for the label cascade
  double threshold_wt = 0.5;
  double threshold_tc = 0.6;
  double threshold_et = 0.6;
  // pipeline stage toggles
  bool region_removal = true;
  bool center_fill = true;
  Connectivity connectivity = Connectivity::Vertex26;

  double min_mm3(std::uint8_t class_code) const;
};

// Per voxel: ET when p_ET >= t_ET, else NCR when p_TC >= t_TC, else ED when
// p_WT >= t_WT, else background. The cascade makes ET <= TC <= WT hold by
// construction.
LabelVolume threshold_compose(const ProbVolume& probs,
                              const PostprocRules& rules = {});

// Components of each tissue class smaller than the class floor whose mean
// confidence is below the ceiling become background. Confidence channels:
// ET reads p_ET, NCR reads p_TC, ED reads p_WT (the tightest enclosing
// region probability). Without probabilities the confidence test is
// treated as satisfied.
LabelVolume remove_small_regions(const LabelVolume& lv, const ProbVolume* probs,
                                 const PostprocRules& rules = {});

// Voxels fully enclosed by enhancing tumor become NCR, whatever they were.
LabelVolume center_fill(const LabelVolume& lv);

// voxel-wise, channel-wise arithmetic mean
ProbVolume ensemble_mean(const std::vector<ProbVolume>& inputs);

// ensemble -> threshold -> region removal -> center fill
LabelVolume run_pipeline(const ProbVolume& probs,
                         const PostprocRules& rules = {});
LabelVolume run_pipeline(const std::vector<ProbVolume>& inputs,
                         const PostprocRules& rules = {});

// alternative fold fusion: per-voxel majority vote over per-fold pipeline
// outputs, ties resolved toward the smaller class code
LabelVolume run_pipeline_vote(const std::vector<ProbVolume>& inputs,
                              const PostprocRules& rules = {});

}  // namespace segeval
