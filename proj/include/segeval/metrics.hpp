#pragma once

// Classic and lesion-wise Dice / HD95 per composite tumor region.
//
// Lesion-wise scoring: ground-truth lesions are the connected components of
// the dilated ground truth; prediction components are matched to every
// lesion whose dilated zone they touch; unmatched lesions and predictions
// score zero Dice and the HD95 penalty.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "segeval/morphology.hpp"
#include "segeval/volume.hpp"

namespace segeval {

struct LesionwiseParams {
  double dilation_radius_mm = 1.0;  // 3x3x3 voxel kernel at 1 mm spacing
  Connectivity connectivity = Connectivity::Vertex26;
  // HD95 charged to false negatives / false positives; when unset, the
  // physical diagonal of the volume (373.13 mm at 240x240x155, 1 mm)
  std::optional<double> fn_fp_hd95_penalty_mm;
  double percentile = 95.0;
};

// diagonal of the physical bounding box, the default FN/FP penalty
double volume_diagonal_mm(const Dims& dims, const Spacing& spacing);

enum class LesionKind { TP, FN, FP };

struct LesionRecord {
  RegionId region = RegionId::WT;
  std::uint32_t gt_lesion_id = 0;  // 0 on FP records
  std::uint64_t gt_voxels = 0;
  std::vector<std::uint32_t> matched_pred_components;
  double dice_percent = 0;
  double hd95_mm = 0;
  LesionKind kind = LesionKind::TP;
};

struct LesionwiseResult {
  std::vector<LesionRecord> records;
  double dice_percent = 0;
  double hd95_mm = 0;
};

struct RegionMetrics {
  double dice_percent = 0;
  double hd95_mm = 0;
  double lesionwise_dice_percent = 0;
  double lesionwise_hd95_mm = 0;
  std::vector<LesionRecord> lesions;

  std::size_t n_gt_lesions() const;
  std::size_t n_tp() const;
  std::size_t n_fn() const;
  std::size_t n_fp() const;
};

struct CaseMetrics {
  std::string case_id;
  std::array<RegionMetrics, 3> regions;  // indexed by RegionId

  const RegionMetrics& region(RegionId r) const {
    return regions[static_cast<std::size_t>(r)];
  }
};

// 100 * 2|A.B| / (|A|+|B|); both empty scores 100, exactly one empty 0
double dice(const BinaryMask& pred, const BinaryMask& gt);

// Percentile (linear interpolation between closest ranks) of the pooled
// surface-to-surface distances in both directions. Both empty: 0; exactly
// one empty: the penalty.
double hd95(const BinaryMask& pred, const BinaryMask& gt,
            double percentile = 95.0,
            std::optional<double> penalty_mm = std::nullopt);

LesionwiseResult lesionwise(const BinaryMask& pred, const BinaryMask& gt,
                            const LesionwiseParams& params = {});

CaseMetrics evaluate_case(const LabelVolume& pred, const LabelVolume& gt,
                          const LesionwiseParams& params = {},
                          const std::string& case_id = "");

}  // namespace segeval
