#include "segeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace segeval {

double volume_diagonal_mm(const Dims& dims, const Spacing& spacing) {
  const double ex = static_cast<double>(dims.nx) * spacing.dx;
  const double ey = static_cast<double>(dims.ny) * spacing.dy;
  const double ez = static_cast<double>(dims.nz) * spacing.dz;
  return std::sqrt(ex * ex + ey * ey + ez * ez);
}

std::size_t RegionMetrics::n_gt_lesions() const {
  std::size_t n = 0;
  for (const auto& r : lesions) n += r.kind != LesionKind::FP;
  return n;
}
std::size_t RegionMetrics::n_tp() const {
  std::size_t n = 0;
  for (const auto& r : lesions) n += r.kind == LesionKind::TP;
  return n;
}
std::size_t RegionMetrics::n_fn() const {
  std::size_t n = 0;
  for (const auto& r : lesions) n += r.kind == LesionKind::FN;
  return n;
}
std::size_t RegionMetrics::n_fp() const {
  std::size_t n = 0;
  for (const auto& r : lesions) n += r.kind == LesionKind::FP;
  return n;
}

double dice(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_geometry(pred, gt, "dice");
  std::size_t a = 0, b = 0, both = 0;
  for (std::size_t i = 0; i < pred.voxels.size(); i++) {
    const bool p = pred.voxels[i] != 0, g = gt.voxels[i] != 0;
    a += p;
    b += g;
    both += p && g;
  }
  if (a + b == 0) return 100.0;
  return 100.0 * 2.0 * static_cast<double>(both) / static_cast<double>(a + b);
}

namespace {

struct Box {
  Voxel lo, hi;  // inclusive
};

bool mask_bbox(const BinaryMask& m, Box& out) {
  const auto [nx, ny, nz] = m.dims;
  bool any = false;
  std::size_t i = 0;
  for (std::int64_t z = 0; z < nz; z++) {
    for (std::int64_t y = 0; y < ny; y++) {
      for (std::int64_t x = 0; x < nx; x++, i++) {
        if (!m.voxels[i]) continue;
        if (!any) {
          out.lo = out.hi = Voxel{x, y, z};
          any = true;
        } else {
          out.lo.x = std::min(out.lo.x, x);
          out.lo.y = std::min(out.lo.y, y);
          out.lo.z = std::min(out.lo.z, z);
          out.hi.x = std::max(out.hi.x, x);
          out.hi.y = std::max(out.hi.y, y);
          out.hi.z = std::max(out.hi.z, z);
        }
      }
    }
  }
  return any;
}

BinaryMask crop(const BinaryMask& m, const Box& box) {
  BinaryMask out;
  out.dims = Dims{box.hi.x - box.lo.x + 1, box.hi.y - box.lo.y + 1,
                  box.hi.z - box.lo.z + 1};
  out.spacing = m.spacing;
  out.voxels.resize(out.dims.count());
  for (std::int64_t z = 0; z < out.dims.nz; z++)
    for (std::int64_t y = 0; y < out.dims.ny; y++)
      for (std::int64_t x = 0; x < out.dims.nx; x++)
        out.voxels[out.dims.index(x, y, z)] =
            m.voxels[m.dims.index(x + box.lo.x, y + box.lo.y, z + box.lo.z)];
  return out;
}

// linear interpolation between the closest ranks of the sorted values
double percentile_interp(std::vector<double>& values, double p) {
  std::sort(values.begin(), values.end());
  const double rank = (p / 100.0) * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(rank);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

// directed surface distances pooled from both masks; masks must be nonempty
std::vector<double> pooled_surface_distances(const BinaryMask& a,
                                             const BinaryMask& b) {
  // EDT cost depends on the joint bounding box, not the volume, and the
  // crop is exact because every source and query voxel lies inside it
  Box ba, bb;
  mask_bbox(a, ba);
  mask_bbox(b, bb);
  const Box joint{Voxel{std::min(ba.lo.x, bb.lo.x), std::min(ba.lo.y, bb.lo.y),
                        std::min(ba.lo.z, bb.lo.z)},
                  Voxel{std::max(ba.hi.x, bb.hi.x), std::max(ba.hi.y, bb.hi.y),
                        std::max(ba.hi.z, bb.hi.z)}};
  const BinaryMask ca = crop(a, joint);
  const BinaryMask cb = crop(b, joint);

  const std::vector<Voxel> sa = surface_voxels(ca);
  const std::vector<Voxel> sb = surface_voxels(cb);

  BinaryMask surf_a = make_mask(ca.dims, ca.spacing);
  for (const Voxel& v : sa) surf_a.voxels[ca.dims.index(v.x, v.y, v.z)] = 1;
  BinaryMask surf_b = make_mask(cb.dims, cb.spacing);
  for (const Voxel& v : sb) surf_b.voxels[cb.dims.index(v.x, v.y, v.z)] = 1;

  const std::vector<double> dist_to_a = distance_transform(surf_a);
  const std::vector<double> dist_to_b = distance_transform(surf_b);

  std::vector<double> pooled;
  pooled.reserve(sa.size() + sb.size());
  for (const Voxel& v : sa) pooled.push_back(dist_to_b[ca.dims.index(v.x, v.y, v.z)]);
  for (const Voxel& v : sb) pooled.push_back(dist_to_a[cb.dims.index(v.x, v.y, v.z)]);
  return pooled;
}

}  // namespace

double hd95(const BinaryMask& pred, const BinaryMask& gt, double percentile,
            std::optional<double> penalty_mm) {
  require_same_geometry(pred, gt, "hd95");
  if (!(percentile > 0 && percentile <= 100))
    throw ConfigError("percentile must lie in (0, 100]");
  const bool pe = pred.foreground_count() == 0;
  const bool ge = gt.foreground_count() == 0;
  if (pe && ge) return 0.0;
  if (pe || ge)
    return penalty_mm ? *penalty_mm : volume_diagonal_mm(gt.dims, gt.spacing);

  std::vector<double> pooled = pooled_surface_distances(pred, gt);
  return percentile_interp(pooled, percentile);
}

LesionwiseResult lesionwise(const BinaryMask& pred, const BinaryMask& gt,
                            const LesionwiseParams& params) {
  require_same_geometry(pred, gt, "lesionwise");
  const double penalty = params.fn_fp_hd95_penalty_mm
                             ? *params.fn_fp_hd95_penalty_mm
                             : volume_diagonal_mm(gt.dims, gt.spacing);

  LesionwiseResult res;
  const bool gt_empty = gt.foreground_count() == 0;
  const bool pred_empty = pred.foreground_count() == 0;
  if (gt_empty && pred_empty) {
    res.dice_percent = 100.0;
    res.hd95_mm = 0.0;
    return res;
  }

  // zones: connected components of the dilated ground truth
  ComponentMap zones;
  if (!gt_empty)
    zones = connected_components(dilate(gt, params.dilation_radius_mm),
                                 params.connectivity);
  else {
    zones.dims = gt.dims;
    zones.spacing = gt.spacing;
    zones.ids.assign(gt.voxels.size(), 0);
  }
  const ComponentMap preds = connected_components(pred, params.connectivity);

  const std::uint32_t n_lesions = zones.count();
  const std::uint32_t n_preds = preds.count();

  // any voxel overlap between a prediction component and a zone is a match
  std::vector<std::vector<std::uint32_t>> lesion_matches(n_lesions);
  std::vector<std::uint8_t> pred_matched(n_preds, 0);
  std::unordered_set<std::uint64_t> seen;
  for (std::size_t i = 0; i < pred.voxels.size(); i++) {
    const std::uint32_t pj = preds.ids[i];
    const std::uint32_t zi = zones.ids[i];
    if (pj == 0 || zi == 0) continue;
    const std::uint64_t key = (static_cast<std::uint64_t>(zi) << 32) | pj;
    if (seen.insert(key).second) {
      lesion_matches[zi - 1].push_back(pj);
      pred_matched[pj - 1] = 1;
    }
  }
  for (auto& m : lesion_matches) std::sort(m.begin(), m.end());

  double dice_sum = 0, hd_sum = 0;
  for (std::uint32_t li = 1; li <= n_lesions; li++) {
    LesionRecord rec;
    rec.gt_lesion_id = li;
    rec.matched_pred_components = lesion_matches[li - 1];

    // the lesion itself is the undilated ground truth inside its zone
    BinaryMask lesion = make_mask(gt.dims, gt.spacing);
    std::uint64_t lesion_voxels = 0;
    for (std::size_t i = 0; i < gt.voxels.size(); i++) {
      if (gt.voxels[i] && zones.ids[i] == li) {
        lesion.voxels[i] = 1;
        lesion_voxels++;
      }
    }
    rec.gt_voxels = lesion_voxels;

    if (rec.matched_pred_components.empty()) {
      rec.kind = LesionKind::FN;
      rec.dice_percent = 0.0;
      rec.hd95_mm = penalty;
    } else {
      BinaryMask matched_union = make_mask(pred.dims, pred.spacing);
      for (std::size_t i = 0; i < pred.voxels.size(); i++) {
        const std::uint32_t pj = preds.ids[i];
        if (pj != 0 && std::binary_search(rec.matched_pred_components.begin(),
                                          rec.matched_pred_components.end(), pj))
          matched_union.voxels[i] = 1;
      }
      rec.kind = LesionKind::TP;
      rec.dice_percent = dice(matched_union, lesion);
      rec.hd95_mm = hd95(matched_union, lesion, params.percentile, penalty);
    }
    dice_sum += rec.dice_percent;
    hd_sum += rec.hd95_mm;
    res.records.push_back(std::move(rec));
  }

  std::uint32_t n_fp = 0;
  for (std::uint32_t pj = 1; pj <= n_preds; pj++) {
    if (pred_matched[pj - 1]) continue;
    n_fp++;
    LesionRecord rec;
    rec.kind = LesionKind::FP;
    rec.gt_lesion_id = 0;
    rec.gt_voxels = 0;
    rec.matched_pred_components = {pj};
    rec.dice_percent = 0.0;
    rec.hd95_mm = penalty;
    res.records.push_back(std::move(rec));
  }

  const double denom = static_cast<double>(n_lesions) + static_cast<double>(n_fp);
  res.dice_percent = dice_sum / denom;
  res.hd95_mm = (hd_sum + static_cast<double>(n_fp) * penalty) / denom;
  return res;
}

CaseMetrics evaluate_case(const LabelVolume& pred, const LabelVolume& gt,
                          const LesionwiseParams& params,
                          const std::string& case_id) {
  require_canonical(pred);
  require_canonical(gt);
  require_same_geometry(pred, gt, "evaluate_case");

  CaseMetrics cm;
  cm.case_id = case_id;
  for (RegionId region : kAllRegions) {
    const BinaryMask pm = compose_region(pred, region);
    const BinaryMask gm = compose_region(gt, region);
    RegionMetrics& rm = cm.regions[static_cast<std::size_t>(region)];
    rm.dice_percent = dice(pm, gm);
    rm.hd95_mm = hd95(pm, gm, params.percentile, params.fn_fp_hd95_penalty_mm);
    LesionwiseResult lw = lesionwise(pm, gm, params);
    rm.lesionwise_dice_percent = lw.dice_percent;
    rm.lesionwise_hd95_mm = lw.hd95_mm;
    rm.lesions = std::move(lw.records);
    for (LesionRecord& rec : rm.lesions) rec.region = region;
  }
  return cm;
}

}  // namespace segeval
