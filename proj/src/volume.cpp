#include "segeval/volume.hpp"

#include <cmath>

namespace segeval {

bool Spacing::valid() const {
  return dx > 0 && dy > 0 && dz > 0 && std::isfinite(dx) && std::isfinite(dy) &&
         std::isfinite(dz);
}

double voxel_volume_mm3(const Spacing& s) { return s.dx * s.dy * s.dz; }

const char* region_name(RegionId r) {
  switch (r) {
    case RegionId::WT: return "WT";
    case RegionId::TC: return "TC";
    case RegionId::ET: return "ET";
  }
  return "?";
}

std::size_t BinaryMask::foreground_count() const {
  std::size_t n = 0;
  for (std::uint8_t v : voxels) n += (v != 0);
  return n;
}

LabelVolume make_label_volume(Dims dims, Spacing spacing, std::uint8_t fill) {
  return LabelVolume{dims, spacing,
                     std::vector<std::uint8_t>(dims.count(), fill)};
}

BinaryMask make_mask(Dims dims, Spacing spacing, bool fill) {
  return BinaryMask{dims, spacing,
                    std::vector<std::uint8_t>(dims.count(), fill ? 1 : 0)};
}

ProbVolume make_prob_volume(Dims dims, Spacing spacing, float fill) {
  ProbVolume pv;
  pv.dims = dims;
  pv.spacing = spacing;
  for (auto& c : pv.channels) c.assign(dims.count(), fill);
  return pv;
}

bool same_geometry(const Dims& ad, const Spacing& as, const Dims& bd,
                   const Spacing& bs) {
  if (ad != bd) return false;
  // spacings originate from float32 pixdim fields; compare with a small
  // relative tolerance so volumes written by different tools still pair up
  auto close = [](double a, double b) {
    return std::abs(a - b) <= 1e-6 * std::max({1.0, std::abs(a), std::abs(b)});
  };
  return close(as.dx, bs.dx) && close(as.dy, bs.dy) && close(as.dz, bs.dz);
}

BinaryMask compose_region(const LabelVolume& lv, RegionId region) {
  BinaryMask out;
  out.dims = lv.dims;
  out.spacing = lv.spacing;
  out.voxels.resize(lv.voxels.size());
  const std::uint8_t* in = lv.voxels.data();
  std::uint8_t* dst = out.voxels.data();
  const std::size_t n = lv.voxels.size();
  switch (region) {
    case RegionId::WT:
      for (std::size_t i = 0; i < n; i++) dst[i] = (in[i] != labels::background);
      break;
    case RegionId::TC:
      for (std::size_t i = 0; i < n; i++)
        dst[i] = (in[i] == labels::ncr || in[i] == labels::et);
      break;
    case RegionId::ET:
      for (std::size_t i = 0; i < n; i++) dst[i] = (in[i] == labels::et);
      break;
  }
  return out;
}

LabelRemap default_label_remap() { return LabelRemap{{4, 3}}; }

LabelVolume remap_labels(const LabelVolume& raw, const LabelRemap& map) {
  for (const auto& [from, to] : map) {
    if (from < 0 || from > 255 || to < 0 || to > kMaxLabelCode)
      throw Error("remap entry " + std::to_string(from) + "->" +
                  std::to_string(to) + " leaves the canonical code range");
  }
  // full 256-entry lookup; -1 marks codes that must not appear
  std::array<int, 256> lut;
  lut.fill(-1);
  for (int c = 0; c <= kMaxLabelCode; c++) lut[c] = c;
  for (const auto& [from, to] : map) lut[from] = to;

  LabelVolume out;
  out.dims = raw.dims;
  out.spacing = raw.spacing;
  out.voxels.resize(raw.voxels.size());
  for (std::size_t i = 0; i < raw.voxels.size(); i++) {
    const int mapped = lut[raw.voxels[i]];
    if (mapped < 0) throw UnmappedCode(raw.voxels[i]);
    out.voxels[i] = static_cast<std::uint8_t>(mapped);
  }
  return out;
}

void require_canonical(const LabelVolume& lv) {
  for (std::uint8_t v : lv.voxels) {
    if (v > kMaxLabelCode) throw UnmappedCode(v);
  }
}

}  // namespace segeval
