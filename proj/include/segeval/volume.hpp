#pragma once

// Voxel-grid data model: dimensions, physical spacing, label volumes with
// the BraTS tissue codes, binary masks and region probability volumes.
// Storage order is x-fastest (index = x + nx*(y + ny*z)), matching the
// NIfTI on-disk layout so buffer indices and file offsets coincide.

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "segeval/errors.hpp"

namespace segeval {

struct Dims {
  std::int64_t nx = 0, ny = 0, nz = 0;

  std::size_t count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
  std::size_t index(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(nx) * (static_cast<std::size_t>(y) +
                                           static_cast<std::size_t>(ny) *
                                               static_cast<std::size_t>(z));
  }
  bool valid() const { return nx >= 1 && ny >= 1 && nz >= 1; }
  bool operator==(const Dims&) const = default;
};

struct Spacing {
  double dx = 1.0, dy = 1.0, dz = 1.0;
  bool valid() const;
  bool operator==(const Spacing&) const = default;
};

// dx*dy*dz
double voxel_volume_mm3(const Spacing& s);

struct Voxel {
  std::int64_t x = 0, y = 0, z = 0;
  bool operator==(const Voxel&) const = default;
};

// tissue class codes carried by LabelVolume voxels
namespace labels {
constexpr std::uint8_t background = 0;
constexpr std::uint8_t ncr = 1;  // necrotic tumor core
constexpr std::uint8_t ed = 2;   // peritumoral edematous tissue
constexpr std::uint8_t et = 3;   // enhancing tumor
}  // namespace labels

constexpr std::uint8_t kMaxLabelCode = 3;

// composite evaluation regions
enum class RegionId { WT = 0, TC = 1, ET = 2 };

constexpr std::array<RegionId, 3> kAllRegions = {RegionId::WT, RegionId::TC,
                                                 RegionId::ET};

const char* region_name(RegionId r);

struct LabelVolume {
  Dims dims;
  Spacing spacing;
  std::vector<std::uint8_t> voxels;

  std::uint8_t at(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return voxels[dims.index(x, y, z)];
  }
  std::uint8_t& at(std::int64_t x, std::int64_t y, std::int64_t z) {
    return voxels[dims.index(x, y, z)];
  }
};

struct BinaryMask {
  Dims dims;
  Spacing spacing;
  std::vector<std::uint8_t> voxels;  // 0 or 1

  bool at(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return voxels[dims.index(x, y, z)] != 0;
  }
  void set(std::int64_t x, std::int64_t y, std::int64_t z, bool v) {
    voxels[dims.index(x, y, z)] = v ? 1 : 0;
  }
  std::size_t foreground_count() const;
};

struct ProbVolume {
  Dims dims;
  Spacing spacing;
  // indexed by RegionId: [0]=WT, [1]=TC, [2]=ET
  std::array<std::vector<float>, 3> channels;

  const std::vector<float>& channel(RegionId r) const {
    return channels[static_cast<std::size_t>(r)];
  }
  std::vector<float>& channel(RegionId r) {
    return channels[static_cast<std::size_t>(r)];
  }
};

LabelVolume make_label_volume(Dims dims, Spacing spacing, std::uint8_t fill = 0);
BinaryMask make_mask(Dims dims, Spacing spacing, bool fill = false);
ProbVolume make_prob_volume(Dims dims, Spacing spacing, float fill = 0.0f);

bool same_geometry(const Dims& ad, const Spacing& as, const Dims& bd,
                   const Spacing& bs);

template <typename A, typename B>
bool same_geometry(const A& a, const B& b) {
  return same_geometry(a.dims, a.spacing, b.dims, b.spacing);
}

template <typename A, typename B>
void require_same_geometry(const A& a, const B& b, const char* what) {
  if (!same_geometry(a, b)) throw GeometryMismatch(std::string(what) + ": volume geometries differ");
}

// WT = {NCR, ED, ET}; TC = {NCR, ET}; ET = {ET}
BinaryMask compose_region(const LabelVolume& lv, RegionId region);

// Remap arbitrary on-disk codes to the canonical {0,1,2,3}. Codes already
// canonical pass through unless the map overrides them; any other code
// without an entry raises UnmappedCode.
using LabelRemap = std::map<int, int>;

// {4 -> 3}: legacy files store the enhancing tumor as code 4
LabelRemap default_label_remap();

LabelVolume remap_labels(const LabelVolume& raw, const LabelRemap& map);

// throws UnmappedCode if any voxel carries a code outside {0,1,2,3}
void require_canonical(const LabelVolume& lv);

}  // namespace segeval
