#pragma once

// 3D binary morphology on dense voxel grids: connected components,
// millimeter-parameterized box dilation, interior hole extraction, surface
// voxels and the exact Euclidean distance transform.

#include <cstdint>
#include <vector>

#include "segeval/volume.hpp"

namespace segeval {

enum class Connectivity { Face6 = 6, Edge18 = 18, Vertex26 = 26 };

Connectivity connectivity_from_int(int n);  // 6 / 18 / 26

struct ComponentStats {
  std::uint64_t voxel_count = 0;
  double volume_mm3 = 0;
  Voxel bbox_min, bbox_max;          // inclusive
  std::array<double, 3> centroid{};  // mean voxel coordinate
};

struct ComponentMap {
  Dims dims;
  Spacing spacing;
  std::vector<std::uint32_t> ids;     // 0 = background, components 1..K
  std::vector<ComponentStats> stats;  // stats[k-1] belongs to component k

  std::uint32_t count() const { return static_cast<std::uint32_t>(stats.size()); }
};

// Two-pass union-find labeling. Ids are assigned in first-encounter raster
// order, so equal inputs always produce identical id arrays.
ComponentMap connected_components(const BinaryMask& mask,
                                  Connectivity conn = Connectivity::Vertex26);

// Box structuring element with half-extent floor(radius_mm / spacing) voxels
// per axis; radius 1 mm on 1 mm isotropic data is the 3x3x3 kernel.
BinaryMask dilate(const BinaryMask& mask, double radius_mm);

// Background voxels enclosed by foreground: the complement components
// (Face6) that never touch the volume border.
BinaryMask interior_holes(const BinaryMask& mask);

// Foreground voxels with at least one Face6 neighbor that is background or
// outside the volume, in raster order.
std::vector<Voxel> surface_voxels(const BinaryMask& mask);

// Exact anisotropy-aware Euclidean distance to the nearest foreground
// voxel, in millimeters. Throws EmptyMask when there is no foreground.
std::vector<double> distance_transform(const BinaryMask& mask);

}  // namespace segeval
