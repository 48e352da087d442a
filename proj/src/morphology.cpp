#include "segeval/morphology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace segeval {

Connectivity connectivity_from_int(int n) {
  switch (n) {
    case 6: return Connectivity::Face6;
    case 18: return Connectivity::Edge18;
    case 26: return Connectivity::Vertex26;
    default:
      throw ConfigError("connectivity must be 6, 18 or 26, got " +
                        std::to_string(n));
  }
}

namespace {

struct Offset {
  int dx, dy, dz;
};

// neighbors that precede the current voxel in raster order (z, then y,
// then x); scanning these during pass one sees every adjacency exactly once
std::vector<Offset> previous_neighbors(Connectivity conn) {
  std::vector<Offset> out;
  for (int dz = -1; dz <= 1; dz++) {
    for (int dy = -1; dy <= 1; dy++) {
      for (int dx = -1; dx <= 1; dx++) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        const int order = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (conn == Connectivity::Face6 && order > 1) continue;
        if (conn == Connectivity::Edge18 && order > 2) continue;
        const bool previous = dz < 0 || (dz == 0 && (dy < 0 || (dy == 0 && dx < 0)));
        if (previous) out.push_back({dx, dy, dz});
      }
    }
  }
  return out;
}

struct DisjointSet {
  std::vector<std::uint32_t> parent;  // label 0 reserved for background

  DisjointSet() { parent.push_back(0); }

  std::uint32_t make() {
    if (parent.size() > 0xFFFFFFFFull)
      throw ComponentOverflow("component count exceeds 2^32-1");
    parent.push_back(static_cast<std::uint32_t>(parent.size()));
    return static_cast<std::uint32_t>(parent.size() - 1);
  }

  std::uint32_t root(std::uint32_t n) {
    while (parent[n] != n) {
      parent[n] = parent[parent[n]];  // path halving
      n = parent[n];
    }
    return n;
  }

  void unify(std::uint32_t a, std::uint32_t b) {
    a = root(a);
    b = root(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

ComponentMap connected_components(const BinaryMask& mask, Connectivity conn) {
  const auto [nx, ny, nz] = mask.dims;
  const std::size_t n = mask.voxels.size();

  ComponentMap cm;
  cm.dims = mask.dims;
  cm.spacing = mask.spacing;
  cm.ids.assign(n, 0);

  const std::vector<Offset> nbrs = previous_neighbors(conn);
  DisjointSet sets;

  // pass 1: provisional labels + equivalences
  std::size_t i = 0;
  for (std::int64_t z = 0; z < nz; z++) {
    for (std::int64_t y = 0; y < ny; y++) {
      for (std::int64_t x = 0; x < nx; x++, i++) {
        if (!mask.voxels[i]) continue;
        std::uint32_t label = 0;
        for (const Offset& o : nbrs) {
          const std::int64_t px = x + o.dx, py = y + o.dy, pz = z + o.dz;
          if (px < 0 || py < 0 || pz < 0 || px >= nx || py >= ny) continue;
          const std::size_t pi = mask.dims.index(px, py, pz);
          if (!mask.voxels[pi]) continue;
          const std::uint32_t nb = cm.ids[pi];
          if (label == 0)
            label = nb;
          else
            sets.unify(label, nb);
        }
        if (label == 0) label = sets.make();
        cm.ids[i] = label;
      }
    }
  }

  // pass 2: resolve to roots, renumber in first-encounter raster order
  std::vector<std::uint32_t> rename(sets.parent.size(), 0);
  const double voxvol = voxel_volume_mm3(mask.spacing);
  std::uint32_t next = 0;
  i = 0;
  for (std::int64_t z = 0; z < nz; z++) {
    for (std::int64_t y = 0; y < ny; y++) {
      for (std::int64_t x = 0; x < nx; x++, i++) {
        if (!cm.ids[i]) continue;
        const std::uint32_t r = sets.root(cm.ids[i]);
        if (rename[r] == 0) {
          rename[r] = ++next;
          cm.stats.push_back(ComponentStats{
              0, 0, Voxel{x, y, z}, Voxel{x, y, z}, {0, 0, 0}});
        }
        const std::uint32_t id = rename[r];
        cm.ids[i] = id;
        ComponentStats& s = cm.stats[id - 1];
        s.voxel_count++;
        s.bbox_min.x = std::min(s.bbox_min.x, x);
        s.bbox_min.y = std::min(s.bbox_min.y, y);
        s.bbox_min.z = std::min(s.bbox_min.z, z);
        s.bbox_max.x = std::max(s.bbox_max.x, x);
        s.bbox_max.y = std::max(s.bbox_max.y, y);
        s.bbox_max.z = std::max(s.bbox_max.z, z);
        s.centroid[0] += static_cast<double>(x);
        s.centroid[1] += static_cast<double>(y);
        s.centroid[2] += static_cast<double>(z);
      }
    }
  }
  for (ComponentStats& s : cm.stats) {
    s.volume_mm3 = static_cast<double>(s.voxel_count) * voxvol;
    for (double& c : s.centroid) c /= static_cast<double>(s.voxel_count);
  }
  return cm;
}

namespace {

// 1D binary max filter with half-window r, applied along a strided line
void or_line(const std::uint8_t* in, std::uint8_t* out, std::int64_t n,
             std::int64_t stride, std::int64_t r) {
  std::int64_t inside = 0;  // foreground count in window [i-r, i+r]
  for (std::int64_t j = 0; j < std::min(r, n); j++) inside += in[j * stride] != 0;
  for (std::int64_t i = 0; i < n; i++) {
    if (i + r < n) inside += in[(i + r) * stride] != 0;
    out[i * stride] = inside > 0;
    if (i - r >= 0) inside -= in[(i - r) * stride] != 0;
  }
}

}  // namespace

BinaryMask dilate(const BinaryMask& mask, double radius_mm) {
  if (radius_mm < 0) throw ConfigError("dilation radius must be >= 0");
  const auto [nx, ny, nz] = mask.dims;
  const std::int64_t rx = static_cast<std::int64_t>(radius_mm / mask.spacing.dx + 1e-9);
  const std::int64_t ry = static_cast<std::int64_t>(radius_mm / mask.spacing.dy + 1e-9);
  const std::int64_t rz = static_cast<std::int64_t>(radius_mm / mask.spacing.dz + 1e-9);

  BinaryMask out = mask;
  if (rx == 0 && ry == 0 && rz == 0) return out;
  BinaryMask tmp = make_mask(mask.dims, mask.spacing);

  // the box kernel separates into one pass per axis
  const std::uint8_t* src = mask.voxels.data();
  std::uint8_t* a = out.voxels.data();
  std::uint8_t* b = tmp.voxels.data();
  for (std::int64_t z = 0; z < nz; z++)
    for (std::int64_t y = 0; y < ny; y++)
      or_line(src + mask.dims.index(0, y, z), a + mask.dims.index(0, y, z), nx, 1, rx);
  for (std::int64_t z = 0; z < nz; z++)
    for (std::int64_t x = 0; x < nx; x++)
      or_line(a + mask.dims.index(x, 0, z), b + mask.dims.index(x, 0, z), ny, nx, ry);
  for (std::int64_t y = 0; y < ny; y++)
    for (std::int64_t x = 0; x < nx; x++)
      or_line(b + mask.dims.index(x, y, 0), a + mask.dims.index(x, y, 0), nz,
              nx * ny, rz);
  return out;
}

BinaryMask interior_holes(const BinaryMask& mask) {
  const auto [nx, ny, nz] = mask.dims;
  const std::size_t n = mask.voxels.size();

  // flood the complement from the border under Face6; what stays unreached
  // is enclosed. Face6 on the complement is the topological dual of
  // Vertex26 foreground.
  std::vector<std::uint8_t> reached(n, 0);
  std::vector<std::size_t> stack;
  auto push_if_open = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
    const std::size_t i = mask.dims.index(x, y, z);
    if (!mask.voxels[i] && !reached[i]) {
      reached[i] = 1;
      stack.push_back(i);
    }
  };
  for (std::int64_t z = 0; z < nz; z++) {
    for (std::int64_t y = 0; y < ny; y++) {
      push_if_open(0, y, z);
      push_if_open(nx - 1, y, z);
    }
  }
  for (std::int64_t z = 0; z < nz; z++) {
    for (std::int64_t x = 0; x < nx; x++) {
      push_if_open(x, 0, z);
      push_if_open(x, ny - 1, z);
    }
  }
  for (std::int64_t y = 0; y < ny; y++) {
    for (std::int64_t x = 0; x < nx; x++) {
      push_if_open(x, y, 0);
      push_if_open(x, y, nz - 1);
    }
  }

  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const std::int64_t z = static_cast<std::int64_t>(i) / (nx * ny);
    const std::int64_t y = (static_cast<std::int64_t>(i) - z * nx * ny) / nx;
    const std::int64_t x = static_cast<std::int64_t>(i) - nx * (y + ny * z);
    if (x > 0) push_if_open(x - 1, y, z);
    if (x < nx - 1) push_if_open(x + 1, y, z);
    if (y > 0) push_if_open(x, y - 1, z);
    if (y < ny - 1) push_if_open(x, y + 1, z);
    if (z > 0) push_if_open(x, y, z - 1);
    if (z < nz - 1) push_if_open(x, y, z + 1);
  }

  BinaryMask holes = make_mask(mask.dims, mask.spacing);
  for (std::size_t i = 0; i < n; i++)
    holes.voxels[i] = !mask.voxels[i] && !reached[i];
  return holes;
}

std::vector<Voxel> surface_voxels(const BinaryMask& mask) {
  const auto [nx, ny, nz] = mask.dims;
  std::vector<Voxel> out;
  std::size_t i = 0;
  for (std::int64_t z = 0; z < nz; z++) {
    for (std::int64_t y = 0; y < ny; y++) {
      for (std::int64_t x = 0; x < nx; x++, i++) {
        if (!mask.voxels[i]) continue;
        const bool exposed =
            x == 0 || !mask.voxels[i - 1] || x == nx - 1 || !mask.voxels[i + 1] ||
            y == 0 || !mask.voxels[i - nx] || y == ny - 1 || !mask.voxels[i + nx] ||
            z == 0 || !mask.voxels[i - nx * ny] || z == nz - 1 ||
            !mask.voxels[i + nx * ny];
        if (exposed) out.push_back(Voxel{x, y, z});
      }
    }
  }
  return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/* 1D squared-distance transform over a sampled line (Felzenszwalb &
 * Huttenlocher lower envelope). f holds squared distances so far; grid
 * positions are i*w for voxel spacing w. Parabolas with infinite height
 * never enter the envelope, so lines without any source stay infinite. */
void dt_line(double* f, std::int64_t n, std::int64_t stride, double w,
             std::int64_t* v, double* zb, double* d) {
  const double w2 = w * w;
  std::int64_t k = -1;
  for (std::int64_t q = 0; q < n; q++) {
    const double fq = f[q * stride];
    if (fq == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      zb[0] = -kInf;
      zb[1] = kInf;
      continue;
    }
    double s;
    for (;;) {
      const std::int64_t p = v[k];
      s = ((fq - f[p * stride]) / w2 + static_cast<double>(q * q - p * p)) /
          static_cast<double>(2 * (q - p));
      if (s > zb[k]) break;
      k--;
    }
    k++;
    v[k] = q;
    zb[k] = s;
    zb[k + 1] = kInf;
  }
  if (k < 0) return;  // no sources on this line
  std::int64_t j = 0;
  for (std::int64_t q = 0; q < n; q++) {
    while (zb[j + 1] < static_cast<double>(q)) j++;
    const double dq = static_cast<double>(q - v[j]) * w;
    d[q] = dq * dq + f[v[j] * stride];
  }
  for (std::int64_t q = 0; q < n; q++) f[q * stride] = d[q];
}

}  // namespace

std::vector<double> distance_transform(const BinaryMask& mask) {
  const auto [nx, ny, nz] = mask.dims;
  const std::size_t n = mask.voxels.size();

  std::vector<double> sq(n);
  bool any = false;
  for (std::size_t i = 0; i < n; i++) {
    const bool fg = mask.voxels[i] != 0;
    any |= fg;
    sq[i] = fg ? 0.0 : kInf;
  }
  if (!any) throw EmptyMask("distance_transform needs at least one foreground voxel");

  const std::int64_t nmax = std::max({nx, ny, nz});
  std::vector<std::int64_t> v(nmax);
  std::vector<double> zb(nmax + 1), d(nmax);

  for (std::int64_t z = 0; z < nz; z++)
    for (std::int64_t y = 0; y < ny; y++)
      dt_line(sq.data() + mask.dims.index(0, y, z), nx, 1, mask.spacing.dx,
              v.data(), zb.data(), d.data());
  for (std::int64_t z = 0; z < nz; z++)
    for (std::int64_t x = 0; x < nx; x++)
      dt_line(sq.data() + mask.dims.index(x, 0, z), ny, nx, mask.spacing.dy,
              v.data(), zb.data(), d.data());
  for (std::int64_t y = 0; y < ny; y++)
    for (std::int64_t x = 0; x < nx; x++)
      dt_line(sq.data() + mask.dims.index(x, y, 0), nz, nx * ny,
              mask.spacing.dz, v.data(), zb.data(), d.data());

  for (double& s : sq) s = std::sqrt(s);
  return sq;
}

}  // namespace segeval
