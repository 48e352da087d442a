#include "segeval/fixtures.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace segeval {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double uniform01(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t h = splitmix64(splitmix64(seed) ^ counter);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

namespace {

// normalized ellipsoid coordinate of a voxel center, in physical units
double ellipsoid_rho(const Primitive& p, double px, double py, double pz,
                     const std::array<double, 3>& radii) {
  const double ux = (px - p.center[0]) / radii[0];
  const double uy = (py - p.center[1]) / radii[1];
  const double uz = (pz - p.center[2]) / radii[2];
  return ux * ux + uy * uy + uz * uz;
}

bool covers(const Primitive& p, double px, double py, double pz) {
  switch (p.kind) {
    case PrimitiveKind::Ball:
      return ellipsoid_rho(p, px, py, pz, p.radii) <= 1.0;
    case PrimitiveKind::Shell:
      return ellipsoid_rho(p, px, py, pz, p.radii) <= 1.0 &&
             ellipsoid_rho(p, px, py, pz, p.inner) > 1.0;
    case PrimitiveKind::Box:
      return std::abs(px - p.center[0]) <= p.radii[0] &&
             std::abs(py - p.center[1]) <= p.radii[1] &&
             std::abs(pz - p.center[2]) <= p.radii[2];
  }
  return false;
}

void check_bounds(const Primitive& p, const Dims& dims, const Spacing& sp) {
  const std::array<double, 3> extent = {
      static_cast<double>(dims.nx - 1) * sp.dx,
      static_cast<double>(dims.ny - 1) * sp.dy,
      static_cast<double>(dims.nz - 1) * sp.dz};
  for (int a = 0; a < 3; a++) {
    if (p.radii[a] <= 0)
      throw PrimitiveOutOfBounds("primitive radius must be positive");
    if (p.center[a] - p.radii[a] < 0.0 || p.center[a] + p.radii[a] > extent[a])
      throw PrimitiveOutOfBounds("primitive leaves the volume along axis " +
                                 std::to_string(a));
  }
  if (p.kind == PrimitiveKind::Shell) {
    for (int a = 0; a < 3; a++) {
      if (p.inner[a] <= 0 || p.inner[a] >= p.radii[a])
        throw PrimitiveOutOfBounds("shell inner radii must sit inside the outer radii");
    }
  }
  if (p.label > kMaxLabelCode)
    throw PrimitiveOutOfBounds("primitive label code " +
                               std::to_string(p.label) + " is not canonical");
}

bool in_region(std::uint8_t code, RegionId region) {
  switch (region) {
    case RegionId::WT: return code != labels::background;
    case RegionId::TC: return code == labels::ncr || code == labels::et;
    case RegionId::ET: return code == labels::et;
  }
  return false;
}

}  // namespace

Fixture generate(const FixtureSpec& spec) {
  if (!spec.dims.valid()) throw ConfigError("fixture dims must be >= 1");
  if (!spec.spacing.valid()) throw ConfigError("fixture spacing must be positive");
  for (const Primitive& p : spec.primitives)
    check_bounds(p, spec.dims, spec.spacing);

  Fixture fx;
  fx.labels = make_label_volume(spec.dims, spec.spacing);
  fx.probs = make_prob_volume(spec.dims, spec.spacing);

  const auto [nx, ny, nz] = spec.dims;
  const std::size_t n = spec.dims.count();
  std::vector<float> level(n, static_cast<float>(spec.background_level));

  std::size_t i = 0;
  for (std::int64_t z = 0; z < nz; z++) {
    for (std::int64_t y = 0; y < ny; y++) {
      for (std::int64_t x = 0; x < nx; x++, i++) {
        const double px = static_cast<double>(x) * spec.spacing.dx;
        const double py = static_cast<double>(y) * spec.spacing.dy;
        const double pz = static_cast<double>(z) * spec.spacing.dz;
        for (const Primitive& p : spec.primitives) {
          if (covers(p, px, py, pz)) {
            fx.labels.voxels[i] = p.label;
            level[i] = static_cast<float>(p.prob_level);
          }
        }
      }
    }
  }

  // probabilities: inside a region draw from [L, 1], outside from [0, 1-L]
  for (int c = 0; c < 3; c++) {
    const RegionId region = kAllRegions[c];
    std::vector<float>& ch = fx.probs.channels[c];
    for (std::size_t v = 0; v < n; v++) {
      const double L = level[v];
      const double u = uniform01(spec.seed, static_cast<std::uint64_t>(c) * n + v);
      const bool inside = in_region(fx.labels.voxels[v], region);
      ch[v] = static_cast<float>(inside ? L + u * (1.0 - L) : u * (1.0 - L));
    }
  }
  return fx;
}

namespace {

using nlohmann::json;

Primitive primitive_from_json(const json& j) {
  Primitive p;
  const std::string kind = j.value("kind", "ball");
  if (kind == "ball")
    p.kind = PrimitiveKind::Ball;
  else if (kind == "shell")
    p.kind = PrimitiveKind::Shell;
  else if (kind == "box")
    p.kind = PrimitiveKind::Box;
  else
    throw ConfigError("unknown primitive kind \"" + kind + "\"");
  p.label = j.at("label").get<std::uint8_t>();
  const auto c = j.at("center");
  p.center = {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
  if (j.at("radii").is_number()) {
    const double r = j.at("radii").get<double>();
    p.radii = {r, r, r};
  } else {
    const auto r = j.at("radii");
    p.radii = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
  }
  if (j.contains("inner")) {
    if (j.at("inner").is_number()) {
      const double r = j.at("inner").get<double>();
      p.inner = {r, r, r};
    } else {
      const auto r = j.at("inner");
      p.inner = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
    }
  }
  p.prob_level = j.value("prob_level", 0.9);
  return p;
}

FixtureSpec spec_from_json(const json& j) {
  FixtureSpec spec;
  const auto d = j.at("dims");
  spec.dims = Dims{d.at(0).get<std::int64_t>(), d.at(1).get<std::int64_t>(),
                   d.at(2).get<std::int64_t>()};
  if (j.contains("spacing")) {
    const auto s = j.at("spacing");
    spec.spacing = Spacing{s.at(0).get<double>(), s.at(1).get<double>(),
                           s.at(2).get<double>()};
  }
  spec.seed = j.value("seed", 0ull);
  spec.background_level = j.value("background_level", 0.9);
  for (const json& pj : j.value("primitives", json::array()))
    spec.primitives.push_back(primitive_from_json(pj));
  return spec;
}

}  // namespace

FixtureSpec fixture_spec_from_json_text(const std::string& text) {
  try {
    return spec_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("fixture spec: ") + e.what());
  }
}

std::vector<std::pair<std::string, FixtureSpec>> fixture_cases_from_json_file(
    const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoFailure("cannot open fixture spec " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  std::vector<std::pair<std::string, FixtureSpec>> out;
  try {
    if (j.contains("cases")) {
      for (const json& cj : j.at("cases"))
        out.emplace_back(cj.at("id").get<std::string>(), spec_from_json(cj));
    } else {
      out.emplace_back(j.value("id", "case"), spec_from_json(j));
    }
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return out;
}

}  // namespace segeval
