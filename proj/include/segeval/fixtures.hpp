#pragma once

// Deterministic synthetic label/probability volumes for tests and batch
// runs: balls, hollow shells and boxes rasterized last-wins, with region
// probabilities consistent with the resulting labels.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "segeval/volume.hpp"

namespace segeval {

enum class PrimitiveKind { Ball, Shell, Box };

struct Primitive {
  PrimitiveKind kind = PrimitiveKind::Ball;
  std::uint8_t label = labels::et;     // class code painted inside
  std::array<double, 3> center{};      // mm
  std::array<double, 3> radii{};       // mm, per-axis half extents
  std::array<double, 3> inner{};       // mm, shells only: hollow core radii
  double prob_level = 0.9;             // region probability margin
};

struct FixtureSpec {
  Dims dims;
  Spacing spacing;
  std::uint64_t seed = 0;
  double background_level = 0.9;  // margin used outside any primitive
  std::vector<Primitive> primitives;
};

struct Fixture {
  LabelVolume labels;
  ProbVolume probs;
};

// Counter-based generator: value i of stream (seed) is a pure function of
// (seed, i), so fixtures are identical across platforms and runs.
std::uint64_t splitmix64(std::uint64_t x);
double uniform01(std::uint64_t seed, std::uint64_t counter);

// Labels by last-primitive-wins; probabilities are uniform in [level, 1]
// inside each composite region and [0, 1-level] outside it.
Fixture generate(const FixtureSpec& spec);

FixtureSpec fixture_spec_from_json_text(const std::string& text);
std::vector<std::pair<std::string, FixtureSpec>> fixture_cases_from_json_file(
    const std::string& path);

}  // namespace segeval
