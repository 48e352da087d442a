#pragma once

// NIfTI-1 reader/writer for 3D/4D volumes, plain or gzip-compressed.
// Reads tolerate either byte order; writes are always little-endian,
// single-file ("n+1"), vox_offset 352.

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "segeval/volume.hpp"

namespace segeval {

// NIfTI-1 datatype codes accepted by the reader
namespace nifti_type {
constexpr std::int16_t uint8 = 2;
constexpr std::int16_t int16 = 4;
constexpr std::int16_t int32 = 8;
constexpr std::int16_t float32 = 16;
constexpr std::int16_t float64 = 64;
}  // namespace nifti_type

// the 348-byte header, field for field
struct NiftiHeader {
  std::int32_t sizeof_hdr = 348;
  std::array<char, 10> data_type{};
  std::array<char, 18> db_name{};
  std::int32_t extents = 0;
  std::int16_t session_error = 0;
  char regular = 'r';
  char dim_info = 0;
  std::array<std::int16_t, 8> dim{};
  float intent_p1 = 0, intent_p2 = 0, intent_p3 = 0;
  std::int16_t intent_code = 0;
  std::int16_t datatype = 0;
  std::int16_t bitpix = 0;
  std::int16_t slice_start = 0;
  std::array<float, 8> pixdim{};
  float vox_offset = 352;
  float scl_slope = 1;
  float scl_inter = 0;
  std::int16_t slice_end = 0;
  char slice_code = 0;
  char xyzt_units = 0;
  float cal_max = 0, cal_min = 0;
  float slice_duration = 0, toffset = 0;
  std::int32_t glmax = 0, glmin = 0;
  std::array<char, 80> descrip{};
  std::array<char, 24> aux_file{};
  std::int16_t qform_code = 0;
  std::int16_t sform_code = 0;
  float quatern_b = 0, quatern_c = 0, quatern_d = 0;
  float qoffset_x = 0, qoffset_y = 0, qoffset_z = 0;
  std::array<float, 4> srow_x{}, srow_y{}, srow_z{};
  std::array<char, 16> intent_name{};
  std::array<char, 4> magic{};
};

using VoxelData = std::variant<std::vector<std::uint8_t>,   // datatype 2
                               std::vector<std::int16_t>,   // datatype 4
                               std::vector<std::int32_t>,   // datatype 8
                               std::vector<float>,          // datatype 16
                               std::vector<double>>;        // datatype 64

struct NiftiImage {
  NiftiHeader header;  // parsed to native byte order
  Dims dims;
  Spacing spacing;
  std::int64_t nt = 1;  // extent of the 4th dimension, 1 for plain 3D
  VoxelData data;       // x-fastest, nt volumes back to back

  std::size_t values_per_volume() const { return dims.count(); }
  std::size_t total_values() const {
    return dims.count() * static_cast<std::size_t>(nt);
  }
  // value at flat index, widened to double (after any scl scaling)
  double value(std::size_t i) const;
};

// Decodes magic/dims/datatype/scaling; gzip is detected from the leading
// 0x1F 0x8B bytes regardless of file name. scl_slope/scl_inter are applied
// in double precision (result becomes float32 data) whenever slope != 0 and
// (slope, inter) != (1, 0).
NiftiImage read_volume(const std::string& path);

// serialize/deserialize a raw header; needed by tests building fixtures
NiftiHeader parse_header(const std::array<std::uint8_t, 348>& raw, bool* swapped = nullptr);
std::array<std::uint8_t, 348> serialize_header(const NiftiHeader& h);

LabelVolume read_label_volume(const std::string& path,
                              const LabelRemap& remap = default_label_remap());

// channel order of a probability file: which region each stored channel holds
using ChannelOrder = std::array<RegionId, 3>;
constexpr ChannelOrder kDefaultChannelOrder = {RegionId::WT, RegionId::TC,
                                               RegionId::ET};

// one 4D file with dim[4] == 3
ProbVolume read_prob_volume(const std::string& path,
                            const ChannelOrder& order = kDefaultChannelOrder);
// three 3D files, one per channel
ProbVolume read_prob_volume(const std::array<std::string, 3>& paths,
                            const ChannelOrder& order = kDefaultChannelOrder);

// uint8, scl 1/0; compressed iff path ends in ".gz"
void write_label_volume(const std::string& path, const LabelVolume& lv);

// float32 4D with dim[4] = 3
void write_prob_volume(const std::string& path, const ProbVolume& pv,
                       const ChannelOrder& order = kDefaultChannelOrder);

}  // namespace segeval
