#include "segeval/nifti.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace segeval {

namespace {

/* Field offsets in the 348-byte NIfTI-1 header:
 *   0 sizeof_hdr      40 dim[8]         76 pixdim[8]     148 glmin
 *   4 data_type[10]   56 intent_p1     108 vox_offset    152 descrip[80]
 *  14 db_name[18]     60 intent_p2     112 scl_slope     232 aux_file[24]
 *  32 extents         64 intent_p3     116 scl_inter     256 qform..sform
 *  36 session_error   68 intent_code   120 slice_end     260 quaterns/offsets
 *  38 regular         70 datatype      122 slice_code    280 srow_x/y/z
 *  39 dim_info        72 bitpix        123 xyzt_units    328 intent_name[16]
 *                     74 slice_start   124 cal_max...    344 magic[4]
 */

template <typename T>
T get_scalar(const std::uint8_t* base, std::size_t off, bool swap) {
  std::uint8_t tmp[sizeof(T)];
  std::memcpy(tmp, base + off, sizeof(T));
  if (swap) std::reverse(tmp, tmp + sizeof(T));
  T v;
  std::memcpy(&v, tmp, sizeof(T));
  return v;
}

template <typename T>
void put_scalar(std::uint8_t* base, std::size_t off, T v) {
  std::uint8_t tmp[sizeof(T)];
  std::memcpy(tmp, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(tmp, tmp + sizeof(T));
  std::memcpy(base + off, tmp, sizeof(T));
}

bool plausible_dim0(std::int16_t d) { return d >= 1 && d <= 7; }

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  // gzopen falls back to transparent reads when the 0x1F 0x8B signature
  // is absent, so one path serves both encodings
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw IoFailure("cannot open " + path);
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> buf(1 << 20);
  int n = 0;
  while ((n = gzread(f, buf.data(), static_cast<unsigned>(buf.size()))) > 0)
    out.insert(out.end(), buf.begin(), buf.begin() + n);
  const bool bad = n < 0;
  gzclose(f);
  if (bad) throw IoFailure("error while decompressing " + path);
  return out;
}

void write_file_bytes(const std::string& path, const std::uint8_t* data,
                      std::size_t n) {
  const bool gz = path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
  if (gz) {
    gzFile f = gzopen(path.c_str(), "wb");
    if (!f) throw IoFailure("cannot open " + path + " for writing");
    std::size_t done = 0;
    while (done < n) {
      const unsigned chunk =
          static_cast<unsigned>(std::min<std::size_t>(n - done, 1u << 30));
      if (gzwrite(f, data + done, chunk) != static_cast<int>(chunk)) {
        gzclose(f);
        throw IoFailure("write failed on " + path);
      }
      done += chunk;
    }
    if (gzclose(f) != Z_OK) throw IoFailure("close failed on " + path);
  } else {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoFailure("cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n));
    f.flush();
    if (!f) throw IoFailure("write failed on " + path);
  }
}

int element_size(std::int16_t datatype) {
  switch (datatype) {
    case nifti_type::uint8: return 1;
    case nifti_type::int16: return 2;
    case nifti_type::int32: return 4;
    case nifti_type::float32: return 4;
    case nifti_type::float64: return 8;
    default: throw UnsupportedDatatype(datatype);
  }
}

template <typename T>
std::vector<T> decode_elements(const std::uint8_t* src, std::size_t count,
                               bool swap) {
  std::vector<T> out(count);
  if (!swap || sizeof(T) == 1) {
    std::memcpy(out.data(), src, count * sizeof(T));
  } else {
    for (std::size_t i = 0; i < count; i++)
      out[i] = get_scalar<T>(src, i * sizeof(T), true);
  }
  return out;
}

VoxelData decode_data(std::int16_t datatype, const std::uint8_t* src,
                      std::size_t count, bool swap) {
  switch (datatype) {
    case nifti_type::uint8: return decode_elements<std::uint8_t>(src, count, swap);
    case nifti_type::int16: return decode_elements<std::int16_t>(src, count, swap);
    case nifti_type::int32: return decode_elements<std::int32_t>(src, count, swap);
    case nifti_type::float32: return decode_elements<float>(src, count, swap);
    case nifti_type::float64: return decode_elements<double>(src, count, swap);
    default: throw UnsupportedDatatype(datatype);
  }
}

bool magic_is(const std::array<char, 4>& m, const char* s) {
  return std::memcmp(m.data(), s, 4) == 0;
}

// data may live next to a "ni1" header in a .img / .img.gz twin
std::string locate_img_twin(const std::string& hdr_path) {
  namespace fs = std::filesystem;
  fs::path p(hdr_path);
  std::string stem = p.string();
  for (const char* ext : {".hdr.gz", ".hdr"}) {
    const std::size_t len = std::strlen(ext);
    if (stem.size() > len && stem.compare(stem.size() - len, len, ext) == 0) {
      stem.resize(stem.size() - len);
      break;
    }
  }
  for (const char* ext : {".img", ".img.gz"}) {
    fs::path candidate(stem + ext);
    if (fs::exists(candidate)) return candidate.string();
  }
  throw IoFailure("no .img twin found for header " + hdr_path);
}

}  // namespace

NiftiHeader parse_header(const std::array<std::uint8_t, 348>& raw,
                         bool* swapped_out) {
  const std::uint8_t* p = raw.data();

  // NIfTI-2 declares sizeof_hdr 540; reject it explicitly
  const auto hdr_le = get_scalar<std::int32_t>(p, 0, false);
  const auto hdr_be = get_scalar<std::int32_t>(p, 0, true);
  if (hdr_le == 540 || hdr_be == 540)
    throw BadMagic("NIfTI-2 files are not supported, convert to NIfTI-1");

  std::array<char, 4> magic;
  std::memcpy(magic.data(), p + 344, 4);
  if (!magic_is(magic, "n+1") && !magic_is(magic, "ni1"))
    throw BadMagic("missing NIfTI-1 magic (expected \"n+1\" or \"ni1\")");

  // byte order is inferred from dim[0] plausibility
  bool swap = false;
  if (!plausible_dim0(get_scalar<std::int16_t>(p, 40, false))) {
    if (!plausible_dim0(get_scalar<std::int16_t>(p, 40, true)))
      throw DimMismatch("dim[0] outside [1,7] in either byte order");
    swap = true;
  }
  if (swapped_out) *swapped_out = swap;

  NiftiHeader h;
  h.sizeof_hdr = get_scalar<std::int32_t>(p, 0, swap);
  std::memcpy(h.data_type.data(), p + 4, 10);
  std::memcpy(h.db_name.data(), p + 14, 18);
  h.extents = get_scalar<std::int32_t>(p, 32, swap);
  h.session_error = get_scalar<std::int16_t>(p, 36, swap);
  h.regular = static_cast<char>(p[38]);
  h.dim_info = static_cast<char>(p[39]);
  for (int i = 0; i < 8; i++)
    h.dim[i] = get_scalar<std::int16_t>(p, 40 + 2 * i, swap);
  h.intent_p1 = get_scalar<float>(p, 56, swap);
  h.intent_p2 = get_scalar<float>(p, 60, swap);
  h.intent_p3 = get_scalar<float>(p, 64, swap);
  h.intent_code = get_scalar<std::int16_t>(p, 68, swap);
  h.datatype = get_scalar<std::int16_t>(p, 70, swap);
  h.bitpix = get_scalar<std::int16_t>(p, 72, swap);
  h.slice_start = get_scalar<std::int16_t>(p, 74, swap);
  for (int i = 0; i < 8; i++)
    h.pixdim[i] = get_scalar<float>(p, 76 + 4 * i, swap);
  h.vox_offset = get_scalar<float>(p, 108, swap);
  h.scl_slope = get_scalar<float>(p, 112, swap);
  h.scl_inter = get_scalar<float>(p, 116, swap);
  h.slice_end = get_scalar<std::int16_t>(p, 120, swap);
  h.slice_code = static_cast<char>(p[122]);
  h.xyzt_units = static_cast<char>(p[123]);
  h.cal_max = get_scalar<float>(p, 124, swap);
  h.cal_min = get_scalar<float>(p, 128, swap);
  h.slice_duration = get_scalar<float>(p, 132, swap);
  h.toffset = get_scalar<float>(p, 136, swap);
  h.glmax = get_scalar<std::int32_t>(p, 140, swap);
  h.glmin = get_scalar<std::int32_t>(p, 144, swap);
  std::memcpy(h.descrip.data(), p + 148, 80);
  std::memcpy(h.aux_file.data(), p + 228, 24);
  h.qform_code = get_scalar<std::int16_t>(p, 252, swap);
  h.sform_code = get_scalar<std::int16_t>(p, 254, swap);
  h.quatern_b = get_scalar<float>(p, 256, swap);
  h.quatern_c = get_scalar<float>(p, 260, swap);
  h.quatern_d = get_scalar<float>(p, 264, swap);
  h.qoffset_x = get_scalar<float>(p, 268, swap);
  h.qoffset_y = get_scalar<float>(p, 272, swap);
  h.qoffset_z = get_scalar<float>(p, 276, swap);
  for (int i = 0; i < 4; i++) {
    h.srow_x[i] = get_scalar<float>(p, 280 + 4 * i, swap);
    h.srow_y[i] = get_scalar<float>(p, 296 + 4 * i, swap);
    h.srow_z[i] = get_scalar<float>(p, 312 + 4 * i, swap);
  }
  std::memcpy(h.intent_name.data(), p + 328, 16);
  h.magic = magic;

  if (h.sizeof_hdr != 348)
    throw BadMagic("sizeof_hdr is " + std::to_string(h.sizeof_hdr) +
                   ", expected 348");
  for (int i = 1; i <= h.dim[0]; i++) {
    if (h.dim[i] < 1)
      throw DimMismatch("dim[" + std::to_string(i) + "] = " +
                        std::to_string(h.dim[i]) + " is not >= 1");
  }
  return h;
}

std::array<std::uint8_t, 348> serialize_header(const NiftiHeader& h) {
  std::array<std::uint8_t, 348> raw{};
  std::uint8_t* p = raw.data();
  put_scalar(p, 0, h.sizeof_hdr);
  std::memcpy(p + 4, h.data_type.data(), 10);
  std::memcpy(p + 14, h.db_name.data(), 18);
  put_scalar(p, 32, h.extents);
  put_scalar(p, 36, h.session_error);
  p[38] = static_cast<std::uint8_t>(h.regular);
  p[39] = static_cast<std::uint8_t>(h.dim_info);
  for (int i = 0; i < 8; i++) put_scalar(p, 40 + 2 * i, h.dim[i]);
  put_scalar(p, 56, h.intent_p1);
  put_scalar(p, 60, h.intent_p2);
  put_scalar(p, 64, h.intent_p3);
  put_scalar(p, 68, h.intent_code);
  put_scalar(p, 70, h.datatype);
  put_scalar(p, 72, h.bitpix);
  put_scalar(p, 74, h.slice_start);
  for (int i = 0; i < 8; i++) put_scalar(p, 76 + 4 * i, h.pixdim[i]);
  put_scalar(p, 108, h.vox_offset);
  put_scalar(p, 112, h.scl_slope);
  put_scalar(p, 116, h.scl_inter);
  put_scalar(p, 120, h.slice_end);
  p[122] = static_cast<std::uint8_t>(h.slice_code);
  p[123] = static_cast<std::uint8_t>(h.xyzt_units);
  put_scalar(p, 124, h.cal_max);
  put_scalar(p, 128, h.cal_min);
  put_scalar(p, 132, h.slice_duration);
  put_scalar(p, 136, h.toffset);
  put_scalar(p, 140, h.glmax);
  put_scalar(p, 144, h.glmin);
  std::memcpy(p + 148, h.descrip.data(), 80);
  std::memcpy(p + 228, h.aux_file.data(), 24);
  put_scalar(p, 252, h.qform_code);
  put_scalar(p, 254, h.sform_code);
  put_scalar(p, 256, h.quatern_b);
  put_scalar(p, 260, h.quatern_c);
  put_scalar(p, 264, h.quatern_d);
  put_scalar(p, 268, h.qoffset_x);
  put_scalar(p, 272, h.qoffset_y);
  put_scalar(p, 276, h.qoffset_z);
  for (int i = 0; i < 4; i++) {
    put_scalar(p, 280 + 4 * i, h.srow_x[i]);
    put_scalar(p, 296 + 4 * i, h.srow_y[i]);
    put_scalar(p, 312 + 4 * i, h.srow_z[i]);
  }
  std::memcpy(p + 328, h.intent_name.data(), 16);
  std::memcpy(p + 344, h.magic.data(), 4);
  return raw;
}

double NiftiImage::value(std::size_t i) const {
  return std::visit(
      [i](const auto& vec) -> double { return static_cast<double>(vec[i]); },
      data);
}

NiftiImage read_volume(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  if (bytes.size() < 348)
    throw TruncatedFile(path + ": " + std::to_string(bytes.size()) +
                        " bytes, need at least 348 for the header");

  std::array<std::uint8_t, 348> raw;
  std::memcpy(raw.data(), bytes.data(), 348);
  bool swap = false;
  NiftiImage img;
  img.header = parse_header(raw, &swap);
  const NiftiHeader& h = img.header;

  if (h.dim[0] < 3) throw DimMismatch("expected a 3D or 4D volume");
  for (int i = 5; i <= h.dim[0]; i++) {
    if (h.dim[i] > 1)
      throw DimMismatch("dimensions beyond the 4th must have extent 1");
  }
  img.dims = Dims{h.dim[1], h.dim[2], h.dim[3]};
  img.nt = h.dim[0] >= 4 ? h.dim[4] : 1;
  img.spacing = Spacing{std::abs(static_cast<double>(h.pixdim[1])),
                        std::abs(static_cast<double>(h.pixdim[2])),
                        std::abs(static_cast<double>(h.pixdim[3]))};
  if (!img.spacing.valid())
    throw DimMismatch("pixdim must be strictly positive and finite");

  const int elsize = element_size(h.datatype);
  const std::size_t count = img.total_values();

  const std::uint8_t* src = nullptr;
  std::vector<std::uint8_t> img_bytes;  // keeps a .img twin alive
  std::size_t avail = 0;
  if (magic_is(h.magic, "ni1")) {
    img_bytes = read_file_bytes(locate_img_twin(path));
    const auto offset = static_cast<std::size_t>(std::max(0.0f, h.vox_offset));
    if (img_bytes.size() < offset) throw TruncatedFile(path + ": data offset past end of .img twin");
    src = img_bytes.data() + offset;
    avail = img_bytes.size() - offset;
  } else {
    const auto offset = static_cast<std::size_t>(h.vox_offset);
    if (h.vox_offset < 348.0f)
      throw DimMismatch("single-file vox_offset must be >= 348");
    if (bytes.size() < offset) throw TruncatedFile(path + ": data offset past end of file");
    src = bytes.data() + offset;
    avail = bytes.size() - offset;
  }
  if (avail < count * static_cast<std::size_t>(elsize))
    throw TruncatedFile(path + ": voxel data ends early (" +
                        std::to_string(avail) + " of " +
                        std::to_string(count * elsize) + " bytes)");

  img.data = decode_data(h.datatype, src, count, swap);

  // slope 0 means "no scaling stored"; identity scaling is skipped so
  // integer volumes keep their declared type
  const float slope = h.scl_slope, inter = h.scl_inter;
  if (std::isfinite(slope) && std::isfinite(inter) && slope != 0.0f &&
      !(slope == 1.0f && inter == 0.0f)) {
    std::vector<float> scaled(count);
    std::visit(
        [&](const auto& vec) {
          for (std::size_t i = 0; i < count; i++)
            scaled[i] = static_cast<float>(static_cast<double>(vec[i]) *
                                               static_cast<double>(slope) +
                                           static_cast<double>(inter));
        },
        img.data);
    img.data = std::move(scaled);
  }
  return img;
}

LabelVolume read_label_volume(const std::string& path, const LabelRemap& remap) {
  NiftiImage img = read_volume(path);
  if (img.nt != 1)
    throw DimMismatch(path + ": label volumes must be 3D, got dim[4] = " +
                      std::to_string(img.nt));
  LabelVolume raw;
  raw.dims = img.dims;
  raw.spacing = img.spacing;
  raw.voxels.resize(img.dims.count());
  for (std::size_t i = 0; i < raw.voxels.size(); i++) {
    const double v = img.value(i);
    const double r = std::nearbyint(v);
    if (!std::isfinite(v) || std::abs(v - r) > 1e-3 || r < 0 || r > 255)
      throw Error(path + ": voxel value " + std::to_string(v) +
                  " is not a label code");
    raw.voxels[i] = static_cast<std::uint8_t>(r);
  }
  return remap_labels(raw, remap);
}

namespace {

void fill_channels(ProbVolume& pv, const NiftiImage& img,
                   const ChannelOrder& order, int file_channel,
                   const std::string& path) {
  const std::size_t n = img.dims.count();
  std::vector<float>& dst = pv.channel(order[file_channel]);
  dst.resize(n);
  const std::size_t base = static_cast<std::size_t>(file_channel) * n;
  for (std::size_t i = 0; i < n; i++) {
    const double v = img.value(base + i);
    if (!(v >= -1e-6 && v <= 1.0 + 1e-6))
      throw ProbabilityOutOfRange(path + ": probability " + std::to_string(v) +
                                  " outside [0,1]");
    dst[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
}

}  // namespace

ProbVolume read_prob_volume(const std::string& path, const ChannelOrder& order) {
  NiftiImage img = read_volume(path);
  if (img.nt != 3)
    throw ChannelCountMismatch(path + ": expected 3 channels, got " +
                               std::to_string(img.nt));
  ProbVolume pv;
  pv.dims = img.dims;
  pv.spacing = img.spacing;
  for (int c = 0; c < 3; c++) fill_channels(pv, img, order, c, path);
  return pv;
}

ProbVolume read_prob_volume(const std::array<std::string, 3>& paths,
                            const ChannelOrder& order) {
  ProbVolume pv;
  for (int c = 0; c < 3; c++) {
    NiftiImage img = read_volume(paths[c]);
    if (img.nt != 1)
      throw ChannelCountMismatch(paths[c] +
                                 ": per-channel files must be 3D");
    if (c == 0) {
      pv.dims = img.dims;
      pv.spacing = img.spacing;
    } else if (!same_geometry(pv.dims, pv.spacing, img.dims, img.spacing)) {
      throw GeometryMismatch(paths[c] + ": geometry differs from " + paths[0]);
    }
    fill_channels(pv, img, order, c, paths[c]);
  }
  return pv;
}

namespace {

NiftiHeader make_write_header(const Dims& dims, const Spacing& spacing,
                              std::int16_t nt, std::int16_t datatype,
                              std::int16_t bitpix) {
  NiftiHeader h;
  h.dim.fill(1);
  h.dim[0] = nt > 1 ? 4 : 3;
  h.dim[1] = static_cast<std::int16_t>(dims.nx);
  h.dim[2] = static_cast<std::int16_t>(dims.ny);
  h.dim[3] = static_cast<std::int16_t>(dims.nz);
  h.dim[4] = nt;
  h.datatype = datatype;
  h.bitpix = bitpix;
  h.pixdim.fill(0);
  h.pixdim[0] = 1;
  h.pixdim[1] = static_cast<float>(spacing.dx);
  h.pixdim[2] = static_cast<float>(spacing.dy);
  h.pixdim[3] = static_cast<float>(spacing.dz);
  h.vox_offset = 352;
  h.scl_slope = 1;
  h.scl_inter = 0;
  h.xyzt_units = 2;  // millimeters
  h.sform_code = 1;
  h.srow_x = {static_cast<float>(spacing.dx), 0, 0, 0};
  h.srow_y = {0, static_cast<float>(spacing.dy), 0, 0};
  h.srow_z = {0, 0, static_cast<float>(spacing.dz), 0};
  const char* tool = "segeval";
  std::memcpy(h.descrip.data(), tool, std::strlen(tool));
  std::memcpy(h.magic.data(), "n+1", 4);
  return h;
}

void write_nifti(const std::string& path, const NiftiHeader& h,
                 const std::uint8_t* payload, std::size_t payload_bytes) {
  std::vector<std::uint8_t> out(352 + payload_bytes, 0);
  const auto raw = serialize_header(h);
  std::memcpy(out.data(), raw.data(), 348);
  // bytes 348..351 stay zero: no header extensions
  std::memcpy(out.data() + 352, payload, payload_bytes);
  write_file_bytes(path, out.data(), out.size());
}

}  // namespace

void write_label_volume(const std::string& path, const LabelVolume& lv) {
  const NiftiHeader h =
      make_write_header(lv.dims, lv.spacing, 1, nifti_type::uint8, 8);
  write_nifti(path, h, lv.voxels.data(), lv.voxels.size());
}

void write_prob_volume(const std::string& path, const ProbVolume& pv,
                       const ChannelOrder& order) {
  const NiftiHeader h =
      make_write_header(pv.dims, pv.spacing, 3, nifti_type::float32, 32);
  const std::size_t n = pv.dims.count();
  std::vector<std::uint8_t> payload(n * 3 * sizeof(float));
  for (int c = 0; c < 3; c++) {
    const std::vector<float>& src = pv.channel(order[c]);
    if (src.size() != n) throw DimMismatch("probability channel size mismatch");
    std::uint8_t* dst = payload.data() + c * n * sizeof(float);
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(dst, src.data(), n * sizeof(float));
    } else {
      for (std::size_t i = 0; i < n; i++) put_scalar(dst, i * sizeof(float), src[i]);
    }
  }
  write_nifti(path, h, payload.data(), payload.size());
}

}  // namespace segeval
