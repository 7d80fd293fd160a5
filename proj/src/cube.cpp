#include "eigensr/cube.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <vector>

#include "eigensr/wire.hpp"
#include "json.hpp"

namespace eigensr {
namespace {

constexpr uint8_t kHscMagic[8] = {'H', 'S', 'C', '\0', 'v', '1', '\0', '\0'};
constexpr uint8_t kNpyMagic[6] = {0x93, 'N', 'U', 'M', 'P', 'Y'};

void check_geometry(int bands, int height, int width) {
  if (bands < 1 || height < 1 || width < 1)
    throw std::invalid_argument("cube geometry must be positive, got bands=" + std::to_string(bands) +
                                " height=" + std::to_string(height) + " width=" + std::to_string(width));
}

void check_finite(const Matrix &y) {
  for (int l = 0; l < y.rows; ++l) {
    const double *row = y.row(l);
    for (int n = 0; n < y.cols; ++n) {
      if (!std::isfinite(row[n]))
        throw std::invalid_argument("non-finite value at band " + std::to_string(l) + ", pixel " +
                                    std::to_string(n));
    }
  }
}

std::vector<uint8_t> read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto len = static_cast<size_t>(in.tellg());
  in.seekg(0);
  std::vector<uint8_t> buf(len);
  if (len > 0) in.read(reinterpret_cast<char *>(buf.data()), static_cast<std::streamsize>(len));
  if (!in) throw FormatError("failed reading " + path.string());
  return buf;
}

void write_file(const std::filesystem::path &path, const std::vector<uint8_t> &buf) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw FormatError("failed writing " + path.string());
}

HsiCube cube_from_f32_payload(const uint8_t *p, int bands, int height, int width) {
  Matrix y(bands, height * width);
  const size_t count = y.size();
  for (size_t i = 0; i < count; ++i) y.a[i] = static_cast<double>(wire::get_f32(p + 4 * i));
  return cube_from_matrix(std::move(y), height, width);
}

HsiCube read_hsc(const std::vector<uint8_t> &buf, const std::string &name) {
  if (buf.size() < 12) throw FormatError(name + ": truncated header");
  const uint32_t header_len = wire::get_u32(buf.data() + 8);
  if (buf.size() < 12 + static_cast<size_t>(header_len)) throw FormatError(name + ": truncated header");
  nlohmann::json hdr;
  try {
    hdr = nlohmann::json::parse(buf.begin() + 12, buf.begin() + 12 + header_len);
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(name + ": malformed header: " + e.what());
  }
  if (!hdr.contains("bands") || !hdr.contains("height") || !hdr.contains("width") ||
      !hdr.contains("dtype") || !hdr.contains("layout"))
    throw FormatError(name + ": malformed header: missing field");
  if (hdr["dtype"] != "f32le")
    throw FormatError(name + ": unsupported dtype '" + hdr["dtype"].get<std::string>() + "'");
  if (hdr["layout"] != "band-major")
    throw FormatError(name + ": unsupported layout '" + hdr["layout"].get<std::string>() + "'");
  const int bands = hdr["bands"].get<int>();
  const int height = hdr["height"].get<int>();
  const int width = hdr["width"].get<int>();
  check_geometry(bands, height, width);
  const size_t expect = static_cast<size_t>(bands) * height * width * 4;
  const size_t have = buf.size() - 12 - header_len;
  if (have < expect) throw FormatError(name + ": truncated payload");
  if (have > expect) throw FormatError(name + ": payload has trailing bytes");
  return cube_from_f32_payload(buf.data() + 12 + header_len, bands, height, width);
}

// Minimal NPY v1.0 header dict parser; only the three standard keys appear.
std::string dict_value(const std::string &hdr, const std::string &key, const std::string &name) {
  const auto kpos = hdr.find("'" + key + "'");
  if (kpos == std::string::npos) throw FormatError(name + ": NPY header missing key '" + key + "'");
  auto pos = hdr.find(':', kpos);
  if (pos == std::string::npos) throw FormatError(name + ": malformed NPY header");
  ++pos;
  while (pos < hdr.size() && hdr[pos] == ' ') ++pos;
  size_t end = pos;
  if (hdr[pos] == '\'') {
    end = hdr.find('\'', pos + 1);
    if (end == std::string::npos) throw FormatError(name + ": malformed NPY header");
    return hdr.substr(pos + 1, end - pos - 1);
  }
  if (hdr[pos] == '(') {
    end = hdr.find(')', pos);
    if (end == std::string::npos) throw FormatError(name + ": malformed NPY header");
    return hdr.substr(pos, end - pos + 1);
  }
  while (end < hdr.size() && hdr[end] != ',' && hdr[end] != '}') ++end;
  return hdr.substr(pos, end - pos);
}

HsiCube read_npy(const std::vector<uint8_t> &buf, const std::string &name) {
  if (buf.size() < 10) throw FormatError(name + ": truncated NPY header");
  if (buf[6] != 1 || buf[7] != 0)
    throw FormatError(name + ": unsupported NPY version " + std::to_string(buf[6]) + "." +
                      std::to_string(buf[7]));
  const uint16_t header_len = wire::get_u16(buf.data() + 8);
  if (buf.size() < 10 + static_cast<size_t>(header_len)) throw FormatError(name + ": truncated NPY header");
  const std::string hdr(buf.begin() + 10, buf.begin() + 10 + header_len);

  const std::string descr = dict_value(hdr, "descr", name);
  if (descr != "<f4") throw FormatError(name + ": unsupported dtype '" + descr + "', expected <f4");
  const std::string order = dict_value(hdr, "fortran_order", name);
  if (order.find("False") == std::string::npos)
    throw FormatError(name + ": fortran-order arrays are not supported");

  const std::string shape = dict_value(hdr, "shape", name);
  std::vector<long> dims;
  long cur = -1;
  for (char c : shape) {
    if (c >= '0' && c <= '9') {
      cur = (cur < 0 ? 0 : cur * 10) + (c - '0');
    } else if (cur >= 0) {
      dims.push_back(cur);
      cur = -1;
    }
  }
  if (cur >= 0) dims.push_back(cur);
  if (dims.size() != 3)
    throw FormatError(name + ": expected 3-D array (bands, height, width), got " +
                      std::to_string(dims.size()) + "-D");
  const int bands = static_cast<int>(dims[0]);
  const int height = static_cast<int>(dims[1]);
  const int width = static_cast<int>(dims[2]);
  check_geometry(bands, height, width);

  const size_t expect = static_cast<size_t>(bands) * height * width * 4;
  const size_t have = buf.size() - 10 - header_len;
  if (have < expect) throw FormatError(name + ": truncated payload");
  if (have > expect) throw FormatError(name + ": payload has trailing bytes");
  return cube_from_f32_payload(buf.data() + 10 + header_len, bands, height, width);
}

void append_f32_payload(std::vector<uint8_t> &out, const HsiCube &cube, const std::string &name) {
  for (size_t i = 0; i < cube.y.size(); ++i) {
    const float f = static_cast<float>(cube.y.a[i]);
    if (!std::isfinite(f))
      throw std::invalid_argument(name + ": value at band " + std::to_string(i / cube.pixels()) +
                                  ", pixel " + std::to_string(i % cube.pixels()) +
                                  " exceeds float32 range");
    wire::put_f32(out, f);
  }
}

}  // namespace

HsiCube cube_from_matrix(Matrix y, int height, int width) {
  if (y.rows < 1 || y.cols < 1) throw std::invalid_argument("matrix must be non-empty");
  check_geometry(y.rows, height, width);
  if (y.cols != height * width)
    throw std::invalid_argument("pixel count mismatch: matrix has " + std::to_string(y.cols) +
                                " columns, geometry needs " + std::to_string(height * width));
  check_finite(y);
  HsiCube cube;
  cube.bands = y.rows;
  cube.height = height;
  cube.width = width;
  cube.y = std::move(y);
  return cube;
}

HsiCube read_cube(const std::filesystem::path &path) {
  const auto buf = read_file(path);
  const std::string name = path.string();
  if (buf.size() >= 8 && std::equal(kHscMagic, kHscMagic + 8, buf.data())) return read_hsc(buf, name);
  if (buf.size() >= 6 && std::equal(kNpyMagic, kNpyMagic + 6, buf.data())) return read_npy(buf, name);
  throw FormatError(name + ": unrecognized format");
}

void write_cube(const HsiCube &cube, const std::filesystem::path &path) {
  nlohmann::json hdr = {{"bands", cube.bands},
                        {"height", cube.height},
                        {"width", cube.width},
                        {"dtype", "f32le"},
                        {"layout", "band-major"}};
  const std::string hdr_str = hdr.dump();

  std::vector<uint8_t> out;
  out.reserve(12 + hdr_str.size() + cube.y.size() * 4);
  out.insert(out.end(), kHscMagic, kHscMagic + 8);
  wire::put_u32(out, static_cast<uint32_t>(hdr_str.size()));
  out.insert(out.end(), hdr_str.begin(), hdr_str.end());
  append_f32_payload(out, cube, path.string());
  write_file(path, out);
}

void write_cube_npy(const HsiCube &cube, const std::filesystem::path &path) {
  std::string hdr = "{'descr': '<f4', 'fortran_order': False, 'shape': (" +
                    std::to_string(cube.bands) + ", " + std::to_string(cube.height) + ", " +
                    std::to_string(cube.width) + "), }";
  // Pad so magic + version + length field + header is a multiple of 64.
  const size_t base = 10 + hdr.size() + 1;
  hdr.append((64 - base % 64) % 64, ' ');
  hdr.push_back('\n');

  std::vector<uint8_t> out;
  out.reserve(10 + hdr.size() + cube.y.size() * 4);
  out.insert(out.end(), kNpyMagic, kNpyMagic + 6);
  out.push_back(1);
  out.push_back(0);
  out.push_back(static_cast<uint8_t>(hdr.size()));
  out.push_back(static_cast<uint8_t>(hdr.size() >> 8));
  out.insert(out.end(), hdr.begin(), hdr.end());
  append_f32_payload(out, cube, path.string());
  write_file(path, out);
}

}  // namespace eigensr
