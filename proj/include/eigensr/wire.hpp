#ifndef EIGENSR_WIRE_HPP_
#define EIGENSR_WIRE_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace eigensr::wire {

// Little-endian byte-level encode/decode. File formats are pinned to LE
// regardless of host order.

inline void put_u32(std::vector<uint8_t> &out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 24));
}

inline uint32_t get_u32(const uint8_t *p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

inline uint16_t get_u16(const uint8_t *p) {
  return static_cast<uint16_t>(p[0] | p[1] << 8);
}

inline void put_u64(std::vector<uint8_t> &out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline uint64_t get_u64(const uint8_t *p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

inline void put_f32(std::vector<uint8_t> &out, float v) {
  put_u32(out, std::bit_cast<uint32_t>(v));
}

inline float get_f32(const uint8_t *p) { return std::bit_cast<float>(get_u32(p)); }

inline void put_f64(std::vector<uint8_t> &out, double v) {
  put_u64(out, std::bit_cast<uint64_t>(v));
}

inline double get_f64(const uint8_t *p) { return std::bit_cast<double>(get_u64(p)); }

/// Hex-encoded SHA-256 of a byte buffer.
std::string sha256_hex(const uint8_t *data, size_t len);

}  // namespace eigensr::wire

#endif
