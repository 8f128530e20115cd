#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

// Little-endian fixed-width binary primitives for the model formats.
namespace vulnlearn::io {

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; big-endian hosts need swapping");

template <typename T>
void write_raw(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T read_raw(std::istream& in) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof value);
  if (!in) throw std::runtime_error("model file truncated");
  return value;
}

inline void write_u32(std::ostream& out, std::uint32_t v) { write_raw(out, v); }
inline void write_i32(std::ostream& out, std::int32_t v) { write_raw(out, v); }
inline void write_u64(std::ostream& out, std::uint64_t v) { write_raw(out, v); }
inline void write_f32(std::ostream& out, float v) { write_raw(out, v); }
inline void write_f64(std::ostream& out, double v) { write_raw(out, v); }

inline std::uint32_t read_u32(std::istream& in) { return read_raw<std::uint32_t>(in); }
inline std::int32_t read_i32(std::istream& in) { return read_raw<std::int32_t>(in); }
inline std::uint64_t read_u64(std::istream& in) { return read_raw<std::uint64_t>(in); }
inline float read_f32(std::istream& in) { return read_raw<float>(in); }
inline double read_f64(std::istream& in) { return read_raw<double>(in); }

}  // namespace vulnlearn::io
