#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace apmionet::binio {

inline constexpr char kMagic[] = "APMIONET1";
inline constexpr std::size_t kMagicLen = 9;

template <class U>
U to_le(U v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    U r = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) r = static_cast<U>((r << 8) | ((v >> (8 * i)) & 0xff));
    return r;
  }
}

inline void put_u8(std::ostream& os, std::uint8_t v) { os.put(static_cast<char>(v)); }
inline void put_u32(std::ostream& os, std::uint32_t v) {
  v = to_le(v);
  os.write(reinterpret_cast<const char*>(&v), 4);
}
inline void put_u64(std::ostream& os, std::uint64_t v) {
  v = to_le(v);
  os.write(reinterpret_cast<const char*>(&v), 8);
}
inline void put_f64(std::ostream& os, double d) { put_u64(os, std::bit_cast<std::uint64_t>(d)); }
inline void put_magic(std::ostream& os, const char* tag = "") {
  os.write(kMagic, kMagicLen);
  os.write(tag, static_cast<std::streamsize>(std::strlen(tag)));
}

inline void need(std::istream& is, const char* what) {
  if (!is) throw std::runtime_error(std::string("truncated binary file while reading ") + what);
}
inline std::uint8_t get_u8(std::istream& is, const char* what) {
  const int c = is.get();
  need(is, what);
  return static_cast<std::uint8_t>(c);
}
inline std::uint32_t get_u32(std::istream& is, const char* what) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  need(is, what);
  return to_le(v);
}
inline std::uint64_t get_u64(std::istream& is, const char* what) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 8);
  need(is, what);
  return to_le(v);
}
inline double get_f64(std::istream& is, const char* what) { return std::bit_cast<double>(get_u64(is, what)); }
inline void expect_magic(std::istream& is, const char* tag = "") {
  const std::size_t n = kMagicLen + std::strlen(tag);
  std::string got(n, '\0');
  is.read(got.data(), static_cast<std::streamsize>(n));
  if (!is || got != std::string(kMagic) + tag) {
    throw std::runtime_error("bad file header: expected " + std::string(kMagic) + tag);
  }
}

}  // namespace apmionet::binio
