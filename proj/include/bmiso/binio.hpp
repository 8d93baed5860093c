#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "bmiso/errors.hpp"

namespace bmiso::binio {

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(bool(is), ErrorCode::ConfigError, "truncated binary stream");
  return v;
}

inline void write_bytes(std::ostream& os, const std::vector<std::uint8_t>& b) {
  write_pod<std::uint64_t>(os, b.size());
  if (!b.empty())
    os.write(reinterpret_cast<const char*>(b.data()),
             static_cast<std::streamsize>(b.size()));
}

inline std::vector<std::uint8_t> read_bytes(std::istream& is) {
  auto n = read_pod<std::uint64_t>(is);
  require(n <= (std::uint64_t(1) << 30), ErrorCode::ConfigError,
          "unreasonable length in binary stream");
  std::vector<std::uint8_t> b(n);
  if (n > 0) {
    is.read(reinterpret_cast<char*>(b.data()),
            static_cast<std::streamsize>(n));
    require(bool(is), ErrorCode::ConfigError, "truncated binary stream");
  }
  return b;
}

inline void write_magic(std::ostream& os, const char tag[4]) {
  os.write(tag, 4);
}

inline void expect_magic(std::istream& is, const char tag[4],
                         const std::string& what) {
  char got[4] = {};
  is.read(got, 4);
  require(bool(is) && std::memcmp(got, tag, 4) == 0, ErrorCode::ConfigError,
          "bad magic for " + what);
}

}  // namespace bmiso::binio
