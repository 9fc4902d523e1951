// Little-endian fixed-width read/write helpers for the binary file formats.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "dwellrec/errors.hpp"

namespace dwellrec::detail {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

template <typename T>
void write_le(std::ostream& os, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  os.write(buf, sizeof(T));
}

// Returns false on clean EOF before any byte; throws FormatError on a
// truncated value.
template <typename T>
bool try_read_le(std::istream& is, T& v, const std::string& what) {
  char buf[sizeof(T)];
  is.read(buf, sizeof(T));
  if (is.gcount() == 0 && is.eof()) return false;
  if (is.gcount() != static_cast<std::streamsize>(sizeof(T))) {
    throw FormatError("truncated " + what);
  }
  std::memcpy(&v, buf, sizeof(T));
  return true;
}

template <typename T>
T read_le(std::istream& is, const std::string& what) {
  T v{};
  if (!try_read_le(is, v, what)) throw FormatError("unexpected end of file reading " + what);
  return v;
}

inline std::string read_bytes(std::istream& is, std::size_t n, const std::string& what) {
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (is.gcount() != static_cast<std::streamsize>(n)) throw FormatError("truncated " + what);
  return s;
}

}  // namespace dwellrec::detail
