#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace gridsur {

inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for a (parent, tag...) path. Every random stream in the
/// project is derived from one master seed through this function.
inline std::uint64_t derive_seed(std::uint64_t parent,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = splitmix64(parent);
  for (auto t : tags) s = splitmix64(s ^ splitmix64(t));
  return s;
}

inline std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag) {
  return derive_seed(parent, {fnv1a(tag)});
}

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

/// printf-style "%.<digits>g" formatting.
std::string format_double(double v, int digits = 10);

}  // namespace gridsur
