#ifndef METACOARSE_HASH_HPP_
#define METACOARSE_HASH_HPP_

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>

namespace metacoarse {

// 64-bit FNV-1a. Stable across runs and platforms, unlike std::hash.
class Fnv1a {
 public:
  Fnv1a& bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  Fnv1a& str(std::string_view s) { return bytes(s.data(), s.size()).u64(s.size()); }
  Fnv1a& u64(std::uint64_t v) { return bytes(&v, sizeof v); }
  Fnv1a& f64(double v) {
    if (v == 0.0) v = 0.0;  // fold -0.0
    return bytes(&v, sizeof v);
  }
  Fnv1a& f64s(std::span<const double> values) {
    for (double v : values) f64(v);
    return *this;
  }

  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string Fnv1a::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  std::uint64_t v = state_;
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace metacoarse

#endif  // METACOARSE_HASH_HPP_
