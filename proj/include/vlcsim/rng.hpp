#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace vlcsim {

// Stateless mixer used to derive independent stream seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(master ^ splitmix64(stream)) + index);
}

// Named sub-streams so independent consumers never collide.
namespace streams {
constexpr std::uint64_t interleaver = 0x1a7e1e0aULL;
constexpr std::uint64_t frame = 0xf8a3e5ULL;
constexpr std::uint64_t lift = 0x11f7ULL;
constexpr std::uint64_t transfer = 0x7a45fe8ULL;
constexpr std::uint64_t ami = 0xa317ULL;
constexpr std::uint64_t threshold = 0x7881dULL;
}  // namespace streams

// mt19937_64 with hand-rolled output maps. The standard distributions are
// implementation-defined, so they cannot back a byte-reproducibility contract.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // uniform in [0, n), unbiased
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
    std::uint64_t v = eng_();
    while (v > limit) v = eng_();
    return v % n;
  }

  int next_bit() { return static_cast<int>(eng_() >> 63); }

  // standard normal via Box-Muller; second value of each pair is cached
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 eng_;
  double spare_{0.0};
  bool have_spare_{false};
};

}  // namespace vlcsim
