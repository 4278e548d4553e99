#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>

namespace netres {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a master seed and a stream name,
// so e.g. trace generation and action sampling never share draws.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(master ^ splitmix64(h));
}

// mt19937_64 with hand-rolled samplers. The raw engine output is pinned by
// the standard, and the samplers below consume it in a fixed pattern, so a
// seed reproduces the same stream on any platform (std::*_distribution does
// not guarantee that).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // uniform in [0,1), 53-bit resolution
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // uniform integer in [lo, hi] inclusive, unbiased
  int uniform_int(int lo, int hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
    std::uint64_t range = static_cast<std::uint64_t>(hi) - lo + 1;
    std::uint64_t bound = range * (UINT64_MAX / range);
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= bound);
    return lo + static_cast<int>(x % range);
  }

  // Poisson via Knuth's product method; fine for the small means used here.
  int poisson(double mean) {
    if (mean < 0) throw std::invalid_argument("poisson: negative mean");
    const double limit = std::exp(-mean);
    int k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

  // geometric on {1,2,...} with the given mean (memoryless region lengths)
  int geometric1(double mean) {
    if (mean < 1) throw std::invalid_argument("geometric1: mean must be >= 1");
    const double p = 1.0 / mean;
    double u = uniform();
    while (u <= 0) u = uniform();  // log(0) guard
    double k = std::floor(std::log(u) / std::log1p(-p));
    return 1 + static_cast<int>(k);
  }

  // exponential with the given mean, rounded up to an integer >= 1
  int exponential1(double mean) {
    double u = uniform();
    while (u <= 0) u = uniform();
    double x = -mean * std::log(u);
    return std::max(1, static_cast<int>(std::ceil(x)));
  }

  // standard normal, Box-Muller (two uniforms per pair, second cached)
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  // index drawn according to probs (need not be exactly normalized);
  // single uniform + CDF walk
  int sample_discrete(std::span<const double> probs) {
    if (probs.empty()) throw std::invalid_argument("sample_discrete: empty");
    double total = 0;
    for (double p : probs) total += p;
    double u = uniform() * total;
    double acc = 0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0;
  bool have_spare_ = false;
};

}  // namespace netres
