#include "rctmiss/rng.hpp"

#include <cmath>

namespace rctmiss {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream) {
  state_ = mix(seed + kGolden) ^ mix((stream + 1) * kGolden);
  // distinct odd increments keep the streams on disjoint orbits
  gamma_ = mix(seed ^ (stream * kGolden + kGolden)) | 1ULL;
}

std::uint64_t StreamRng::next_u64() {
  state_ += gamma_;
  return mix(state_);
}

double StreamRng::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double StreamRng::next_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0, v = 0, s = 0;
  do {
    u = 2.0 * next_uniform() - 1.0;
    v = 2.0 * next_uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

bool StreamRng::next_bernoulli(double p) { return next_uniform() < p; }

}  // namespace rctmiss
