#pragma once

#include <cstdint>

namespace rctmiss {

// Splittable counter-style generator: each (seed, stream) pair gets its own
// odd increment, so streams are disjoint by construction and replications
// can be dispatched to workers in any order without sharing state.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double next_uniform();  // [0, 1)
  double next_normal();   // standard normal via the polar method
  bool next_bernoulli(double p);

 private:
  std::uint64_t state_;
  std::uint64_t gamma_;
  double spare_ = 0;
  bool has_spare_ = false;
};

}  // namespace rctmiss
