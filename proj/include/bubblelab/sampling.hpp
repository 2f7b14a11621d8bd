#pragma once

#include "bubblelab/core.hpp"

#include <cstdint>
#include <functional>

namespace bubblelab {

// Counter-based generator: the stream for (seed, stream, index) is a pure
// function of those three numbers, so samples do not depend on scheduling.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);
  std::uint64_t next_u64();
  double uniform();  // (0, 1)
  double normal();
  Vec normal_vec(int d);
  Vec unit_vec(int d);

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t stream_id(std::uint64_t tag, int i = 0, int j = 0);

int worker_count();

// Mean and standard error of a vector-valued per-sample quantity.
struct SampleStats {
  Vec mean;
  Vec stderr_;
  long long samples = 0;
};

// Evaluates `fn(index, out)` for index in [0, samples) and reduces the
// sums in fixed-size blocks combined by pairwise summation, so the result
// is identical for any worker count.
SampleStats sample_mean(long long samples, int dim,
                        const std::function<void(long long, Vec&)>& fn, int workers = 0);

// Uniform point on the geodesic sphere with given ambient center, unit normal
// of its hyperplane and radius.
Vec sample_on_pair_sphere(const PairSphere& S, CounterRng& rng);

}  // namespace bubblelab
