#include "bubblelab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>

namespace bubblelab {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_id(std::uint64_t tag, int i, int j) {
  return mix64(tag * 0x100000001b3ULL + static_cast<std::uint64_t>(i) * 977 +
               static_cast<std::uint64_t>(j) * 131071);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
    : state_(mix64(mix64(mix64(seed) ^ stream) ^ index)) {}

std::uint64_t CounterRng::next_u64() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double CounterRng::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u = uniform();
  const double v = uniform();
  const double r = std::sqrt(-2.0 * std::log(u));
  const double a = 2.0 * std::numbers::pi * v;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

Vec CounterRng::normal_vec(int d) {
  Vec g(d);
  for (int k = 0; k < d; ++k) g(k) = normal();
  return g;
}

Vec CounterRng::unit_vec(int d) {
  for (;;) {
    Vec g = normal_vec(d);
    const double r = g.norm();
    if (r > 1e-300) return g / r;
  }
}

int worker_count() {
  if (const char* env = std::getenv("BUBBLELAB_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

constexpr long long kBlock = 4096;

struct Partial {
  Vec sum;
  Vec sumsq;
};

Partial tree_sum(std::vector<Partial>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  Partial a = tree_sum(parts, lo, mid);
  Partial b = tree_sum(parts, mid, hi);
  a.sum += b.sum;
  a.sumsq += b.sumsq;
  return a;
}

}  // namespace

SampleStats sample_mean(long long samples, int dim,
                        const std::function<void(long long, Vec&)>& fn, int workers) {
  if (samples <= 0) throw DomainError("sample count must be positive");
  const long long nblocks = (samples + kBlock - 1) / kBlock;
  std::vector<Partial> parts(nblocks);

  auto run_block = [&](long long b) {
    Partial acc{Vec::Zero(dim), Vec::Zero(dim)};
    Vec out(dim);
    const long long lo = b * kBlock;
    const long long hi = std::min(samples, lo + kBlock);
    for (long long s = lo; s < hi; ++s) {
      out.setZero();
      fn(s, out);
      acc.sum += out;
      acc.sumsq += out.cwiseProduct(out);
    }
    parts[b] = std::move(acc);
  };

  if (workers <= 0) workers = worker_count();
  workers = static_cast<int>(std::min<long long>(workers, nblocks));
  if (workers <= 1) {
    for (long long b = 0; b < nblocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (long long b = w; b < nblocks; b += workers) run_block(b);
      });
    }
    for (auto& t : pool) t.join();
  }

  Partial tot = tree_sum(parts, 0, parts.size());
  SampleStats st;
  st.samples = samples;
  const double m = static_cast<double>(samples);
  st.mean = tot.sum / m;
  Vec var = (tot.sumsq / m - st.mean.cwiseProduct(st.mean)).cwiseMax(0.0);
  if (samples > 1) var *= m / (m - 1.0);
  st.stderr_ = (var / m).cwiseSqrt();
  return st;
}

Vec sample_on_pair_sphere(const PairSphere& S, CounterRng& rng) {
  const int d = static_cast<int>(S.center.size());
  for (;;) {
    Vec g = rng.normal_vec(d);
    g -= g.dot(S.unit_normal) * S.unit_normal;
    const double r = g.norm();
    if (r > 1e-300) {
      Vec p = S.center + (S.radius / r) * g;
      return p / p.norm();
    }
  }
}

}  // namespace bubblelab
