// Deterministic sampling: a portable 64-bit generator with per-sample
// substreams (stream k depends only on (seed, k), never on scheduling), plus
// the point/direction samplers every command shares and a deterministic
// parallel map whose reduction is independent of completion order.

#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace kropina {

struct Rng {
  uint64_t state;

  uint64_t next() {
    // splitmix64
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }
  double gaussian();
};

Rng make_stream(uint64_t seed, uint64_t stream);

struct FieldSpec;

// Uniform point in the guard box, stream keyed by (seed, point index).
std::vector<double> sample_point(const FieldSpec& spec, uint64_t seed, int point_index);

// Direction on the a-unit sphere at x, rejected until beta >= 0.1 * b * alpha
// so every downstream division stays well inside the admissible cone. Stream
// keyed by (seed, point index, dir index).
std::vector<double> sample_direction(const FieldSpec& spec, std::span<const double> x,
                                     uint64_t seed, int point_index, int dir_index);

int default_workers();

// Runs fn(i) for i in [0, count) over `workers` threads (1 = inline) and
// returns results in index order.
template <class R, class Fn>
std::vector<R> parallel_map(int count, int workers, Fn&& fn) {
  std::vector<R> out(count);
  if (workers <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int nt = std::min(workers, count);
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return out;
}

}  // namespace kropina
