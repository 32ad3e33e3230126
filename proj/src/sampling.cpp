#include "kropina/sampling.hpp"

#include <cmath>
#include <cstdlib>

#include "kropina/field.hpp"
#include "kropina/linalg.hpp"

namespace kropina {

double Rng::gaussian() {
  // Box-Muller on the open interval; avoids log(0)
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

Rng make_stream(uint64_t seed, uint64_t stream) {
  // decorrelate the stream id before merging it with the seed
  uint64_t z = stream + 0x632be59bd9b4e019ull;
  z = (z ^ (z >> 31)) * 0xd6e8feb86659fd93ull;
  z ^= z >> 32;
  return Rng{seed ^ z};
}

std::vector<double> sample_point(const FieldSpec& spec, uint64_t seed, int point_index) {
  Rng rng = make_stream(seed, 0x10000u + static_cast<uint64_t>(point_index));
  std::vector<double> x(spec.n);
  for (int i = 0; i < spec.n; ++i)
    x[i] = rng.uniform(spec.guard[i][0], spec.guard[i][1]);
  return x;
}

std::vector<double> sample_direction(const FieldSpec& spec, std::span<const double> x,
                                     uint64_t seed, int point_index, int dir_index) {
  const int n = spec.n;
  Rng rng = make_stream(seed, (static_cast<uint64_t>(point_index + 1) << 20) +
                                  static_cast<uint64_t>(dir_index));
  FieldEval<double> fe = eval_field(spec, x);
  const double b = std::sqrt(fe.b2);
  for (int attempt = 0; attempt < 4096; ++attempt) {
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.gaussian();
    double a_norm2 = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a_norm2 += fe.a(i, j) * y[i] * y[j];
    if (a_norm2 < 1e-12) continue;
    const double inv = 1.0 / std::sqrt(a_norm2);
    double beta = 0.0;
    for (int i = 0; i < n; ++i) {
      y[i] *= inv;
      beta += fe.b[i] * y[i];
    }
    // alpha = 1 after normalization, so the cone condition is beta >= 0.1 b
    if (beta >= 0.1 * b) return y;
  }
  throw DomainError("direction sampling failed to reach the admissible cone");
}

int default_workers() {
  if (const char* env = std::getenv("KROPINA_WORKERS")) {
    const int w = std::atoi(env);
    if (w >= 1) return w;
  }
  return 1;
}

}  // namespace kropina
