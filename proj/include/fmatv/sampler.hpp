#pragma once

// Deterministic input generation for sampled validation. The i-th random input
// is a pure function of (seed, i), so runs are reproducible and can be split
// across threads in any way.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fmatv/binary64.hpp"
#include "fmatv/value.hpp"

namespace fmatv {

struct SamplerConfig {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  int exp_min = -50;
  int exp_max = 50;
  bool include_special_corpus = true;

  void validate() const {
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    if (exp_min > exp_max) throw std::invalid_argument("exponent range is empty");
    if (exp_min < -1074 || exp_max > 1023) throw std::invalid_argument("exponent range must lie within [-1074, 1023]");
  }
};

inline constexpr std::size_t kCorpusCap = 10'000;

/// Boundary values: signed zeros, extreme subnormals, neighbours of 1.0 and
/// the largest finite value, each with both signs.
inline std::vector<Binary64> special_corpus() {
  const Binary64 positives[] = {kPositiveZero, kMinSubnormal, kMaxSubnormal, Binary64{kOne.bits - 1}, kOne,
                                Binary64{kOne.bits + 1}, kMaxFinite};
  std::vector<Binary64> out;
  for (Binary64 p : positives) {
    out.push_back(p);
    out.push_back(p.negate());
  }
  return out;
}

/// Cross product of the corpus over `nparams` positions in lexicographic
/// order, truncated to `cap` tuples.
inline std::vector<std::vector<Value>> corpus_inputs(std::size_t nparams, std::size_t cap = kCorpusCap) {
  const auto corpus = special_corpus();
  std::vector<std::vector<Value>> out;
  if (nparams == 0) return {{}};
  std::vector<std::size_t> idx(nparams, 0);
  while (out.size() < cap) {
    std::vector<Value> row;
    row.reserve(nparams);
    for (std::size_t k : idx) row.push_back(Value::dbl(corpus[k]));
    out.push_back(std::move(row));
    std::size_t pos = nparams;
    while (pos > 0) {
      --pos;
      if (++idx[pos] < corpus.size()) break;
      idx[pos] = 0;
      if (pos == 0) return out;
    }
  }
  return out;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// One finite value: uniform sign, uniform exponent in [exp_min, exp_max],
/// uniform 52-bit mantissa. Exponents below -1022 scale into the subnormals.
inline Binary64 random_binary64(std::uint64_t w_mant, std::uint64_t w_exp, int exp_min, int exp_max) {
  const std::uint64_t span = static_cast<std::uint64_t>(exp_max - exp_min) + 1;
  const int e = exp_min + static_cast<int>((static_cast<unsigned __int128>(w_exp) * span) >> 64);
  const std::uint64_t sign = w_mant & Binary64::kSignMask;
  const std::uint64_t frac = w_mant & Binary64::kFracMask;
  if (e >= -1022) return Binary64{sign | (static_cast<std::uint64_t>(e + 1023) << 52) | frac};
  const double normal = Binary64{(std::uint64_t{1023} << 52) | frac}.to_double();
  const double v = std::ldexp(normal, e);
  return sign ? b64(-v) : b64(v);
}

inline std::vector<Value> sample_input(const SamplerConfig& cfg, std::uint64_t index, std::size_t nparams) {
  std::vector<Value> out;
  out.reserve(nparams);
  const std::uint64_t base = splitmix64(cfg.seed);
  for (std::size_t k = 0; k < nparams; ++k) {
    const std::uint64_t counter = (index * nparams + k) * 2;
    const std::uint64_t w_mant = splitmix64(base ^ splitmix64(counter));
    const std::uint64_t w_exp = splitmix64(base ^ splitmix64(counter + 1));
    out.push_back(Value::dbl(random_binary64(w_mant, w_exp, cfg.exp_min, cfg.exp_max)));
  }
  return out;
}

}  // namespace fmatv
