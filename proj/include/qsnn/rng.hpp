#pragma once

#include <cstdint>
#include <random>

#include "qsnn/errors.hpp"

namespace qsnn {

// Deterministic random source. Every independently repeatable unit of work
// (one training run, one initialization) gets its own substream derived from
// the experiment seed and the sample index, so results do not depend on
// evaluation order or thread scheduling.
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : engine_(seed) {}

  static SampleRng substream(std::uint64_t base_seed, std::uint64_t index) {
    return SampleRng(base_seed ^ index);
  }

  // Uniform double in [lo, hi), mapped from the top 53 bits of the engine
  // output so the value stream is platform independent.
  double uniform(double lo, double hi) {
    if (!(lo < hi)) throw ValidationError("uniform: need lo < hi");
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qsnn
