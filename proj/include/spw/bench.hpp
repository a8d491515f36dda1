#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "spw/sampler.hpp"

namespace spw {

enum class BenchMethod { efficient, dense };

std::string to_string(BenchMethod method);

struct BenchTiming {
  double seconds = 0.0;   ///< median wall time of one repetition of `draws` samples
  double checksum = 0.0;  ///< sum of d_1 over the draws, identical across repetitions
};

/// Times `draws` samples plus singular values, `reps` times, and reports the
/// median. The efficient method samples H and uses top_svd with `top`
/// values (or full_svd when top is 0); the dense method samples G and takes
/// its full SVD. Draw i uses substream i of RandomStream(seed).
BenchTiming time_method(const SpikeSpec& spec, BenchMethod method, std::size_t draws, std::size_t top,
                        std::uint64_t seed, std::size_t reps = 3);

}  // namespace spw
