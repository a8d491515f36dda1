#include "spw/bench.hpp"

#include <algorithm>
#include <chrono>
#include <vector>

#include "spw/error.hpp"
#include "spw/spectra.hpp"

namespace spw {

std::string to_string(BenchMethod method) { return method == BenchMethod::efficient ? "efficient" : "dense"; }

namespace {

double run_once(const SpikeSpec& spec, BenchMethod method, std::size_t draws, std::size_t top, std::uint64_t seed) {
  const RandomStream base(seed);
  const std::size_t ell = std::min(top, spec.block_cols());
  double checksum = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    RandomStream stream = base.substream(i);
    if (method == BenchMethod::efficient) {
      const BandedSample h = sample_banded(spec, stream);
      checksum += (ell > 0 ? top_svd(h, ell) : full_svd(h, false)).singular_values.front();
    } else {
      checksum += dense_singular_values(sample_dense(spec, stream)).front();
    }
  }
  return checksum;
}

}  // namespace

BenchTiming time_method(const SpikeSpec& spec, BenchMethod method, std::size_t draws, std::size_t top,
                        std::uint64_t seed, std::size_t reps) {
  if (draws < 1 || reps < 1) throw DomainError("bench: draws and reps must be >= 1");
  std::vector<double> times;
  BenchTiming out;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    out.checksum = run_once(spec, method, draws, top, seed);
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  std::sort(times.begin(), times.end());
  out.seconds = times[times.size() / 2];
  return out;
}

}  // namespace spw
