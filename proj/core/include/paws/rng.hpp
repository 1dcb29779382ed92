#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace paws {

// Splitmix64 step, used to derive independent seed streams.
std::uint64_t mix64(std::uint64_t x);
// Derive the seed of a named stream: hash(base, stream, index). The training
// loop seeds one Rng per (step, purpose), which makes runs resumable without
// persisting generator state.
std::uint64_t stream_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0);

// Stream ids for stream_seed. One id per independent source of randomness.
namespace streams {
inline constexpr std::uint64_t kParamInit = 1;
inline constexpr std::uint64_t kDataset = 2;
inline constexpr std::uint64_t kLabelPick = 3;
inline constexpr std::uint64_t kEpochShuffle = 4;
inline constexpr std::uint64_t kViews = 5;
inline constexpr std::uint64_t kSupportDraw = 6;
inline constexpr std::uint64_t kSupportViews = 7;
inline constexpr std::uint64_t kFineTune = 8;
inline constexpr std::uint64_t kVerify = 9;
}  // namespace streams

/// Deterministic random source. All distributions are hand-rolled on top of
/// mt19937_64 so the sequence does not depend on the standard library's
/// distribution implementations.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1) with 53 usable bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller. No cached spare: two raw draws per call.
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Uniform index in [0, n) by rejection, exact for any n.
    std::size_t index(std::size_t n);

    // k distinct values from [0, n), in random order (partial Fisher-Yates).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

    void shuffle(std::span<std::size_t> values);

   private:
    std::mt19937_64 gen_;
};

}  // namespace paws
