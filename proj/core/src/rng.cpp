#include "paws/rng.hpp"

#include <cmath>
#include <numbers>

#include "paws/errors.hpp"

namespace paws {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
    return mix64(mix64(base ^ 0xa5a5a5a5a5a5a5a5ULL) ^ mix64(stream) ^ mix64(index * 0x9e3779b97f4a7c15ULL + 1));
}

double Rng::normal() {
    // Box-Muller; u1 nudged away from zero so log() is finite.
    double u1 = uniform();
    if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::index(std::size_t n) {
    if (n == 0) throw DomainError("Rng::index: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return static_cast<std::size_t>(x % n);
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) throw DomainError("sample_without_replacement: k exceeds n");
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + index(n - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

void Rng::shuffle(std::span<std::size_t> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const std::size_t j = index(i);
        std::swap(values[i - 1], values[j]);
    }
}

}  // namespace paws
