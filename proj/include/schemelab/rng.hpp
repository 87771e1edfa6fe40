#pragma once

#include <cstdint>

namespace schemelab {

// Counter-based uniform stream. Every (seed, draw index) pair names an
// independent stream, so a draw's values never depend on which worker or
// shard produced it.
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::uint64_t draw_index) noexcept;

    std::uint64_t next_u64() noexcept;

    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;

private:
    std::uint64_t state_;
};

// SplitMix64 output function.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace schemelab
