#include "schemelab/rng.hpp"

namespace schemelab {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

CounterStream::CounterStream(std::uint64_t seed, std::uint64_t draw_index) noexcept
    : state_(mix64(mix64(seed ^ 0x5EED5EED5EED5EEDULL) + kGolden * (draw_index + 1))) {}

std::uint64_t CounterStream::next_u64() noexcept {
    state_ += kGolden;
    return mix64(state_);
}

double CounterStream::uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

}  // namespace schemelab
