#pragma once

#include <array>
#include <cstdint>

namespace tailsim {

// Counter-based generator (Philox-2x64, 10 rounds). Each (counter, stream,
// seed) triple maps to two 64-bit outputs through a fixed bijection, so any
// draw is addressable without sequential state. That is what makes runs
// reproducible under arbitrary worker partitioning: sample i always reads
// stream component_stream(c, i) regardless of which thread processes it.
struct Philox2x64 {
    static constexpr std::uint64_t kMult = 0xD2B74407B1CE6E93ull;
    static constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ull;
    static constexpr int kRounds = 10;

    static std::array<std::uint64_t, 2> block(std::uint64_t counter,
                                              std::uint64_t stream,
                                              std::uint64_t key) {
        std::uint64_t x0 = counter;
        std::uint64_t x1 = stream;
        std::uint64_t k = key;
        for (int r = 0; r < kRounds; ++r) {
            const unsigned __int128 prod =
                static_cast<unsigned __int128>(kMult) * x0;
            const std::uint64_t hi = static_cast<std::uint64_t>(prod >> 64);
            const std::uint64_t lo = static_cast<std::uint64_t>(prod);
            x0 = hi ^ k ^ x1;
            x1 = lo;
            k += kWeyl;
        }
        return {x0, x1};
    }
};

// Stream id layout: the high 16 bits address a logical component of a run
// (law draws, initial values, diagnostics, ...), the low 48 bits address the
// sample index within that component. Samplers consume a fixed number of
// uniforms per draw, so sample i's stream never depends on other samples.
inline constexpr std::uint64_t kComponentStride = 1ull << 48;

inline constexpr std::uint64_t component_stream(std::uint64_t component,
                                                std::uint64_t sample_index) {
    return component * kComponentStride + sample_index;
}

class RngStream {
public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_(stream_id) {}

    std::uint64_t next_u64() {
        if (buffered_ == 0) {
            block_ = Philox2x64::block(counter_++, stream_, seed_);
            buffered_ = 2;
        }
        return block_[2 - buffered_--];
    }

    // Uniform on the open interval (0, 1): 53 high bits plus a half-ulp
    // offset, so 0 and 1 are unreachable and log/inverse-CDF transforms are
    // safe without clamping.
    double next_double() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

    // Fresh stream under the same seed; independent of this one for any
    // distinct id.
    RngStream derive(std::uint64_t stream_id) const {
        return RngStream(seed_, stream_id);
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 2> block_{0, 0};
    int buffered_ = 0;
};

// Verifies the generator against frozen output vectors; returns false if
// the implementation ever drifts (miscompile, bad refactor).
bool rng_self_check();

}  // namespace tailsim
