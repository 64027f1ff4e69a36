#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace novelty {

// Philox4x32-10 counter-based generator. The key is
// the master seed; the upper half of the counter names a stream and the lower
// half counts blocks within it, so any (seed, stream) pair can be replayed
// independently of scheduling.
class Philox {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block generate(Block counter, Key key);

    Philox(std::uint64_t seed, std::uint64_t stream);

    // Stream id from a path of small integers, e.g. {realization, purpose}.
    static std::uint64_t stream_id(std::initializer_list<std::uint64_t> path);

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    // (0, 1), never exactly 0 or 1.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    // Uniform integer in [0, n), n >= 1, without modulo bias.
    std::uint64_t below(std::uint64_t n);

private:
    void refill();

    Key key_;
    Block counter_;
    Block buffer_{};
    int used_ = 4;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

}  // namespace novelty
