#ifndef BNR_RNG_HPP
#define BNR_RNG_HPP

#include <array>
#include <cstdint>
#include <limits>

namespace bnr {

/// xoshiro256** (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
/// jump() advances by 2^128 draws, so stream s of a seed starts s jumps
/// past stream 0 and streams never overlap in practice.
class Rng {
public:
    using result_type = std::uint64_t;
    using State = std::array<std::uint64_t, 4>;

    explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1), 53 bits.
    double uniform() {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    void jump();

    const State& state() const { return s_; }
    void set_state(const State& s) { s_ = s; }

    friend bool operator==(const Rng& a, const Rng& b) { return a.s_ == b.s_; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    State s_{};
};

}  // namespace bnr

#endif
