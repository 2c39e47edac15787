#include "oam/rng.hpp"

#include <cmath>

namespace oam {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ull;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ull;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

inline std::uint64_t mul_hi64(std::uint64_t a, std::uint64_t b) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(a) * b) >> 64);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis) {
    std::uint64_t h = basis;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::array<std::uint64_t, 4> RngStream::philox_block(
    const std::array<std::uint64_t, 4>& counter,
    const std::array<std::uint64_t, 2>& key) {
    std::array<std::uint64_t, 4> c = counter;
    std::array<std::uint64_t, 2> k = key;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t hi0 = mul_hi64(kMul0, c[0]);
        const std::uint64_t lo0 = kMul0 * c[0];
        const std::uint64_t hi1 = mul_hi64(kMul1, c[2]);
        const std::uint64_t lo1 = kMul1 * c[2];
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

RngStream::RngStream(std::array<std::uint64_t, 2> key) : key_(key) {}

RngStream::RngStream(std::uint64_t seed, std::string_view label)
    : key_{seed, fnv1a64(label)} {}

RngStream RngStream::substream(std::string_view label) const {
    // Children keep the seed word and fold the label into the lane word, so
    // the whole tree is reproducible from (seed, path of labels).
    return RngStream({key_[0], fnv1a64(label, key_[1] ^ 0x5851f42d4c957f2dull)});
}

RngStream RngStream::substream(std::uint64_t index) const {
    char buf[2 + 16 + 1] = "i:";
    for (int i = 0; i < 16; ++i)
        buf[2 + i] = "0123456789abcdef"[(index >> (60 - 4 * i)) & 0xf];
    return substream(std::string_view(buf, 18));
}

void RngStream::refill() {
    block_ = philox_block(counter_, key_);
    cursor_ = 0;
    if (++counter_[0] == 0)
        if (++counter_[1] == 0)
            if (++counter_[2] == 0) ++counter_[3];
}

std::uint64_t RngStream::next_u64() {
    if (cursor_ >= 4) refill();
    return block_[cursor_++];
}

double RngStream::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::int64_t RngStream::poisson(double mean) {
    if (mean < 0.0 || !std::isfinite(mean))
        throw DomainError("poisson: mean must be finite and non-negative");
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
        // Inversion by sequential search.
        std::int64_t k = 0;
        double p = std::exp(-mean);
        double s = p;
        const double u = next_double();
        while (u > s) {
            ++k;
            p *= mean / static_cast<double>(k);
            s += p;
            if (k > 2000) break;  // u in a sub-ulp tail
        }
        return k;
    }
    // Hormann's transformed rejection with squeeze (PTRS), valid for mean >= 10.
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
        const double u = next_double() - 0.5;
        const double v = next_double();
        const double us = 0.5 - std::abs(u);
        if (us < 1e-12) continue;
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        const double k = kf;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            k * log_mean - mean - std::lgamma(k + 1.0))
            return static_cast<std::int64_t>(kf);
    }
}

}  // namespace oam
