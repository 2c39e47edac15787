#ifndef OAM_RNG_HPP
#define OAM_RNG_HPP

#include <array>
#include <cstdint>
#include <string_view>

#include "oam/errors.hpp"

namespace oam {

// Counter-based generator (Philox 4x64, 10 rounds). A stream is identified by
// a 128-bit key: the user seed plus a label hash. Streams never share output,
// so settings and Monte Carlo replicates can be sampled in any order, or in
// parallel, with identical results.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::string_view label);

    // Derived stream, independent of the parent and of any sibling with a
    // different label/index. Does not advance the parent.
    RngStream substream(std::string_view label) const;
    RngStream substream(std::uint64_t index) const;

    std::uint64_t next_u64();
    // Uniform in [0, 1), 53-bit resolution.
    double next_double();
    // Poisson variate with the given mean. mean < 0 throws DomainError,
    // mean == 0 returns 0 deterministically.
    std::int64_t poisson(double mean);

    // Raw block function, exposed for known-answer tests.
    static std::array<std::uint64_t, 4> philox_block(
        const std::array<std::uint64_t, 4>& counter,
        const std::array<std::uint64_t, 2>& key);

  private:
    RngStream(std::array<std::uint64_t, 2> key);
    void refill();

    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 4> counter_{};
    std::array<std::uint64_t, 4> block_{};
    int cursor_ = 4;  // forces refill on first draw
};

// FNV-1a 64-bit hash, used for stream labels and file content hashes.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ull);

}  // namespace oam

#endif
