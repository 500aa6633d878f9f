#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace synthforge {

/// SplitMix64 output finalizer. Constants and shifts are fixed so that
/// seeds recorded in manifests stay portable.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Child seed for `stream_id` under `parent`. A bijection in `stream_id` for
/// a fixed parent, so sibling streams never share a seed.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream_id) noexcept
{
    return splitmix64_mix(parent ^ (stream_id * 0x9E3779B97F4A7C15ULL));
}

/// A position in the seed hierarchy: the root seed plus the ids walked to
/// reach this node. The current seed is a pure function of both.
class RngStream {
public:
    RngStream() = default;
    explicit RngStream(std::uint64_t root_seed) : root_(root_seed), seed_(root_seed) {}

    [[nodiscard]] RngStream child(std::uint64_t stream_id) const
    {
        RngStream c = *this;
        c.seed_ = derive_seed(seed_, stream_id);
        c.path_.push_back(stream_id);
        return c;
    }

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t root() const noexcept { return root_; }
    [[nodiscard]] const std::vector<std::uint64_t>& path() const noexcept { return path_; }

    [[nodiscard]] std::string path_string() const
    {
        std::string s = std::to_string(root_);
        for (auto id : path_)
            s += "/" + std::to_string(id);
        return s;
    }

private:
    std::uint64_t root_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<std::uint64_t> path_;
};

/// Variate generator over one stream. Uses std::mt19937_64, whose output
/// sequence is fixed by the standard; the distributions are written here
/// because the std:: ones are implementation-defined.
class Sampler {
public:
    explicit Sampler(const RngStream& stream) : engine_(stream.seed()) {}
    explicit Sampler(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double unit()
    {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on [lo, hi]; returns lo when the range is degenerate.
    double uniform(double lo, double hi)
    {
        if (!(hi > lo))
            return lo;
        const double v = lo + (hi - lo) * unit();
        return v > hi ? hi : v;
    }

    /// Discrete uniform on {lo, ..., hi}.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi)
    {
        if (hi <= lo)
            return lo;
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1ULL;
        if (span == 0) // full 64-bit range
            return static_cast<std::int64_t>(engine_());
        const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span);
        std::uint64_t r = engine_();
        while (r >= limit)
            r = engine_();
        return lo + static_cast<std::int64_t>(r % span);
    }

    /// Index in [0, n).
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(n) - 1)); }

    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - unit(); // (0, 1]
        const double u2 = unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Fixed stream ids of the generation hierarchy
/// (master -> cohort -> stage -> subject -> step).
namespace streams {
inline constexpr std::uint64_t pool = 0xF00D;

// children of a cohort stream
inline constexpr std::uint64_t container = 1;
inline constexpr std::uint64_t blueprint = 2;
inline constexpr std::uint64_t gmm = 3;
inline constexpr std::uint64_t subjects = 4;

// children of a subject stream
inline constexpr std::uint64_t rules = 1;
inline constexpr std::uint64_t final_warp = 2;
inline constexpr std::uint64_t image = 3;

// children of a rule stream
inline constexpr std::uint64_t instance = 0;
inline constexpr std::uint64_t micro = 1;

// children of an image stream
inline constexpr std::uint64_t render = 0;
inline constexpr std::uint64_t aug_params = 1;
inline constexpr std::uint64_t bias = 2;
inline constexpr std::uint64_t noise = 3;
} // namespace streams

} // namespace synthforge
