#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace mlao {

using Rng = std::mt19937_64;

/// Raised when an input has no usable content (flat image, all-zero frame, ...).
class DegenerateInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for unreadable, truncated or mismatched binary files.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream for work item `index` of a run seeded with `seed`.
inline Rng make_stream(std::uint64_t seed, std::uint64_t index)
{
    return Rng(splitmix64(seed ^ index));
}

inline void require(bool cond, const std::string& msg)
{
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace mlao
