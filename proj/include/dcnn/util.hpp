#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

namespace dcnn {

/// Shortest decimal string that round-trips the exact double. Deterministic,
/// locale-free; used everywhere a report or checkpoint must be byte-stable.
inline std::string format_double(double value) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, end);
}

/// splitmix64 mix step; fixed scheme for deriving per-trial seeds from a
/// master seed so that parallel trial order can never change results.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master + 0x9E3779B97F4A7C15ull * (stream + 1));
}

/// FNV-1a 64-bit, for dataset manifests.
struct Fnv1a64 {
    std::uint64_t state = 0xCBF29CE484222325ull;

    void update(const void* data, std::size_t size) {
        const unsigned char* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            state ^= bytes[i];
            state *= 0x100000001B3ull;
        }
    }
    void update(std::string_view s) { update(s.data(), s.size()); }
    std::uint64_t digest() const { return state; }
};

inline std::uint64_t fnv1a64(std::string_view bytes) {
    Fnv1a64 h;
    h.update(bytes);
    return h.digest();
}

}  // namespace dcnn
