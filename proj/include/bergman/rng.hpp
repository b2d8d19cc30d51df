#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace bergman {

/// Philox4x64-10 block function (Salmon et al.'s counter-based generator).
struct Philox4x64 {
    using Counter = std::array<std::uint64_t, 4>;
    using Key = std::array<std::uint64_t, 2>;

    static Counter block(Counter ctr, Key key);
};

/// Stable 64-bit tag for a named stream (FNV-1a).
constexpr std::uint64_t stream_tag(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

/// Random numbers owned by one quadrature node.
///
/// The draws for node `index` depend only on (seed, stream, index), so any
/// partition of the node range across workers reproduces the same values.
class NodeRng {
public:
    NodeRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
        : key_{seed, stream}, index_(index) {}

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1).
    double uniform();
    /// Standard normal (Box-Muller).
    double normal();

private:
    Philox4x64::Key key_;
    std::uint64_t index_;
    std::uint64_t block_ = 0;
    Philox4x64::Counter buf_{};
    int pos_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace bergman
