#pragma once

#include <cstdint>
#include <string_view>

namespace solaris {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Stage seed derived from one master seed: mix the FNV-1a hash of the stage
/// tag into the master through splitmix64. Every stochastic pipeline stage
/// (split, solarisnet, gpr, ann, sensitivity) draws from its own tag so adding
/// a stage never shifts another stage's stream.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stage) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : stage) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return splitmix64(master ^ h);
}

} // namespace solaris
