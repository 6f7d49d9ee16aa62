#include "neveu/rng.hpp"

namespace neveu {

namespace {

void seed_state(std::uint64_t (&s)[4], std::uint64_t key) {
    for (auto& w : s) {
        key += 0x9E3779B97F4A7C15ULL;
        w = splitmix64_mix(key);
    }
    if ((s[0] | s[1] | s[2] | s[3]) == 0) s[0] = 1;
}

} // namespace

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) noexcept { seed_state(s_, seed); }

Xoshiro256pp::Xoshiro256pp(StreamId id) noexcept {
    // Hash the pair so nearby (master, index) keys give unrelated states.
    const std::uint64_t key = splitmix64_mix(splitmix64_mix(id.master) ^ (id.index * 0xD1B54A32D192ED03ULL + 1));
    seed_state(s_, key);
}

} // namespace neveu
