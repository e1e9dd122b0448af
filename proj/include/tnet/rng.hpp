#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace tnet {

// Seeded PRNG with hand-rolled draws. std::mt19937 output is pinned by the
// standard, the distribution classes are not, so all derived draws are
// implemented here to keep datasets and training runs reproducible across
// compilers.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32)};
        gen_.seed(seq);
    }

    std::uint32_t next_u32() { return gen_(); }

    // [0, 1)
    double uniform01() { return next_u32() * 0x1p-32; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // [0, n), n >= 1
    int uniform_int(int n) {
        return static_cast<int>((static_cast<std::uint64_t>(next_u32()) * n) >> 32);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
            int j = uniform_int(i + 1);
            std::swap(v[i], v[static_cast<std::size_t>(j)]);
        }
    }

private:
    std::mt19937 gen_;
};

}  // namespace tnet
