#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "vgce/tensor.hpp"

namespace vgce {

// All randomness flows through this wrapper. std::mt19937_64 has a
// standard-mandated bit stream; the distributions below are hand-rolled
// because the std:: ones are not portable across library implementations.
// Byte-identical outputs for a fixed seed are a contract of the project.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform on (0, 1); never returns an exact 0 (safe under log()).
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    // Uniform integer in [0, n) by rejection sampling.
    uint64_t uniform_int(uint64_t n) {
        if (n == 0) throw error("uniform_int: n must be positive");
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via Box-Muller (pairs generated, second value unused).
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    void fill_normal(Tensor2D& t, double sigma = 1.0) {
        for (double& v : t.data) v = sigma * normal();
    }

    Tensor2D normal_matrix(int rows, int cols, double sigma = 1.0) {
        Tensor2D t(rows, cols);
        fill_normal(t, sigma);
        return t;
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

namespace detail {
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}
} // namespace detail

// Derives an independent stream seed from one master seed. Each randomness
// purpose (init, noise, shuffle, ...) gets its own tagged stream so that
// changing one consumer does not shift the others.
inline uint64_t derive_seed(uint64_t master, std::string_view purpose, uint64_t index = 0) {
    uint64_t h = detail::splitmix64(master ^ detail::fnv1a(purpose));
    return detail::splitmix64(h + index);
}

} // namespace vgce
