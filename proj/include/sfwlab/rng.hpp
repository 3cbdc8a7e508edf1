// Deterministic random source. mt19937_64 output is pinned by the standard,
// and the gaussian/uniform transforms here consume a fixed number of engine
// draws per call (std::normal_distribution does not: it caches a spare and
// its algorithm is implementation-defined). Trajectory pairing across
// guidance modes and byte-identical reruns rely on this exact contract:
//   uniform()  -> 1 engine draw
//   gaussian() -> 2 engine draws
//   index(n)   -> 1 engine draw
#pragma once

#include "sfwlab/types.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace sfwlab {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on (0, 1]; never returns 0 so log() is safe.
    double uniform() {
        return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    }

    // Box-Muller, no caching.
    double gaussian() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    Vector gaussian_vector(Eigen::Index n) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = gaussian();
        return v;
    }

    Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = gaussian();
        return m;
    }

    // Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

    // Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(index(static_cast<std::size_t>(hi - lo + 1)));
    }

    // Categorical draw from nonnegative weights (need not sum to 1).
    int categorical(const Vector& weights) {
        const double total = weights.sum();
        double u = uniform() * total;
        for (Eigen::Index i = 0; i < weights.size(); ++i) {
            u -= weights[i];
            if (u <= 0.0) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size() - 1);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

// splitmix64 step; used to derive independent per-trajectory seeds from
// (base seed, index) so parallel sampling order cannot matter.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace sfwlab
