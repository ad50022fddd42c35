#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

namespace nblearn {

// splitmix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) {
    return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

// Derives independent per-run seeds from an ensemble master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return hash_mix(hash_mix(0x6e626c6561726eULL, master), index);
}

// Stateless counter-based generator: every draw is a pure function of
// (seed, step, agent, stream), so simulations are reproducible regardless of
// evaluation order or thread count.
class CounterRng {
public:
    // Stream tags; keep draws for different purposes on different streams.
    static constexpr std::uint64_t kStreamBeta = 0;    // observation availability
    static constexpr std::uint64_t kStreamSignal = 1;  // private signal draw

    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t bits(std::uint64_t step, std::uint64_t agent, std::uint64_t stream) const {
        std::uint64_t h = hash_mix(seed_, step);
        h = hash_mix(h, agent);
        return hash_mix(h, stream);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform(std::uint64_t step, std::uint64_t agent, std::uint64_t stream) const {
        return static_cast<double>(bits(step, agent, stream) >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double q, std::uint64_t step, std::uint64_t agent, std::uint64_t stream) const {
        if (q < 0.0 || q > 1.0) throw std::invalid_argument("bernoulli rate must lie in [0,1]");
        return uniform(step, agent, stream) < q;
    }

    // Inverse-CDF draw over a finite distribution (need not be exactly
    // normalized; the walk is over the given masses in index order).
    int categorical(std::span<const double> probs, std::uint64_t step, std::uint64_t agent,
                    std::uint64_t stream) const {
        if (probs.empty()) throw std::invalid_argument("categorical draw over empty support");
        const double u = uniform(step, agent, stream);
        double c = 0.0;
        int last_positive = -1;
        for (int s = 0; s < static_cast<int>(probs.size()); ++s) {
            if (probs[s] > 0.0) {
                c += probs[s];
                last_positive = s;
                if (u < c) return s;
            }
        }
        if (last_positive < 0) throw std::invalid_argument("categorical draw over zero-mass distribution");
        return last_positive;  // guard against round-off in the cumulative sum
    }

private:
    std::uint64_t seed_;
};

}  // namespace nblearn
