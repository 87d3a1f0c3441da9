#pragma once

// Deterministic sampling utilities. std::mt19937_64 plus explicit 53-bit
// uniforms and hand-rolled Poisson/multinomial draws, so simulated data are
// bit-identical across platforms and standard-library versions (the
// std::*_distribution classes are not portable).

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace qpol {

using Rng = std::mt19937_64;

// Uniform double in [0, 1) with 53 random bits.
inline double uniform53(Rng& rng) {
    return double(rng() >> 11) * 0x1.0p-53;
}

// Exact Poisson sample by inversion. Large means are split into chunks of
// mean <= 30 (Poisson is additive), keeping the pmf recursion well away from
// underflow.
inline long long poisson_draw(Rng& rng, double mean) {
    if (mean < 0.0) throw std::invalid_argument("Poisson mean must be >= 0");
    long long total = 0;
    while (mean > 0.0) {
        const double chunk = mean > 30.0 ? 30.0 : mean;
        mean -= chunk;
        const double u = uniform53(rng);
        double p = std::exp(-chunk);
        double cdf = p;
        long long k = 0;
        while (u >= cdf && k < 1000000) {
            ++k;
            p *= chunk / double(k);
            cdf += p;
        }
        total += k;
    }
    return total;
}

// Multinomial draw by per-shot inverse-CDF lookup over a small outcome set.
inline std::vector<long long> multinomial_draw(Rng& rng,
                                               const std::vector<double>& probs,
                                               long long shots) {
    if (shots < 0) throw std::invalid_argument("shot count must be >= 0");
    double sum = 0.0;
    for (double p : probs) {
        if (p < -1e-12) throw std::invalid_argument("negative outcome probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("outcome probabilities must sum to 1");
    std::vector<long long> counts(probs.size(), 0);
    for (long long s = 0; s < shots; ++s) {
        const double u = uniform53(rng) * sum;
        double cdf = 0.0;
        size_t pick = probs.size() - 1;
        for (size_t i = 0; i < probs.size(); ++i) {
            cdf += probs[i];
            if (u < cdf) {
                pick = i;
                break;
            }
        }
        ++counts[pick];
    }
    return counts;
}

}  // namespace qpol
