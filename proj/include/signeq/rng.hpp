#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "signeq/tensor.hpp"

namespace signeq {

using Rng = std::mt19937_64;

// Independent stream derived from a root seed; used so that concurrent
// trials and samplers never share generator state.
inline Rng make_rng(std::uint64_t root_seed, std::uint64_t stream = 0) {
    const std::uint64_t mixed = stream ^ 0x9e3779b97f4a7c15ull;
    std::seed_seq seq{root_seed, mixed};
    return Rng(seq);
}

inline void fill_gaussian(Rng& rng, std::vector<double>& v, double stddev = 1.0) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (auto& x : v) x = dist(rng);
}

inline void fill_uniform(Rng& rng, std::vector<double>& v, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    for (auto& x : v) x = dist(rng);
}

inline TensorPtr random_gaussian(Rng& rng, std::vector<std::size_t> shape, double stddev = 1.0,
                                 bool requires_grad = false) {
    auto t = Tensor::create(std::move(shape), requires_grad);
    fill_gaussian(rng, t->data, stddev);
    return t;
}

inline TensorPtr random_uniform(Rng& rng, std::vector<std::size_t> shape, double lo, double hi,
                                bool requires_grad = false) {
    auto t = Tensor::create(std::move(shape), requires_grad);
    fill_uniform(rng, t->data, lo, hi);
    return t;
}

} // namespace signeq
