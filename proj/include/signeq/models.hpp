#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "signeq/algebra.hpp"
#include "signeq/rng.hpp"
#include "signeq/tensor.hpp"

namespace signeq {

// Named flat parameter storage shared by all architectures.
struct ParamTree {
    std::vector<std::pair<std::string, TensorPtr>> entries;

    void add(std::string name, TensorPtr t) { entries.emplace_back(std::move(name), std::move(t)); }
    std::vector<TensorPtr> tensors() const;
    std::size_t count() const;
};

// Plain MLP: affine layers with ReLU between, final layer affine.
// Initialization: uniform in +-1/sqrt(fan_in).
struct Mlp {
    std::vector<TensorPtr> weights; // in x out
    std::vector<TensorPtr> biases;  // 1 x out

    static Mlp create(const std::vector<std::size_t>& widths, Rng& rng);
    TensorPtr forward(const TensorPtr& x) const; // x: batch x in
    void collect(ParamTree& tree, const std::string& prefix) const;
    std::size_t param_count() const;
    static std::size_t param_count_for(const std::vector<std::size_t>& widths);
};

// f(v) = v (.) MLP(|v|), applied row-wise to a batch. Optional extra
// columns carry sign-invariant side features into the MLP input.
struct SignEqElementwise {
    Mlp mlp; // k (+extra) -> ... -> k

    static SignEqElementwise create(std::size_t k, const std::vector<std::size_t>& hidden,
                                    Rng& rng, std::size_t extra_features = 0);
    TensorPtr forward(const TensorPtr& v) const;
    TensorPtr forward(const TensorPtr& v, const TensorPtr& extra) const;
    void collect(ParamTree& tree, const std::string& prefix) const;
};

// SignNet rho([phi(v_i) + phi(-v_i)]_i) with an elementwise phi: a scalar
// MLP shared across entries, so the whole map is permutation equivariant
// over rows. Output is n x d_out node features.
struct SignNetElementwise {
    Mlp phi; // 1 -> ... -> channels
    Mlp rho; // k*channels -> ... -> d_out
    std::size_t k = 0, channels = 0;

    static SignNetElementwise create(std::size_t k, std::size_t channels,
                                     const std::vector<std::size_t>& phi_hidden,
                                     const std::vector<std::size_t>& rho_hidden,
                                     std::size_t d_out, Rng& rng);
    TensorPtr forward(const TensorPtr& v) const; // v: n x k
    void collect(ParamTree& tree, const std::string& prefix) const;
};

// SignNet with a dense per-column phi: R^n -> R^h, rho: R^{k h} -> R^{n' k}.
// Sign invariant with output reshaped to n' x k; used inside the layer form.
struct SignNetDense {
    Mlp phi; // n -> ... -> h
    Mlp rho; // k*h -> ... -> n_out*k
    std::size_t k = 0, n_out = 0;

    static SignNetDense create(std::size_t n, std::size_t k, std::size_t h,
                               const std::vector<std::size_t>& phi_hidden,
                               const std::vector<std::size_t>& rho_hidden, std::size_t n_out,
                               Rng& rng);
    TensorPtr forward(const TensorPtr& v) const; // n x k -> n_out x k
    void collect(ParamTree& tree, const std::string& prefix) const;
};

// One layer [W_1 v_1, ..., W_k v_k] (.) SignNet(V); exactly sign equivariant.
struct SignEqLayer {
    ColumnwiseLinear blocks; // k trainable n_out x n blocks
    SignNetDense signnet;

    static SignEqLayer create(std::size_t n, std::size_t k, std::size_t n_out,
                              std::size_t signnet_h, Rng& rng);
    TensorPtr forward(const TensorPtr& v) const;
    void collect(ParamTree& tree, const std::string& prefix) const;
};

// DSS row rule: out_i = f1(V_i) + f2(sum_{j != i} V_j); the complement sum
// is the column total minus the own row. With a neighborhood the sum runs
// over adjacent rows instead.
struct DssSignEqLayer {
    SignEqElementwise f1, f2;
    // Scale the complement sum by 1/(n-1). Same function class (the factor
    // folds into f2's first layer), but keeps f2's input in range when n is
    // large; without it the constant eigenvector's column sum saturates f2.
    bool mean_complement = false;

    static DssSignEqLayer create(std::size_t k, const std::vector<std::size_t>& hidden, Rng& rng,
                                 std::size_t extra_features = 0);
    TensorPtr complement(const TensorPtr& v) const;
    TensorPtr forward(const TensorPtr& v) const;
    TensorPtr forward(const TensorPtr& v, const TensorPtr& extra) const;
    TensorPtr forward_graph(const TensorPtr& v, const SparseMatrix& adj) const;
    void collect(ParamTree& tree, const std::string& prefix) const;
};

enum class DecodeMode { dot, mlp_hadamard };

// Sign-invariant pair decoders: z_i^T z_j or MLP(z_i (.) z_j). Batched:
// zi, zj are m x k, the result is m x 1 logits.
TensorPtr pair_decode(DecodeMode mode, const TensorPtr& zi, const TensorPtr& zj, const Mlp* mlp);

// Universal 2-node decoder: per-column features (v (.) v, v (.) rev(v))
// fed to a DeepSets aggregator over the two rows. Invariant to the row
// swap and to every column sign flip, exactly.
struct UniversalPairDecoder {
    Mlp inner; // 2k -> ... -> h
    Mlp outer; // h -> ... -> 1

    static UniversalPairDecoder create(std::size_t k, const std::vector<std::size_t>& inner_hidden,
                                       std::size_t h, const std::vector<std::size_t>& outer_hidden,
                                       Rng& rng);
    TensorPtr forward(const TensorPtr& z) const; // z: 2 x k -> scalar
    void collect(ParamTree& tree, const std::string& prefix) const;
};

// Declarative architecture description; width chains are validated and the
// parameter count is computable before any allocation.
enum class Arch {
    mlp,
    signeq_elementwise,
    signnet,
    signeq_layer_stack,
    dss_stack,
    pair_decoder,
    universal_pair_decoder
};

struct ModelSpec {
    Arch arch = Arch::mlp;
    std::vector<std::size_t> widths; // meaning depends on arch (see builders)
    std::size_t k = 0;
    std::optional<std::size_t> budget;

    std::size_t predicted_param_count() const;
    void check_budget() const; // throws if predicted count exceeds budget
};

std::string arch_name(Arch a);
Arch arch_from_name(const std::string& name);

} // namespace signeq
