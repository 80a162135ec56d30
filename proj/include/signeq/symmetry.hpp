#pragma once

#include <functional>
#include <variant>
#include <vector>

#include "signeq/rng.hpp"
#include "signeq/tensor.hpp"

namespace signeq {

// Group elements acting on matrices: column sign flips, row permutations,
// and column rotations by an orthogonal matrix.
struct SignVector {
    std::vector<int> signs; // entries in {-1, +1}
};

struct Permutation {
    std::vector<std::size_t> perm; // perm[i] = image of i; output row perm[i] = input row i
};

struct OrthogonalMatrix {
    TensorPtr q; // k x k, Q^T Q = I to 1e-8
};

using GroupElement = std::variant<SignVector, Permutation, OrthogonalMatrix>;

enum class ActionSide { rows, columns };

void validate(const GroupElement& g);

// SignVector on columns: V diag(s). Permutation on rows: P V.
// OrthogonalMatrix on columns: V Q. Throws on dimension mismatch or
// unsupported side for the element type.
TensorPtr act(const TensorPtr& v, const GroupElement& g, ActionSide side);

GroupElement compose(const GroupElement& g1, const GroupElement& g2);

struct SymmetryReport {
    double max_violation = 0.0;
    std::size_t samples = 0;
    bool passed = false;
    double tolerance = 0.0;
};

using MatrixFn = std::function<TensorPtr(const TensorPtr&)>;
using InputSampler = std::function<TensorPtr(Rng&)>;
using GroupSampler = std::function<GroupElement(Rng&)>;

// Relative violation max over samples of
//   ||f(g.x) - g.f(x)||_inf / (1 + ||f(x)||_inf).
// Invariance is the special case with an identity output action.
SymmetryReport check_equivariance(const MatrixFn& f, const InputSampler& sampler_in,
                                  const GroupSampler& group_sampler, ActionSide action_in,
                                  ActionSide action_out, std::size_t n_samples, double tol,
                                  std::uint64_t seed);

SymmetryReport check_invariance(const MatrixFn& f, const InputSampler& sampler_in,
                                const GroupSampler& group_sampler, ActionSide action_in,
                                std::size_t n_samples, double tol, std::uint64_t seed);

// Enumerates all 2^k sign vectors instead of sampling (k <= 20 guard).
SymmetryReport check_sign_equivariance_exhaustive(const MatrixFn& f, const TensorPtr& input,
                                                  std::size_t k, double tol,
                                                  bool invariant = false);

// Samplers
SignVector random_sign_vector(Rng& rng, std::size_t k);
Permutation random_permutation(Rng& rng, std::size_t n);
// Gaussian matrix orthonormalized by QR with a positive-diagonal convention.
OrthogonalMatrix random_orthogonal(Rng& rng, std::size_t k);

double max_abs_diff(const TensorPtr& a, const TensorPtr& b);
double max_abs_value(const TensorPtr& a);

} // namespace signeq
