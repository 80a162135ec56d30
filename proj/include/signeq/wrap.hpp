#pragma once

#include <cstddef>
#include <functional>

#include "signeq/spectral.hpp"
#include "signeq/tensor.hpp"

namespace signeq {

enum class WrapMode { canonicalize, frame_average };

// Turns a sign-equivariant base model h into an O(k)-equivariant map via
// PCA frames. canonicalize: f(X) = h(X R_X) R_X^T, one inner call.
// frame_average: averages base(X R_X S) S R_X^T over all 2^k sign matrices
// S, 2^k inner calls. call_counter records inner forward passes.
struct WrappedModel {
    std::function<TensorPtr(const TensorPtr&)> inner;
    WrapMode mode = WrapMode::canonicalize;
    mutable std::size_t call_counter = 0;

    TensorPtr forward(const TensorPtr& x) const;
};

TensorPtr orth_equiv_forward(const WrappedModel& w, const TensorPtr& x);
// Guarded at k <= 16; larger k should use canonicalize mode.
TensorPtr frame_average_forward(const WrappedModel& w, const TensorPtr& x);

} // namespace signeq
