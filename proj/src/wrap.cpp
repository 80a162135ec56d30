#include "signeq/wrap.hpp"

#include <stdexcept>

namespace signeq {

TensorPtr orth_equiv_forward(const WrappedModel& w, const TensorPtr& x) {
    const Frame frame = pca_frame(x);
    const auto r = frame.rotation;
    w.call_counter++;
    return matmul(w.inner(matmul(x, r)), transpose(r));
}

TensorPtr frame_average_forward(const WrappedModel& w, const TensorPtr& x) {
    const std::size_t k = x->cols();
    if (k > 16)
        throw std::invalid_argument("frame_average_forward: k > 16, use canonicalize mode");
    const Frame frame = pca_frame(x);
    const auto r = frame.rotation;
    const auto rt = transpose(r);
    const auto canon = matmul(x, r);
    auto tile_signs = [k](std::size_t mask, std::size_t rows) {
        auto t = Tensor::create({rows, k});
        for (std::size_t i = 0; i < rows; i++)
            for (std::size_t j = 0; j < k; j++)
                t->at(i, j) = (mask >> j) & 1 ? -1.0 : 1.0;
        return t;
    };
    TensorPtr acc;
    for (std::size_t mask = 0; mask < (std::size_t{1} << k); mask++) {
        // flip columns of the canonical input by S, undo S on the way out
        w.call_counter++;
        auto out = w.inner(mul(canon, tile_signs(mask, canon->rows())));
        auto unflipped = mul(out, tile_signs(mask, out->rows()));
        acc = acc ? add(acc, unflipped) : unflipped;
    }
    return matmul(scale(acc, 1.0 / static_cast<double>(std::size_t{1} << k)), rt);
}

TensorPtr WrappedModel::forward(const TensorPtr& x) const {
    return mode == WrapMode::canonicalize ? orth_equiv_forward(*this, x)
                                          : frame_average_forward(*this, x);
}

} // namespace signeq
