#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace signeq {

class Tensor;
using TensorPtr = std::shared_ptr<Tensor>;

// Dense row-major tensor of doubles with an optional gradient slot.
// Ops build a backward graph; call backward() on a scalar output.
class Tensor : public std::enable_shared_from_this<Tensor> {
public:
    std::vector<std::size_t> shape;
    std::vector<double> data;
    std::vector<double> grad;   // same length as data once backward touches it
    bool requires_grad = false; // true if on a differentiable path

    std::vector<TensorPtr> parents;
    std::function<void()> backprop; // accumulates this->grad into parents

    static TensorPtr create(std::vector<std::size_t> shape, bool requires_grad = false);
    static TensorPtr from_data(std::vector<std::size_t> shape, std::vector<double> values,
                               bool requires_grad = false);
    static TensorPtr zeros(std::vector<std::size_t> shape, bool requires_grad = false);
    static TensorPtr ones(std::vector<std::size_t> shape, bool requires_grad = false);
    static TensorPtr scalar(double v, bool requires_grad = false);

    std::size_t size() const { return data.size(); }
    std::size_t ndim() const { return shape.size(); }
    std::size_t rows() const;
    std::size_t cols() const;

    double& at(std::size_t i, std::size_t j);
    double at(std::size_t i, std::size_t j) const;
    double item() const;

    void ensure_grad();
    void zero_grad();
};

// Sparse matrix in CSR form (value 1-weighted or general), used for
// neighborhood aggregation. Not differentiated through; fixed structure.
struct SparseMatrix {
    std::size_t n_rows = 0, n_cols = 0;
    std::vector<std::size_t> row_ptr, col_idx;
    std::vector<double> values;
    // transpose view for the backward pass
    std::vector<std::size_t> t_row_ptr, t_col_idx;
    std::vector<double> t_values;

    static SparseMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                      const std::vector<std::size_t>& rows,
                                      const std::vector<std::size_t>& cols,
                                      const std::vector<double>& vals);
};

// elementwise / structural ops
TensorPtr add(const TensorPtr& a, const TensorPtr& b);
TensorPtr sub(const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(const TensorPtr& a, const TensorPtr& b); // hadamard
TensorPtr scale(const TensorPtr& a, double c);
TensorPtr add_scalar(const TensorPtr& a, double c);
TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);
TensorPtr spmm(const SparseMatrix& s, const TensorPtr& x);
TensorPtr abs(const TensorPtr& a);
TensorPtr relu(const TensorPtr& a);
TensorPtr sigmoid(const TensorPtr& a);
TensorPtr softplus(const TensorPtr& a);
TensorPtr square(const TensorPtr& a);

// reductions
TensorPtr sum(const TensorPtr& a);
TensorPtr mean(const TensorPtr& a);
TensorPtr row_sums(const TensorPtr& a); // n x m -> n x 1
TensorPtr col_sums(const TensorPtr& a); // n x m -> 1 x m

// shape ops
TensorPtr reshape(const TensorPtr& a, std::vector<std::size_t> shape);
TensorPtr transpose(const TensorPtr& a);
TensorPtr concat_cols(const TensorPtr& a, const TensorPtr& b);
TensorPtr slice_rows(const TensorPtr& a, std::size_t r0, std::size_t r1);
TensorPtr slice_cols(const TensorPtr& a, std::size_t c0, std::size_t c1);
TensorPtr gather_rows(const TensorPtr& a, const std::vector<std::size_t>& idx);
TensorPtr add_rowvec(const TensorPtr& x, const TensorPtr& b); // b is 1 x m

// losses
TensorPtr mse_loss(const TensorPtr& pred, const TensorPtr& target);
TensorPtr bce_with_logits(const TensorPtr& logits, const TensorPtr& labels);

// Reverse-mode sweep from a scalar output. Throws if `out` is not scalar.
void backward(const TensorPtr& out);

// Adam with bias correction. m/v are indexed by flattened parameter order.
struct AdamState {
    std::size_t step = 0;
    std::vector<double> m, v;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

void adam_step(const std::vector<TensorPtr>& params, AdamState& state, double lr);
void zero_grads(const std::vector<TensorPtr>& params);

// Max relative error between autodiff and central differences (step h),
// taken over every coordinate of every input: |ad - cd| / (|cd| + 1e-12).
// f must be smooth at xs; callers keep clear of abs/relu kinks.
double grad_check(const std::function<TensorPtr(const std::vector<TensorPtr>&)>& f,
                  const std::vector<TensorPtr>& xs, double h = 1e-5);

} // namespace signeq
