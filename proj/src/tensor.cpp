#include "signeq/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace signeq {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    return n;
}

void check_same_shape(const TensorPtr& a, const TensorPtr& b, const char* op) {
    if (a->shape != b->shape)
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

bool any_requires(const std::vector<TensorPtr>& ps) {
    for (const auto& p : ps)
        if (p->requires_grad) return true;
    return false;
}

TensorPtr make_result(std::vector<std::size_t> shape, std::vector<TensorPtr> parents) {
    auto out = Tensor::create(std::move(shape));
    out->requires_grad = any_requires(parents);
    out->parents = std::move(parents);
    return out;
}

} // namespace

TensorPtr Tensor::create(std::vector<std::size_t> shape, bool requires_grad) {
    auto t = std::make_shared<Tensor>();
    t->data.assign(shape_product(shape), 0.0);
    t->shape = std::move(shape);
    t->requires_grad = requires_grad;
    return t;
}

TensorPtr Tensor::from_data(std::vector<std::size_t> shape, std::vector<double> values,
                            bool requires_grad) {
    if (shape_product(shape) != values.size())
        throw std::invalid_argument("from_data: shape/data size mismatch");
    auto t = std::make_shared<Tensor>();
    t->shape = std::move(shape);
    t->data = std::move(values);
    t->requires_grad = requires_grad;
    return t;
}

TensorPtr Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
    return create(std::move(shape), requires_grad);
}

TensorPtr Tensor::ones(std::vector<std::size_t> shape, bool requires_grad) {
    auto t = create(std::move(shape), requires_grad);
    std::fill(t->data.begin(), t->data.end(), 1.0);
    return t;
}

TensorPtr Tensor::scalar(double v, bool requires_grad) {
    return from_data({1}, {v}, requires_grad);
}

std::size_t Tensor::rows() const {
    if (shape.size() != 2) throw std::logic_error("rows(): tensor is not 2-d");
    return shape[0];
}

std::size_t Tensor::cols() const {
    if (shape.size() != 2) throw std::logic_error("cols(): tensor is not 2-d");
    return shape[1];
}

double& Tensor::at(std::size_t i, std::size_t j) { return data[i * cols() + j]; }
double Tensor::at(std::size_t i, std::size_t j) const { return data[i * cols() + j]; }

double Tensor::item() const {
    if (data.size() != 1) throw std::logic_error("item(): tensor is not scalar");
    return data[0];
}

void Tensor::ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

void Tensor::zero_grad() { grad.assign(data.size(), 0.0); }

SparseMatrix SparseMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols,
                                         const std::vector<std::size_t>& rows,
                                         const std::vector<std::size_t>& cols,
                                         const std::vector<double>& vals) {
    SparseMatrix s;
    s.n_rows = n_rows;
    s.n_cols = n_cols;
    auto build = [](std::size_t nr, const std::vector<std::size_t>& r,
                    const std::vector<std::size_t>& c, const std::vector<double>& v,
                    std::vector<std::size_t>& row_ptr, std::vector<std::size_t>& col_idx,
                    std::vector<double>& values) {
        row_ptr.assign(nr + 1, 0);
        for (auto i : r) row_ptr[i + 1]++;
        for (std::size_t i = 0; i < nr; i++) row_ptr[i + 1] += row_ptr[i];
        col_idx.resize(c.size());
        values.resize(c.size());
        std::vector<std::size_t> fill(row_ptr.begin(), row_ptr.end() - 1);
        for (std::size_t t = 0; t < r.size(); t++) {
            std::size_t pos = fill[r[t]]++;
            col_idx[pos] = c[t];
            values[pos] = v[t];
        }
    };
    build(n_rows, rows, cols, vals, s.row_ptr, s.col_idx, s.values);
    build(n_cols, cols, rows, vals, s.t_row_ptr, s.t_col_idx, s.t_values);
    return s;
}

TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
    check_same_shape(a, b, "add");
    auto out = make_result(a->shape, {a, b});
    for (std::size_t i = 0; i < out->size(); i++) out->data[i] = a->data[i] + b->data[i];
    Tensor* o = out.get();
    out->backprop = [o, a, b] {
        if (a->requires_grad) {
            a->ensure_grad();
            for (std::size_t i = 0; i < o->size(); i++) a->grad[i] += o->grad[i];
        }
        if (b->requires_grad) {
            b->ensure_grad();
            for (std::size_t i = 0; i < o->size(); i++) b->grad[i] += o->grad[i];
        }
    };
    return out;
}

TensorPtr sub(const TensorPtr& a, const TensorPtr& b) {
    check_same_shape(a, b, "sub");
    auto out = make_result(a->shape, {a, b});
    for (std::size_t i = 0; i < out->size(); i++) out->data[i] = a->data[i] - b->data[i];
    Tensor* o = out.get();
    out->backprop = [o, a, b] {
        if (a->requires_grad) {
            a->ensure_grad();
            for (std::size_t i = 0; i < o->size(); i++) a->grad[i] += o->grad[i];
        }
        if (b->requires_grad) {
            b->ensure_grad();
            for (std::size_t i = 0; i < o->size(); i++) b->grad[i] -= o->grad[i];
        }
    };
    return out;
}

TensorPtr mul(const TensorPtr& a, const TensorPtr& b) {
    check_same_shape(a, b, "mul");
    auto out = make_result(a->shape, {a, b});
    for (std::size_t i = 0; i < out->size(); i++) out->data[i] = a->data[i] * b->data[i];
    Tensor* o = out.get();
    out->backprop = [o, a, b] {
        if (a->requires_grad) {
            a->ensure_grad();
            for (std::size_t i = 0; i < o->size(); i++) a->grad[i] += o->grad[i] * b->data[i];
        }
        if (b->requires_grad) {
            b->ensure_grad();
            for (std::size_t i = 0; i < o->size(); i++) b->grad[i] += o->grad[i] * a->data[i];
        }
    };
    return out;
}

TensorPtr scale(const TensorPtr& a, double c) {
    auto out = make_result(a->shape, {a});
    for (std::size_t i = 0; i < out->size(); i++) out->data[i] = c * a->data[i];
    Tensor* o = out.get();
    out->backprop = [o, a, c] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < o->size(); i++) a->grad[i] += c * o->grad[i];
    };
    return out;
}

TensorPtr add_scalar(const TensorPtr& a, double c) {
    auto out = make_result(a->shape, {a});
    for (std::size_t i = 0; i < out->size(); i++) out->data[i] = a->data[i] + c;
    Tensor* o = out.get();
    out->backprop = [o, a] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < o->size(); i++) a->grad[i] += o->grad[i];
    };
    return out;
}

namespace {

extern "C" void dgemm_(const char*, const char*, const int*, const int*, const int*,
                       const double*, const double*, const int*, const double*, const int*,
                       const double*, double*, const int*);

// C += op(A) op(B) on row-major data, where op transposes when requested.
// Row-major products map onto column-major dgemm by computing C^T = B^T A^T.
void gemm_rm(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c) {
    if (m * n * k < 16384) { // small products: plain loops beat the BLAS call overhead
        for (std::size_t i = 0; i < m; i++)
            for (std::size_t p = 0; p < k; p++) {
                const double av = ta ? a[p * m + i] : a[i * k + p];
                if (av == 0.0) continue;
                for (std::size_t j = 0; j < n; j++)
                    c[i * n + j] += av * (tb ? b[j * k + p] : b[p * n + j]);
            }
        return;
    }
    const int mi = static_cast<int>(m), ni = static_cast<int>(n), ki = static_cast<int>(k);
    const double one = 1.0;
    const int lda = static_cast<int>(ta ? m : k);
    const int ldb = static_cast<int>(tb ? k : n);
    dgemm_(tb ? "T" : "N", ta ? "T" : "N", &ni, &mi, &ki, &one, b, &ldb, a, &lda, &one, c, &ni);
}

} // namespace

TensorPtr matmul(const TensorPtr& a, const TensorPtr& b) {
    if (a->ndim() != 2 || b->ndim() != 2 || a->cols() != b->rows())
        throw std::invalid_argument("matmul: incompatible shapes");
    const std::size_t n = a->rows(), k = a->cols(), m = b->cols();
    auto out = make_result({n, m}, {a, b});
    gemm_rm(false, false, n, m, k, a->data.data(), b->data.data(), out->data.data());
    Tensor* o = out.get();
    out->backprop = [o, a, b, n, k, m] {
        const double* gd = o->grad.data();
        if (a->requires_grad) {
            a->ensure_grad();
            gemm_rm(false, true, n, k, m, gd, b->data.data(), a->grad.data());
        }
        if (b->requires_grad) {
            b->ensure_grad();
            gemm_rm(true, false, k, m, n, a->data.data(), gd, b->grad.data());
        }
    };
    return out;
}

TensorPtr spmm(const SparseMatrix& s, const TensorPtr& x) {
    if (x->ndim() != 2 || x->rows() != s.n_cols)
        throw std::invalid_argument("spmm: incompatible shapes");
    const std::size_t m = x->cols();
    auto out = make_result({s.n_rows, m}, {x});
    for (std::size_t i = 0; i < s.n_rows; i++)
        for (std::size_t p = s.row_ptr[i]; p < s.row_ptr[i + 1]; p++) {
            const std::size_t j = s.col_idx[p];
            const double v = s.values[p];
            for (std::size_t c = 0; c < m; c++) out->data[i * m + c] += v * x->data[j * m + c];
        }
    Tensor* o = out.get();
    const SparseMatrix* sp = &s; // caller keeps the sparse matrix alive
    out->backprop = [o, x, sp, m] {
        if (!x->requires_grad) return;
        x->ensure_grad();
        for (std::size_t i = 0; i < sp->n_cols; i++)
            for (std::size_t p = sp->t_row_ptr[i]; p < sp->t_row_ptr[i + 1]; p++) {
                const std::size_t j = sp->t_col_idx[p];
                const double v = sp->t_values[p];
                for (std::size_t c = 0; c < m; c++)
                    x->grad[i * m + c] += v * o->grad[j * m + c];
            }
    };
    return out;
}

// Subgradient at 0 is fixed to 0 for abs and relu.
TensorPtr abs(const TensorPtr& a) {
    auto out = make_result(a->shape, {a});
    for (std::size_t i = 0; i < out->size(); i++) out->data[i] = std::fabs(a->data[i]);
    Tensor* o = out.get();
    out->backprop = [o, a] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < o->size(); i++) {
            const double x = a->data[i];
            if (x > 0) a->grad[i] += o->grad[i];
            else if (x < 0) a->grad[i] -= o->grad[i];
        }
    };
    return out;
}

TensorPtr relu(const TensorPtr& a) {
    auto out = make_result(a->shape, {a});
    for (std::size_t i = 0; i < out->size(); i++) out->data[i] = a->data[i] > 0 ? a->data[i] : 0.0;
    Tensor* o = out.get();
    out->backprop = [o, a] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < o->size(); i++)
            if (a->data[i] > 0) a->grad[i] += o->grad[i];
    };
    return out;
}

TensorPtr sigmoid(const TensorPtr& a) {
    auto out = make_result(a->shape, {a});
    for (std::size_t i = 0; i < out->size(); i++) {
        const double x = a->data[i];
        out->data[i] = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    }
    Tensor* o = out.get();
    out->backprop = [o, a] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < o->size(); i++) {
            const double s = o->data[i];
            a->grad[i] += o->grad[i] * s * (1.0 - s);
        }
    };
    return out;
}

TensorPtr softplus(const TensorPtr& a) {
    auto out = make_result(a->shape, {a});
    for (std::size_t i = 0; i < out->size(); i++) {
        const double x = a->data[i];
        out->data[i] = std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
    }
    Tensor* o = out.get();
    out->backprop = [o, a] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < o->size(); i++) {
            const double x = a->data[i];
            const double s = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
            a->grad[i] += o->grad[i] * s;
        }
    };
    return out;
}

TensorPtr square(const TensorPtr& a) { return mul(a, a); }

TensorPtr sum(const TensorPtr& a) {
    auto out = make_result({1}, {a});
    double s = 0;
    for (double v : a->data) s += v;
    out->data[0] = s;
    Tensor* o = out.get();
    out->backprop = [o, a] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < a->size(); i++) a->grad[i] += o->grad[0];
    };
    return out;
}

TensorPtr mean(const TensorPtr& a) { return scale(sum(a), 1.0 / static_cast<double>(a->size())); }

TensorPtr row_sums(const TensorPtr& a) {
    const std::size_t n = a->rows(), m = a->cols();
    auto out = make_result({n, 1}, {a});
    for (std::size_t i = 0; i < n; i++) {
        double s = 0;
        for (std::size_t j = 0; j < m; j++) s += a->data[i * m + j];
        out->data[i] = s;
    }
    Tensor* o = out.get();
    out->backprop = [o, a, n, m] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < n; i++)
            for (std::size_t j = 0; j < m; j++) a->grad[i * m + j] += o->grad[i];
    };
    return out;
}

TensorPtr col_sums(const TensorPtr& a) {
    const std::size_t n = a->rows(), m = a->cols();
    auto out = make_result({1, m}, {a});
    for (std::size_t i = 0; i < n; i++)
        for (std::size_t j = 0; j < m; j++) out->data[j] += a->data[i * m + j];
    Tensor* o = out.get();
    out->backprop = [o, a, n, m] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < n; i++)
            for (std::size_t j = 0; j < m; j++) a->grad[i * m + j] += o->grad[j];
    };
    return out;
}

TensorPtr reshape(const TensorPtr& a, std::vector<std::size_t> shape) {
    if (shape_product(shape) != a->size())
        throw std::invalid_argument("reshape: element count mismatch");
    auto out = make_result(std::move(shape), {a});
    out->data = a->data;
    Tensor* o = out.get();
    out->backprop = [o, a] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < o->size(); i++) a->grad[i] += o->grad[i];
    };
    return out;
}

TensorPtr transpose(const TensorPtr& a) {
    const std::size_t n = a->rows(), m = a->cols();
    auto out = make_result({m, n}, {a});
    for (std::size_t i = 0; i < n; i++)
        for (std::size_t j = 0; j < m; j++) out->data[j * n + i] = a->data[i * m + j];
    Tensor* o = out.get();
    out->backprop = [o, a, n, m] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < n; i++)
            for (std::size_t j = 0; j < m; j++) a->grad[i * m + j] += o->grad[j * n + i];
    };
    return out;
}

TensorPtr concat_cols(const TensorPtr& a, const TensorPtr& b) {
    if (a->ndim() != 2 || b->ndim() != 2 || a->rows() != b->rows())
        throw std::invalid_argument("concat_cols: row mismatch");
    const std::size_t n = a->rows(), ma = a->cols(), mb = b->cols();
    auto out = make_result({n, ma + mb}, {a, b});
    for (std::size_t i = 0; i < n; i++) {
        for (std::size_t j = 0; j < ma; j++) out->data[i * (ma + mb) + j] = a->data[i * ma + j];
        for (std::size_t j = 0; j < mb; j++) out->data[i * (ma + mb) + ma + j] = b->data[i * mb + j];
    }
    Tensor* o = out.get();
    out->backprop = [o, a, b, n, ma, mb] {
        if (a->requires_grad) {
            a->ensure_grad();
            for (std::size_t i = 0; i < n; i++)
                for (std::size_t j = 0; j < ma; j++)
                    a->grad[i * ma + j] += o->grad[i * (ma + mb) + j];
        }
        if (b->requires_grad) {
            b->ensure_grad();
            for (std::size_t i = 0; i < n; i++)
                for (std::size_t j = 0; j < mb; j++)
                    b->grad[i * mb + j] += o->grad[i * (ma + mb) + ma + j];
        }
    };
    return out;
}

TensorPtr slice_rows(const TensorPtr& a, std::size_t r0, std::size_t r1) {
    if (r1 > a->rows() || r0 > r1) throw std::invalid_argument("slice_rows: bad range");
    const std::size_t m = a->cols();
    auto out = make_result({r1 - r0, m}, {a});
    std::copy(a->data.begin() + r0 * m, a->data.begin() + r1 * m, out->data.begin());
    Tensor* o = out.get();
    out->backprop = [o, a, r0, m] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < o->size(); i++) a->grad[r0 * m + i] += o->grad[i];
    };
    return out;
}

TensorPtr slice_cols(const TensorPtr& a, std::size_t c0, std::size_t c1) {
    if (c1 > a->cols() || c0 > c1) throw std::invalid_argument("slice_cols: bad range");
    const std::size_t n = a->rows(), m = a->cols(), w = c1 - c0;
    auto out = make_result({n, w}, {a});
    for (std::size_t i = 0; i < n; i++)
        for (std::size_t j = 0; j < w; j++) out->data[i * w + j] = a->data[i * m + c0 + j];
    Tensor* o = out.get();
    out->backprop = [o, a, n, m, c0, w] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::size_t i = 0; i < n; i++)
            for (std::size_t j = 0; j < w; j++) a->grad[i * m + c0 + j] += o->grad[i * w + j];
    };
    return out;
}

TensorPtr gather_rows(const TensorPtr& a, const std::vector<std::size_t>& idx) {
    const std::size_t m = a->cols();
    for (auto i : idx)
        if (i >= a->rows()) throw std::invalid_argument("gather_rows: index out of range");
    auto out = make_result({idx.size(), m}, {a});
    for (std::size_t r = 0; r < idx.size(); r++)
        std::copy(a->data.begin() + idx[r] * m, a->data.begin() + (idx[r] + 1) * m,
                  out->data.begin() + r * m);
    Tensor* o = out.get();
    out->backprop = [o, a, idx, m] {
        if (!a->requires_grad) return;
        a->ensure_grad();
        for (std::size_t r = 0; r < idx.size(); r++)
            for (std::size_t j = 0; j < m; j++) a->grad[idx[r] * m + j] += o->grad[r * m + j];
    };
    return out;
}

TensorPtr add_rowvec(const TensorPtr& x, const TensorPtr& b) {
    if (x->ndim() != 2 || b->ndim() != 2 || b->rows() != 1 || b->cols() != x->cols())
        throw std::invalid_argument("add_rowvec: shape mismatch");
    const std::size_t n = x->rows(), m = x->cols();
    auto out = make_result({n, m}, {x, b});
    for (std::size_t i = 0; i < n; i++)
        for (std::size_t j = 0; j < m; j++) out->data[i * m + j] = x->data[i * m + j] + b->data[j];
    Tensor* o = out.get();
    out->backprop = [o, x, b, n, m] {
        if (x->requires_grad) {
            x->ensure_grad();
            for (std::size_t i = 0; i < o->size(); i++) x->grad[i] += o->grad[i];
        }
        if (b->requires_grad) {
            b->ensure_grad();
            for (std::size_t i = 0; i < n; i++)
                for (std::size_t j = 0; j < m; j++) b->grad[j] += o->grad[i * m + j];
        }
    };
    return out;
}

TensorPtr mse_loss(const TensorPtr& pred, const TensorPtr& target) {
    return mean(square(sub(pred, target)));
}

TensorPtr bce_with_logits(const TensorPtr& logits, const TensorPtr& labels) {
    // mean over samples of softplus(x) - y*x
    return mean(sub(softplus(logits), mul(logits, labels)));
}

void backward(const TensorPtr& out) {
    if (out->size() != 1) throw std::invalid_argument("backward: output must be scalar");
    // iterative DFS topological order
    std::vector<Tensor*> order;
    std::unordered_set<Tensor*> visited;
    std::vector<std::pair<TensorPtr, std::size_t>> stack;
    stack.emplace_back(out, 0);
    visited.insert(out.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            TensorPtr p = node->parents[next++];
            if (p->requires_grad && !visited.count(p.get())) {
                visited.insert(p.get());
                stack.emplace_back(std::move(p), 0);
            }
        } else {
            order.push_back(node.get());
            stack.pop_back();
        }
    }
    for (Tensor* t : order) t->ensure_grad();
    out->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backprop) (*it)->backprop();
}

void adam_step(const std::vector<TensorPtr>& params, AdamState& state, double lr) {
    std::size_t total = 0;
    for (const auto& p : params) total += p->size();
    if (state.m.empty()) {
        state.m.assign(total, 0.0);
        state.v.assign(total, 0.0);
    }
    if (state.m.size() != total)
        throw std::invalid_argument("adam_step: state size mismatch");
    state.step++;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    std::size_t off = 0;
    for (const auto& p : params) {
        p->ensure_grad();
        for (std::size_t i = 0; i < p->size(); i++) {
            const double g = p->grad[i];
            double& m = state.m[off + i];
            double& v = state.v[off + i];
            m = state.beta1 * m + (1.0 - state.beta1) * g;
            v = state.beta2 * v + (1.0 - state.beta2) * g * g;
            p->data[i] -= lr * (m / bc1) / (std::sqrt(v / bc2) + state.eps);
        }
        off += p->size();
    }
}

void zero_grads(const std::vector<TensorPtr>& params) {
    for (const auto& p : params) p->zero_grad();
}

double grad_check(const std::function<TensorPtr(const std::vector<TensorPtr>&)>& f,
                  const std::vector<TensorPtr>& xs, double h) {
    for (const auto& x : xs) x->zero_grad();
    auto out = f(xs);
    backward(out);
    std::vector<std::vector<double>> ad;
    for (const auto& x : xs) {
        x->ensure_grad();
        ad.push_back(x->grad);
    }
    double worst = 0;
    for (std::size_t p = 0; p < xs.size(); p++) {
        auto& x = xs[p];
        for (std::size_t i = 0; i < x->size(); i++) {
            const double orig = x->data[i];
            x->data[i] = orig + h;
            const double fp = f(xs)->item();
            x->data[i] = orig - h;
            const double fm = f(xs)->item();
            x->data[i] = orig;
            const double cd = (fp - fm) / (2 * h);
            worst = std::max(worst, std::fabs(ad[p][i] - cd) / (std::fabs(cd) + 1e-12));
        }
    }
    return worst;
}

} // namespace signeq
