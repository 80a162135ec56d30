#include "signeq/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace signeq {

namespace {

void check_orthogonal(const TensorPtr& q) {
    const std::size_t k = q->rows();
    if (q->ndim() != 2 || q->cols() != k)
        throw std::invalid_argument("orthogonal matrix must be square");
    for (std::size_t a = 0; a < k; a++)
        for (std::size_t b = 0; b < k; b++) {
            double dot = 0;
            for (std::size_t r = 0; r < k; r++) dot += q->at(r, a) * q->at(r, b);
            if (std::fabs(dot - (a == b ? 1.0 : 0.0)) >= 1e-8)
                throw std::invalid_argument("matrix fails orthogonality check");
        }
}

} // namespace

void validate(const GroupElement& g) {
    if (const auto* s = std::get_if<SignVector>(&g)) {
        for (int v : s->signs)
            if (v != 1 && v != -1) throw std::invalid_argument("sign entries must be +-1");
    } else if (const auto* p = std::get_if<Permutation>(&g)) {
        std::vector<bool> seen(p->perm.size(), false);
        for (auto i : p->perm) {
            if (i >= p->perm.size() || seen[i])
                throw std::invalid_argument("permutation is not a bijection");
            seen[i] = true;
        }
    } else {
        check_orthogonal(std::get<OrthogonalMatrix>(g).q);
    }
}

TensorPtr act(const TensorPtr& v, const GroupElement& g, ActionSide side) {
    const std::size_t n = v->rows(), k = v->cols();
    auto out = Tensor::create({n, k});
    if (const auto* s = std::get_if<SignVector>(&g)) {
        if (side != ActionSide::columns || s->signs.size() != k)
            throw std::invalid_argument("act: sign vector acts on columns, length k");
        for (std::size_t i = 0; i < n; i++)
            for (std::size_t j = 0; j < k; j++)
                out->at(i, j) = v->at(i, j) * static_cast<double>(s->signs[j]);
    } else if (const auto* p = std::get_if<Permutation>(&g)) {
        if (side != ActionSide::rows || p->perm.size() != n)
            throw std::invalid_argument("act: permutation acts on rows, length n");
        for (std::size_t i = 0; i < n; i++)
            for (std::size_t j = 0; j < k; j++) out->at(p->perm[i], j) = v->at(i, j);
    } else {
        const auto& q = std::get<OrthogonalMatrix>(g).q;
        if (side != ActionSide::columns || q->rows() != k)
            throw std::invalid_argument("act: orthogonal matrix acts on columns, size k");
        for (std::size_t i = 0; i < n; i++)
            for (std::size_t c = 0; c < k; c++) {
                double s = 0;
                for (std::size_t j = 0; j < k; j++) s += v->at(i, j) * q->at(j, c);
                out->at(i, c) = s;
            }
    }
    return out;
}

GroupElement compose(const GroupElement& g1, const GroupElement& g2) {
    if (const auto* s1 = std::get_if<SignVector>(&g1)) {
        const auto& s2 = std::get<SignVector>(g2);
        if (s1->signs.size() != s2.signs.size())
            throw std::invalid_argument("compose: size mismatch");
        SignVector out = *s1;
        for (std::size_t i = 0; i < out.signs.size(); i++) out.signs[i] *= s2.signs[i];
        return out;
    }
    if (const auto* p1 = std::get_if<Permutation>(&g1)) {
        const auto& p2 = std::get<Permutation>(g2);
        if (p1->perm.size() != p2.perm.size())
            throw std::invalid_argument("compose: size mismatch");
        Permutation out;
        out.perm.resize(p1->perm.size());
        for (std::size_t i = 0; i < out.perm.size(); i++) out.perm[i] = p1->perm[p2.perm[i]];
        return out;
    }
    const auto& q1 = std::get<OrthogonalMatrix>(g1).q;
    const auto& q2 = std::get<OrthogonalMatrix>(g2).q;
    return OrthogonalMatrix{matmul(q2, q1)}; // column action composes right-to-left
}

double max_abs_diff(const TensorPtr& a, const TensorPtr& b) {
    if (a->size() != b->size()) throw std::invalid_argument("max_abs_diff: size mismatch");
    double m = 0;
    for (std::size_t i = 0; i < a->size(); i++)
        m = std::max(m, std::fabs(a->data[i] - b->data[i]));
    return m;
}

double max_abs_value(const TensorPtr& a) {
    double m = 0;
    for (double v : a->data) m = std::max(m, std::fabs(v));
    return m;
}

namespace {

SymmetryReport run_check(const MatrixFn& f, const InputSampler& sampler_in,
                         const GroupSampler& group_sampler, ActionSide action_in,
                         const ActionSide* action_out, std::size_t n_samples, double tol,
                         std::uint64_t seed) {
    SymmetryReport report;
    report.samples = n_samples;
    report.tolerance = tol;
    for (std::size_t s = 0; s < n_samples; s++) {
        auto rng = make_rng(seed, s); // per-sample stream
        auto x = sampler_in(rng);
        auto g = group_sampler(rng);
        auto fx = f(x);
        auto f_gx = f(act(x, g, action_in));
        auto ref = action_out ? act(fx, g, *action_out) : fx;
        const double viol = max_abs_diff(f_gx, ref) / (1.0 + max_abs_value(fx));
        report.max_violation = std::max(report.max_violation, viol);
    }
    report.passed = report.max_violation < tol;
    return report;
}

} // namespace

SymmetryReport check_equivariance(const MatrixFn& f, const InputSampler& sampler_in,
                                  const GroupSampler& group_sampler, ActionSide action_in,
                                  ActionSide action_out, std::size_t n_samples, double tol,
                                  std::uint64_t seed) {
    return run_check(f, sampler_in, group_sampler, action_in, &action_out, n_samples, tol, seed);
}

SymmetryReport check_invariance(const MatrixFn& f, const InputSampler& sampler_in,
                                const GroupSampler& group_sampler, ActionSide action_in,
                                std::size_t n_samples, double tol, std::uint64_t seed) {
    return run_check(f, sampler_in, group_sampler, action_in, nullptr, n_samples, tol, seed);
}

SymmetryReport check_sign_equivariance_exhaustive(const MatrixFn& f, const TensorPtr& input,
                                                  std::size_t k, double tol, bool invariant) {
    if (k > 20) throw std::invalid_argument("exhaustive sign check: k too large");
    if (input->cols() != k) throw std::invalid_argument("exhaustive sign check: k mismatch");
    SymmetryReport report;
    report.tolerance = tol;
    auto fx = f(input);
    const double denom = 1.0 + max_abs_value(fx);
    for (std::size_t mask = 0; mask < (std::size_t{1} << k); mask++) {
        SignVector s;
        s.signs.resize(k);
        for (std::size_t j = 0; j < k; j++) s.signs[j] = (mask >> j) & 1 ? -1 : 1;
        auto f_sx = f(act(input, s, ActionSide::columns));
        auto ref = invariant ? fx : act(fx, s, ActionSide::columns);
        report.max_violation =
            std::max(report.max_violation, max_abs_diff(f_sx, ref) / denom);
        report.samples++;
    }
    report.passed = report.max_violation < tol;
    return report;
}

SignVector random_sign_vector(Rng& rng, std::size_t k) {
    SignVector s;
    s.signs.resize(k);
    std::uniform_int_distribution<int> coin(0, 1);
    for (auto& v : s.signs) v = coin(rng) ? 1 : -1;
    return s;
}

Permutation random_permutation(Rng& rng, std::size_t n) {
    Permutation p;
    p.perm.resize(n);
    std::iota(p.perm.begin(), p.perm.end(), std::size_t{0});
    std::shuffle(p.perm.begin(), p.perm.end(), rng);
    return p;
}

OrthogonalMatrix random_orthogonal(Rng& rng, std::size_t k) {
    // modified Gram-Schmidt on a Gaussian matrix, positive-diagonal convention
    auto g = random_gaussian(rng, {k, k});
    auto q = Tensor::create({k, k});
    for (std::size_t c = 0; c < k; c++) {
        std::vector<double> v(k);
        for (std::size_t r = 0; r < k; r++) v[r] = g->at(r, c);
        for (std::size_t prev = 0; prev < c; prev++) {
            double dot = 0;
            for (std::size_t r = 0; r < k; r++) dot += v[r] * q->at(r, prev);
            for (std::size_t r = 0; r < k; r++) v[r] -= dot * q->at(r, prev);
        }
        double norm = 0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw std::runtime_error("random_orthogonal: degenerate draw");
        const double flip = v[c] < 0 ? -1.0 : 1.0; // R diagonal kept positive
        for (std::size_t r = 0; r < k; r++) q->at(r, c) = flip * v[r] / norm;
    }
    return OrthogonalMatrix{q};
}

} // namespace signeq
