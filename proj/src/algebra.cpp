#include "signeq/algebra.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace signeq {

ColumnwiseLinear ColumnwiseLinear::identity(std::size_t k, std::size_t n) {
    ColumnwiseLinear w;
    for (std::size_t j = 0; j < k; j++) {
        auto eye = Tensor::zeros({n, n});
        for (std::size_t i = 0; i < n; i++) eye->at(i, i) = 1.0;
        w.blocks.push_back(eye);
    }
    return w;
}

TensorPtr columnwise_apply(const ColumnwiseLinear& w, const TensorPtr& x) {
    const std::size_t k = w.k();
    if (x->cols() != k) throw std::invalid_argument("columnwise_apply: column count mismatch");
    const std::size_t n = x->rows();
    const std::size_t np = w.blocks[0]->rows();
    for (const auto& b : w.blocks)
        if (b->rows() != np || b->cols() != n)
            throw std::invalid_argument("columnwise_apply: block shape mismatch");
    std::vector<TensorPtr> parts;
    for (std::size_t j = 0; j < k; j++) {
        auto col = slice_cols(x, j, j + 1);
        parts.push_back(matmul(w.blocks[j], col));
    }
    TensorPtr out = parts[0];
    for (std::size_t j = 1; j < k; j++) out = concat_cols(out, parts[j]);
    return out;
}

void SignInvPolyVec::add_term(std::size_t out_index, double coeff,
                              std::vector<unsigned> exponents) {
    if (exponents.size() != k) throw std::invalid_argument("poly term: exponent arity mismatch");
    if (out_index >= m) throw std::invalid_argument("poly term: output index out of range");
    for (unsigned e : exponents)
        if (e % 2 != 0) throw std::invalid_argument("sign invariant poly: odd exponent");
    terms.push_back({out_index, coeff, std::move(exponents)});
}

std::vector<double> SignInvPolyVec::eval(const std::vector<double>& v) const {
    if (v.size() != k) throw std::invalid_argument("poly eval: arity mismatch");
    std::vector<double> out(m, 0.0);
    for (const auto& t : terms) {
        double prod = t.coeff;
        for (std::size_t i = 0; i < k; i++)
            for (unsigned e = 0; e < t.exponents[i]; e++) prod *= v[i];
        out[t.out_index] += prod;
    }
    return out;
}

void SignInvPolyMat::add_term(Term t) {
    if (t.out_row >= h || t.out_col >= k)
        throw std::invalid_argument("poly term: output index out of range");
    std::vector<unsigned> col_parity(k, 0);
    for (const auto& [idx, d] : t.exponents) {
        if (idx.first >= n || idx.second >= k)
            throw std::invalid_argument("poly term: variable index out of range");
        col_parity[idx.second] += d;
    }
    for (unsigned p : col_parity)
        if (p % 2 != 0) throw std::invalid_argument("sign invariant poly: odd column parity");
    terms.push_back(std::move(t));
}

TensorPtr SignInvPolyMat::eval(const TensorPtr& v) const {
    if (v->rows() != n || v->cols() != k)
        throw std::invalid_argument("poly eval: shape mismatch");
    auto out = Tensor::zeros({h, k});
    for (const auto& t : terms) {
        double prod = t.coeff;
        for (const auto& [idx, d] : t.exponents)
            for (unsigned e = 0; e < d; e++) prod *= v->at(idx.first, idx.second);
        out->at(t.out_row, t.out_col) += prod;
    }
    return out;
}

std::vector<double> SignEqPolyVec::eval(const std::vector<double>& v) const {
    auto inv = p_inv.eval(v);
    for (std::size_t i = 0; i < v.size(); i++) inv[i] *= v[i];
    return inv;
}

TensorPtr SignEqPolyMat::eval(const TensorPtr& v) const {
    auto lifted = columnwise_apply(w1, v);        // h x k
    auto inv = p_inv.eval(v);                     // h x k
    auto prod = mul(lifted, inv);
    return columnwise_apply(w2, prod);            // n' x k
}

SignEqPolyVec sample_signeq_poly(std::size_t k, unsigned max_degree, std::size_t n_terms,
                                 std::uint64_t seed) {
    SignEqPolyVec p;
    p.p_inv.k = k;
    p.p_inv.m = k;
    auto rng = make_rng(seed);
    std::normal_distribution<double> coeff(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> out_pick(0, k - 1);
    const unsigned max_even = max_degree / 2; // d_i in {0, 2, ..., 2*max_even}
    std::uniform_int_distribution<unsigned> half_exp(0, max_even);
    for (std::size_t t = 0; t < n_terms; t++) {
        std::vector<unsigned> exps(k, 0);
        unsigned budget = max_degree;
        for (std::size_t i = 0; i < k; i++) {
            const unsigned d = 2 * half_exp(rng);
            if (d <= budget) {
                exps[i] = d;
                budget -= d;
            }
        }
        p.p_inv.add_term(out_pick(rng), coeff(rng), std::move(exps));
    }
    return p;
}

namespace {

using BigInt = __int128;

BigInt binomial(std::size_t n, std::size_t r) {
    if (r > n) return 0;
    BigInt result = 1;
    for (std::size_t i = 0; i < r; i++) {
        result *= static_cast<BigInt>(n - i);
        result /= static_cast<BigInt>(i + 1);
    }
    return result;
}

BigInt ipow(BigInt base, unsigned exp) {
    BigInt r = 1;
    for (unsigned i = 0; i < exp; i++) r *= base;
    return r;
}

} // namespace

std::uint64_t fixed_dim_formula(std::size_t k, unsigned m1, unsigned m2) {
    if (k < 1 || k > 30) throw std::invalid_argument("fixed_dim_formula: k in [1, 30]");
    const unsigned m = m1 + m2;
    if (m > 20) throw std::invalid_argument("fixed_dim_formula: m1+m2 too large");
    // group s by its number of -1 entries: sum_j C(k,j) (k-2j)^m
    BigInt total = 0;
    for (std::size_t j = 0; j <= k; j++)
        total += binomial(k, j) * ipow(static_cast<BigInt>(k) - 2 * static_cast<BigInt>(j), m);
    const BigInt denom = ipow(2, static_cast<unsigned>(k));
    if (total % denom != 0) throw std::logic_error("fixed_dim_formula: non-integer average");
    return static_cast<std::uint64_t>(total / denom);
}

std::uint64_t fixed_dim_bruteforce(std::size_t k, unsigned m1, unsigned m2) {
    const unsigned m = m1 + m2;
    double estimate = std::pow(static_cast<double>(k), static_cast<double>(m));
    if (estimate > 1e8)
        throw std::invalid_argument("fixed_dim_bruteforce: enumeration too large, use the formula");
    std::uint64_t count = 0;
    std::vector<unsigned> tuple(m, 0);
    std::vector<unsigned> mult(k, 0);
    while (true) {
        std::fill(mult.begin(), mult.end(), 0);
        for (unsigned i : tuple) mult[i]++;
        bool all_even = true;
        for (unsigned c : mult)
            if (c % 2 != 0) { all_even = false; break; }
        if (all_even) count++;
        // odometer increment
        std::size_t pos = 0;
        while (pos < m && ++tuple[pos] == k) tuple[pos++] = 0;
        if (pos == m) break;
    }
    return count;
}

std::vector<DimRow> dim_table(std::size_t k_max) {
    if (k_max > 20) throw std::invalid_argument("dim_table: k_max <= 20");
    std::vector<DimRow> rows;
    for (std::size_t k = 1; k <= k_max; k++) {
        DimRow row;
        row.k = k;
        row.formula = fixed_dim_formula(k, 3, 3);
        row.bruteforce = fixed_dim_bruteforce(k, 3, 3);
        const std::int64_t ki = static_cast<std::int64_t>(k);
        row.cubic = 15 * ki * ki * ki - 30 * ki * ki + 16 * ki;
        rows.push_back(row);
    }
    return rows;
}

std::string dim_table_csv(const std::vector<DimRow>& rows) {
    std::ostringstream os;
    os << "k,formula,bruteforce,cubic\n";
    for (const auto& r : rows)
        os << r.k << "," << r.formula << "," << r.bruteforce << "," << r.cubic << "\n";
    return os.str();
}

std::uint64_t linear_map_fixed_dim_bruteforce(std::size_t n, std::size_t n_prime, std::size_t k) {
    if (k > 20) throw std::invalid_argument("linear map brute force: k too large");
    // Coefficient W^{i,j}_{i',j'} survives averaging over all sign matrices
    // iff s_j * s_{j'} = 1 for every s, i.e. j == j'.
    std::uint64_t count = 0;
    for (std::size_t j = 0; j < k; j++)
        for (std::size_t jp = 0; jp < k; jp++) {
            bool fixed = true;
            for (std::size_t mask = 0; mask < (std::size_t{1} << k) && fixed; mask++) {
                const int sj = (mask >> j) & 1 ? -1 : 1;
                const int sjp = (mask >> jp) & 1 ? -1 : 1;
                if (sj * sjp != 1) fixed = false;
            }
            if (fixed) count += n * n_prime;
        }
    return count;
}

} // namespace signeq
