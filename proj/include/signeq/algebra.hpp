#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "signeq/rng.hpp"
#include "signeq/tensor.hpp"

namespace signeq {

// Sign-equivariant linear map R^{n x k} -> R^{n' x k}: one block per column.
struct ColumnwiseLinear {
    std::vector<TensorPtr> blocks; // k matrices, all n' x n

    std::size_t k() const { return blocks.size(); }
    static ColumnwiseLinear identity(std::size_t k, std::size_t n);
};

TensorPtr columnwise_apply(const ColumnwiseLinear& w, const TensorPtr& x);

// Sign-invariant polynomial R^k -> R^m stored as a sparse exponent table.
// Every exponent is even; construction rejects odd parities.
struct SignInvPolyVec {
    struct Term {
        std::size_t out_index;
        double coeff;
        std::vector<unsigned> exponents; // length k, all even
    };
    std::size_t k = 0, m = 0;
    std::vector<Term> terms;

    void add_term(std::size_t out_index, double coeff, std::vector<unsigned> exponents);
    std::vector<double> eval(const std::vector<double>& v) const;
};

// Sign-invariant polynomial R^{n x k} -> R^{h x k}: terms are monomials in
// the entries of V with even exponent sum in every column of V.
struct SignInvPolyMat {
    struct Term {
        std::size_t out_row, out_col;
        double coeff;
        std::map<std::pair<std::size_t, std::size_t>, unsigned> exponents; // (i,j) -> d_{i,j}
    };
    std::size_t n = 0, k = 0, h = 0;
    std::vector<Term> terms;

    void add_term(Term t); // rejects odd column parity
    TensorPtr eval(const TensorPtr& v) const;
};

// Sign-equivariant polynomial, vector form: p(v) = v (.) p_inv(v).
struct SignEqPolyVec {
    SignInvPolyVec p_inv; // m == k
    std::vector<double> eval(const std::vector<double>& v) const;
};

// Matrix form: p(V) = W2( (W1 V) (.) p_inv(V) ), shapes n -> h -> n' per column.
struct SignEqPolyMat {
    ColumnwiseLinear w1; // h x n blocks
    ColumnwiseLinear w2; // n' x h blocks
    SignInvPolyMat p_inv; // outputs h x k
    TensorPtr eval(const TensorPtr& v) const;
};

// Random vector-form equivariant polynomial: p_inv gets n_terms monomials
// with uniform even exponents (total degree <= max_degree) and Gaussian
// coefficients. Deterministic in the seed.
SignEqPolyVec sample_signeq_poly(std::size_t k, unsigned max_degree, std::size_t n_terms,
                                 std::uint64_t seed);

// Dimension of the space of sign-equivariant linear maps R^{k^m1} -> R^{k^m2}
// via the character-averaging identity (1/2^k) sum_s (s_1+...+s_k)^{m1+m2}.
// Exact integer arithmetic; requires 1 <= k <= 30 and m1+m2 <= 20.
std::uint64_t fixed_dim_formula(std::size_t k, unsigned m1, unsigned m2);

// Oracle: counts index tuples in [k]^{m1+m2} in which every value occurs an
// even number of times. Guarded at k^{m1+m2} <= 1e8.
std::uint64_t fixed_dim_bruteforce(std::size_t k, unsigned m1, unsigned m2);

struct DimRow {
    std::size_t k;
    std::uint64_t formula;
    std::uint64_t bruteforce; // equal to formula wherever enumerable
    std::int64_t cubic;       // 15k^3 - 30k^2 + 16k
};

std::vector<DimRow> dim_table(std::size_t k_max);
std::string dim_table_csv(const std::vector<DimRow>& rows); // header k,formula,bruteforce,cubic

// Counts the sign-equivariance-fixed coefficients of a general linear map
// R^{n x k} -> R^{n' x k} by enumerating all 2^k sign matrices.
std::uint64_t linear_map_fixed_dim_bruteforce(std::size_t n, std::size_t n_prime, std::size_t k);

} // namespace signeq
