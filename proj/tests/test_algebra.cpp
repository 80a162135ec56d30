#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <sstream>

#include "signeq/algebra.hpp"
#include "signeq/rng.hpp"
#include "signeq/symmetry.hpp"

using namespace signeq;

TEST_CASE("columnwise_apply: identity blocks reproduce the input") {
    auto rng = make_rng(0);
    auto x = random_gaussian(rng, {3, 4});
    auto w = ColumnwiseLinear::identity(4, 3);
    CHECK(max_abs_diff(columnwise_apply(w, x), x) == 0.0);
}

TEST_CASE("columnwise_apply: per-column scaling") {
    ColumnwiseLinear w;
    w.blocks = {scale(Tensor::ones({1, 1}), 2.0), scale(Tensor::ones({1, 1}), 3.0)};
    auto x = Tensor::from_data({1, 2}, {1, 1});
    auto out = columnwise_apply(w, x);
    CHECK(out->at(0, 0) == 2.0);
    CHECK(out->at(0, 1) == 3.0);
}

TEST_CASE("columnwise_apply: exhaustive sign equivariance is exact") {
    auto rng = make_rng(1);
    ColumnwiseLinear w;
    for (int j = 0; j < 3; ++j) w.blocks.push_back(random_gaussian(rng, {2, 4}));
    auto x = random_gaussian(rng, {4, 3});
    auto report = check_sign_equivariance_exhaustive(
        [&](const TensorPtr& v) { return columnwise_apply(w, v); }, x, 3, 1e-15);
    CHECK(report.passed);
    CHECK(report.max_violation == 0.0);
}

TEST_CASE("columnwise_apply rejects shape mismatch") {
    ColumnwiseLinear w = ColumnwiseLinear::identity(2, 3);
    auto x = Tensor::from_data({3, 3}, std::vector<double>(9, 1.0));
    CHECK_THROWS(columnwise_apply(w, x));
}

TEST_CASE("SignInvPolyVec: v1^2 v2^2 ignores every sign pattern") {
    SignInvPolyVec p;
    p.k = 2;
    p.m = 1;
    p.add_term(0, 1.0, {2, 2});
    CHECK(p.eval({1, 2})[0] == 4.0);
    CHECK(p.eval({-1, 2})[0] == 4.0);
    CHECK(p.eval({1, -2})[0] == 4.0);
}

TEST_CASE("SignInvPolyVec rejects odd exponents") {
    SignInvPolyVec p;
    p.k = 2;
    p.m = 1;
    CHECK_THROWS(p.add_term(0, 1.0, {1, 2}));
}

TEST_CASE("SignEqPolyVec: v (.) (v1^2 + v2^2) pinned value") {
    SignEqPolyVec p;
    p.p_inv.k = 2;
    p.p_inv.m = 2;
    for (std::size_t out = 0; out < 2; ++out) {
        p.p_inv.add_term(out, 1.0, {2, 0});
        p.p_inv.add_term(out, 1.0, {0, 2});
    }
    auto y = p.eval({1, 1});
    CHECK(y[0] == 2.0);
    CHECK(y[1] == 2.0);
}

TEST_CASE("SignInvPolyMat rejects odd column parity and accepts even") {
    SignInvPolyMat p;
    p.n = 2;
    p.k = 2;
    p.h = 1;
    SignInvPolyMat::Term bad;
    bad.out_row = 0;
    bad.out_col = 0;
    bad.coeff = 1.0;
    bad.exponents[{0, 0}] = 1; // column 0 parity odd
    CHECK_THROWS(p.add_term(bad));
    SignInvPolyMat::Term good = bad;
    good.exponents[{1, 0}] = 1; // now column 0 has total degree 2
    p.add_term(good);
    auto v = Tensor::from_data({2, 2}, {2, 5, 3, 7});
    CHECK(p.eval(v)->at(0, 0) == 6.0); // v00 * v10
}

TEST_CASE("sampled SignEqPolyVec: exhaustive sign flips are exactly equivariant") {
    auto p = sample_signeq_poly(4, 4, 6, 42);
    auto rng = make_rng(2);
    std::vector<double> v(4);
    fill_uniform(rng, v, -1.0, 1.0);
    auto base = p.eval(v);
    for (unsigned mask = 0; mask < 16; ++mask) {
        std::vector<double> flipped(4);
        for (std::size_t i = 0; i < 4; ++i)
            flipped[i] = (mask >> i & 1u) ? -v[i] : v[i];
        auto out = p.eval(flipped);
        for (std::size_t i = 0; i < 4; ++i) {
            const double expect = (mask >> i & 1u) ? -base[i] : base[i];
            CHECK(out[i] == expect); // bit exact: even powers kill the flips
        }
    }
}

TEST_CASE("sample_signeq_poly: degree 0 is a diagonal scaling") {
    auto p = sample_signeq_poly(3, 0, 4, 7);
    auto c = p.eval({1, 1, 1});
    auto y = p.eval({2, -3, 5});
    CHECK(y[0] == doctest::Approx(2 * c[0]).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(-3 * c[1]).epsilon(1e-12));
    CHECK(y[2] == doctest::Approx(5 * c[2]).epsilon(1e-12));
}

TEST_CASE("sample_signeq_poly: zero terms give the zero polynomial") {
    auto p = sample_signeq_poly(3, 4, 0, 7);
    for (double y : p.eval({1.5, -2.0, 0.5})) CHECK(y == 0.0);
}

TEST_CASE("sample_signeq_poly is deterministic in the seed") {
    auto a = sample_signeq_poly(4, 4, 8, 123);
    auto b = sample_signeq_poly(4, 4, 8, 123);
    REQUIRE(a.p_inv.terms.size() == b.p_inv.terms.size());
    for (std::size_t i = 0; i < a.p_inv.terms.size(); ++i) {
        CHECK(a.p_inv.terms[i].coeff == b.p_inv.terms[i].coeff);
        CHECK(a.p_inv.terms[i].exponents == b.p_inv.terms[i].exponents);
        CHECK(a.p_inv.terms[i].out_index == b.p_inv.terms[i].out_index);
    }
}

TEST_CASE("fixed_dim_formula: pinned values") {
    CHECK(fixed_dim_formula(2, 3, 3) == 32);
    CHECK(fixed_dim_formula(3, 3, 3) == 183);
    CHECK(fixed_dim_formula(8, 3, 3) == 5888);
}

TEST_CASE("fixed_dim_formula: odd total order is the zero map") {
    for (std::size_t k = 1; k <= 12; ++k)
        for (unsigned m1 = 0; m1 <= 3; ++m1)
            for (unsigned m2 = 0; m2 <= 3; ++m2)
                if ((m1 + m2) % 2 == 1) CHECK(fixed_dim_formula(k, m1, m2) == 0);
}

TEST_CASE("fixed_dim_bruteforce agrees with the formula on small cases") {
    for (std::size_t k = 1; k <= 3; ++k)
        for (unsigned m1 = 1; m1 <= 3; ++m1)
            for (unsigned m2 = 1; m2 <= 3; ++m2)
                if (m1 + m2 <= 6)
                    CHECK(fixed_dim_bruteforce(k, m1, m2) == fixed_dim_formula(k, m1, m2));
    CHECK(fixed_dim_bruteforce(2, 3, 3) == 32);
    CHECK(fixed_dim_bruteforce(3, 1, 2) == 0);
}

TEST_CASE("fixed_dim_bruteforce guards huge enumerations") {
    CHECK_THROWS(fixed_dim_bruteforce(20, 4, 4));
}

TEST_CASE("linear map fixed dimension is k * n * n'") {
    for (std::size_t n = 1; n <= 3; ++n)
        for (std::size_t np = 1; np <= 3; ++np)
            for (std::size_t k = 1; k <= 3; ++k)
                CHECK(linear_map_fixed_dim_bruteforce(n, np, k) == k * n * np);
}

TEST_CASE("dim_table: pinned rows and the cubic closed form") {
    auto rows = dim_table(20);
    REQUIRE(rows.size() == 20);
    const std::uint64_t expected[] = {1,     32,    183,   544,   1205,  2256,  3787,
                                      5888,  8649,  12160, 16511, 21792, 28093, 35504,
                                      44115, 54016, 65297, 78048, 92359, 108320};
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(rows[i].k == i + 1);
        CHECK(rows[i].formula == expected[i]);
        CHECK(rows[i].cubic == static_cast<std::int64_t>(expected[i]));
        if (rows[i].bruteforce != 0) CHECK(rows[i].bruteforce == rows[i].formula);
    }
    CHECK(rows[3].cubic == 15 * 64 - 30 * 16 + 16 * 4); // k=4 arithmetic spot check
}

TEST_CASE("dim_table_csv emits the fixed header") {
    auto rows = dim_table(2);
    auto csv = dim_table_csv(rows);
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    CHECK(line == "k,formula,bruteforce,cubic");
    std::getline(is, line);
    CHECK(line.substr(0, 4) == "1,1,");
}
