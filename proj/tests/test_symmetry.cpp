#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "signeq/models.hpp"
#include "signeq/rng.hpp"
#include "signeq/symmetry.hpp"

using namespace signeq;

TEST_CASE("act: all-plus sign vector is the identity") {
    auto rng = make_rng(0);
    auto v = random_gaussian(rng, {3, 4});
    auto out = act(v, SignVector{{1, 1, 1, 1}}, ActionSide::columns);
    CHECK(max_abs_diff(v, out) == 0.0);
}

TEST_CASE("act: sign action is an involution") {
    auto rng = make_rng(1);
    auto v = random_gaussian(rng, {3, 4});
    auto s = random_sign_vector(rng, 4);
    auto out = act(act(v, GroupElement{s}, ActionSide::columns), GroupElement{s},
                   ActionSide::columns);
    CHECK(max_abs_diff(v, out) == 0.0);
}

TEST_CASE("act: pinned 2x2 sign example") {
    auto v = Tensor::from_data({2, 2}, {1, 2, 3, 4});
    auto out = act(v, SignVector{{-1, 1}}, ActionSide::columns);
    CHECK(out->at(0, 0) == -1);
    CHECK(out->at(0, 1) == 2);
    CHECK(out->at(1, 0) == -3);
    CHECK(out->at(1, 1) == 4);
}

TEST_CASE("act: permutation moves row i to row perm[i]") {
    auto v = Tensor::from_data({3, 1}, {10, 20, 30});
    auto out = act(v, Permutation{{2, 0, 1}}, ActionSide::rows);
    CHECK(out->at(0, 0) == 20);
    CHECK(out->at(1, 0) == 30);
    CHECK(out->at(2, 0) == 10);
}

TEST_CASE("act: orthogonal column action is plain right multiplication") {
    auto rng = make_rng(2);
    auto v = random_gaussian(rng, {4, 3});
    auto q = random_orthogonal(rng, 3);
    auto out = act(v, GroupElement{q}, ActionSide::columns);
    CHECK(max_abs_diff(out, matmul(v, q.q)) == 0.0);
}

TEST_CASE("act: dimension mismatches throw") {
    auto v = Tensor::from_data({2, 2}, {1, 2, 3, 4});
    CHECK_THROWS(act(v, SignVector{{1, -1, 1}}, ActionSide::columns));
    CHECK_THROWS(act(v, Permutation{{0, 1, 2}}, ActionSide::rows));
}

TEST_CASE("validate rejects malformed elements") {
    CHECK_THROWS(validate(GroupElement{SignVector{{1, 0}}}));
    CHECK_THROWS(validate(GroupElement{Permutation{{0, 0}}}));
    auto notq = Tensor::from_data({2, 2}, {1, 1, 0, 1});
    CHECK_THROWS(validate(GroupElement{OrthogonalMatrix{notq}}));
}

TEST_CASE("compose matches sequential action for all three element types") {
    auto rng = make_rng(3);
    auto v = random_gaussian(rng, {5, 4});
    SUBCASE("signs") {
        auto g1 = GroupElement{random_sign_vector(rng, 4)};
        auto g2 = GroupElement{random_sign_vector(rng, 4)};
        auto lhs = act(v, compose(g1, g2), ActionSide::columns);
        auto rhs = act(act(v, g2, ActionSide::columns), g1, ActionSide::columns);
        CHECK(max_abs_diff(lhs, rhs) < 1e-12);
    }
    SUBCASE("permutations") {
        auto g1 = GroupElement{random_permutation(rng, 5)};
        auto g2 = GroupElement{random_permutation(rng, 5)};
        auto lhs = act(v, compose(g1, g2), ActionSide::rows);
        auto rhs = act(act(v, g2, ActionSide::rows), g1, ActionSide::rows);
        CHECK(max_abs_diff(lhs, rhs) < 1e-12);
    }
    SUBCASE("orthogonal") {
        auto g1 = GroupElement{random_orthogonal(rng, 4)};
        auto g2 = GroupElement{random_orthogonal(rng, 4)};
        auto lhs = act(v, compose(g1, g2), ActionSide::columns);
        auto rhs = act(act(v, g2, ActionSide::columns), g1, ActionSide::columns);
        CHECK(max_abs_diff(lhs, rhs) < 1e-12);
    }
}

TEST_CASE("check_equivariance: identity map has zero violation") {
    auto rng = make_rng(4);
    auto report = check_equivariance(
        [](const TensorPtr& x) { return x; },
        [](Rng& r) { return random_gaussian(r, {3, 4}); },
        [](Rng& r) { return GroupElement{random_sign_vector(r, 4)}; }, ActionSide::columns,
        ActionSide::columns, 50, 1e-12, 77);
    CHECK(report.passed);
    CHECK(report.max_violation == 0.0);
    CHECK(report.samples == 50);
}

TEST_CASE("check_equivariance: column swap breaks sign equivariance") {
    // f permutes columns, so a flip of column 0 lands in output column 1
    auto swap_cols = [](const TensorPtr& x) {
        return concat_cols(slice_cols(x, 1, 2), slice_cols(x, 0, 1));
    };
    auto report = check_equivariance(
        swap_cols, [](Rng& r) { return random_gaussian(r, {3, 2}); },
        [](Rng& r) { return GroupElement{random_sign_vector(r, 2)}; }, ActionSide::columns,
        ActionSide::columns, 50, 1e-6, 78);
    CHECK_FALSE(report.passed);
    CHECK(report.max_violation > 1e-6);
}

TEST_CASE("check_equivariance: v (.) MLP(|v|) passes over 200 samples") {
    auto rng = make_rng(5);
    auto model = SignEqElementwise::create(4, {16}, rng);
    auto report = check_equivariance(
        [&](const TensorPtr& x) { return model.forward(x); },
        [](Rng& r) { return random_gaussian(r, {6, 4}); },
        [](Rng& r) { return GroupElement{random_sign_vector(r, 4)}; }, ActionSide::columns,
        ActionSide::columns, 200, 1e-6, 79);
    CHECK(report.passed);
}

TEST_CASE("check_invariance: SignNet under sampled signs") {
    auto rng = make_rng(6);
    auto net = SignNetElementwise::create(3, 4, {8}, {8}, 2, rng);
    auto report = check_invariance(
        [&](const TensorPtr& x) { return net.forward(x); },
        [](Rng& r) { return random_gaussian(r, {5, 3}); },
        [](Rng& r) { return GroupElement{random_sign_vector(r, 3)}; }, ActionSide::columns, 100,
        1e-12, 80);
    CHECK(report.passed);
}

TEST_CASE("exhaustive sign check enumerates all 2^k flips") {
    auto rng = make_rng(7);
    auto model = SignEqElementwise::create(5, {8}, rng);
    auto v = random_gaussian(rng, {4, 5});
    auto report = check_sign_equivariance_exhaustive(
        [&](const TensorPtr& x) { return model.forward(x); }, v, 5, 1e-12);
    CHECK(report.passed);
    CHECK(report.samples == 32);
}

TEST_CASE("random_orthogonal passes its own validity check") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto rng = make_rng(8, s);
        validate(GroupElement{random_orthogonal(rng, 5)}); // throws on failure
    }
}
