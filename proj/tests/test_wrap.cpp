#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "signeq/models.hpp"
#include "signeq/rng.hpp"
#include "signeq/spectral.hpp"
#include "signeq/symmetry.hpp"
#include "signeq/wrap.hpp"

using namespace signeq;

namespace {

// Gaussian input with spread column scales so the covariance spectrum is
// well separated and the PCA frame is stable.
TensorPtr conditioned_input(Rng& rng, std::size_t n, std::size_t k) {
    auto x = random_gaussian(rng, {n, k});
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < n; ++i) x->at(i, j) *= 1.0 + 1.5 * double(j);
    return x;
}

} // namespace

TEST_CASE("canonicalize with identity base returns the input") {
    auto rng = make_rng(0);
    WrappedModel w{[](const TensorPtr& x) { return x; }, WrapMode::canonicalize, 0};
    auto x = conditioned_input(rng, 12, 4);
    CHECK(max_abs_diff(w.forward(x), x) < 1e-12); // X R R^T = X
}

TEST_CASE("frame averaging with a linear base returns the input") {
    auto rng = make_rng(1);
    WrappedModel w{[](const TensorPtr& x) { return x; }, WrapMode::frame_average, 0};
    auto x = conditioned_input(rng, 12, 3);
    CHECK(max_abs_diff(w.forward(x), x) < 1e-12);
}

TEST_CASE("call counters: 1 per canonicalize call, 2^k per frame average") {
    auto rng = make_rng(2);
    auto base = SignEqElementwise::create(3, {8}, rng);
    WrappedModel w{[&](const TensorPtr& x) { return base.forward(x); },
                   WrapMode::canonicalize, 0};
    auto x = conditioned_input(rng, 10, 3);
    w.forward(x);
    w.forward(x);
    CHECK(w.call_counter == 2);
    w.mode = WrapMode::frame_average;
    w.call_counter = 0;
    w.forward(x);
    CHECK(w.call_counter == 8);
}

TEST_CASE("frame averaging is guarded for large k") {
    WrappedModel w{[](const TensorPtr& x) { return x; }, WrapMode::frame_average, 0};
    auto rng = make_rng(3);
    CHECK_THROWS(frame_average_forward(w, conditioned_input(rng, 40, 17)));
}

TEST_CASE("sign-equivariant base collapses frame averaging onto canonicalization") {
    auto rng = make_rng(4);
    auto base = SignEqElementwise::create(4, {16}, rng);
    WrappedModel canon{[&](const TensorPtr& x) { return base.forward(x); },
                       WrapMode::canonicalize, 0};
    WrappedModel avg{[&](const TensorPtr& x) { return base.forward(x); },
                     WrapMode::frame_average, 0};
    auto x = conditioned_input(rng, 15, 4);
    CHECK(max_abs_diff(canon.forward(x), avg.forward(x)) < 1e-12);
}

TEST_CASE("canonicalize output is independent of the frame's sign choice") {
    // evaluate h(X R S) S R^T for every sign matrix S: all must agree
    auto rng = make_rng(5);
    auto base = SignEqElementwise::create(4, {16}, rng);
    auto x = conditioned_input(rng, 12, 4);
    auto r = pca_frame(x).rotation;
    TensorPtr ref;
    double worst = 0.0;
    for (unsigned mask = 0; mask < 16; ++mask) {
        SignVector s;
        for (std::size_t j = 0; j < 4; ++j) s.signs.push_back(mask >> j & 1u ? -1 : 1);
        auto rs = act(r, GroupElement{s}, ActionSide::columns);
        auto out = matmul(base.forward(matmul(x, rs)), transpose(rs));
        if (!ref) ref = out;
        else worst = std::max(worst, max_abs_diff(ref, out));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("both modes are O(k)-equivariant over random rotations") {
    auto rng = make_rng(6);
    auto base = SignEqElementwise::create(3, {16}, rng);
    for (auto mode : {WrapMode::canonicalize, WrapMode::frame_average}) {
        WrappedModel w{[&](const TensorPtr& x) { return base.forward(x); }, mode, 0};
        auto report = check_equivariance(
            [&](const TensorPtr& x) { return w.forward(x); },
            [](Rng& r) {
                auto x = random_gaussian(r, {10, 3});
                for (std::size_t j = 0; j < 3; ++j)
                    for (std::size_t i = 0; i < 10; ++i) x->at(i, j) *= 1.0 + 1.5 * double(j);
                return x;
            },
            [](Rng& r) { return GroupElement{random_orthogonal(r, 3)}; }, ActionSide::columns,
            ActionSide::columns, 100, 1e-8, 55);
        CHECK(report.passed);
    }
}

TEST_CASE("degenerate covariance propagates out of the wrapper") {
    WrappedModel w{[](const TensorPtr& x) { return x; }, WrapMode::canonicalize, 0};
    auto x = Tensor::from_data({4, 2}, {1, 1, -1, -1, 1, -1, -1, 1}); // equal variances
    CHECK_THROWS_AS(w.forward(x), DegenerateCovariance);
}

TEST_CASE("frame-average cost ratio grows with k") {
    auto rng = make_rng(7);
    std::size_t prev_calls = 0;
    for (std::size_t k = 3; k <= 8; ++k) {
        auto base = SignEqElementwise::create(k, {8}, rng);
        WrappedModel w{[&](const TensorPtr& x) { return base.forward(x); },
                       WrapMode::frame_average, 0};
        w.forward(conditioned_input(rng, 10, k));
        CHECK(w.call_counter == (std::size_t(1) << k));
        CHECK(w.call_counter > prev_calls);
        prev_calls = w.call_counter;
    }
}
