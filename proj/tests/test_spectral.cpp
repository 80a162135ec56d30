#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "signeq/graph.hpp"
#include "signeq/rng.hpp"
#include "signeq/spectral.hpp"
#include "signeq/symmetry.hpp"

using namespace signeq;

namespace {

double orthonormality_defect(const TensorPtr& v) {
    auto g = matmul(transpose(v), v);
    double worst = 0.0;
    for (std::size_t i = 0; i < g->rows(); ++i)
        for (std::size_t j = 0; j < g->cols(); ++j)
            worst = std::max(worst, std::abs(g->at(i, j) - (i == j ? 1.0 : 0.0)));
    return worst;
}

double reconstruction_defect(const TensorPtr& a, const EigBasis& eig) {
    auto lam = Tensor::create({eig.values.size(), eig.values.size()});
    for (std::size_t i = 0; i < eig.values.size(); ++i) lam->at(i, i) = eig.values[i];
    auto back = matmul(matmul(eig.vectors, lam), transpose(eig.vectors));
    return max_abs_diff(a, back);
}

} // namespace

TEST_CASE("sym_eig: diag(3,1,2) sorts ascending with basis vectors") {
    auto a = Tensor::from_data({3, 3}, {3, 0, 0, 0, 1, 0, 0, 0, 2});
    auto eig = sym_eig(a);
    CHECK(eig.values[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eig.values[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(eig.values[2] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(eig.all_distinct);
    // columns are +-standard basis vectors e2, e3, e1
    CHECK(std::abs(eig.vectors->at(1, 0)) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(eig.vectors->at(2, 1)) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(eig.vectors->at(0, 2)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("sym_eig: identity is degenerate") {
    auto a = Tensor::from_data({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    auto eig = sym_eig(a);
    for (double v : eig.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(eig.all_distinct);
}

TEST_CASE("sym_eig rejects non-symmetric input") {
    auto a = Tensor::from_data({2, 2}, {1, 2, 3, 4});
    CHECK_THROWS(sym_eig(a));
}

TEST_CASE("sym_eig: random 8x8 reconstructs below 1e-7") {
    auto rng = make_rng(5);
    auto g = random_gaussian(rng, {8, 8});
    auto a = add(g, transpose(g));
    auto eig = sym_eig(a);
    CHECK(reconstruction_defect(a, eig) < 1e-7 * std::max(1.0, max_abs_value(a)));
    CHECK(orthonormality_defect(eig.vectors) < 1e-8);
}

TEST_CASE("sym_eig: large-matrix path reconstructs too") {
    auto rng = make_rng(6);
    auto g = random_gaussian(rng, {130, 130});
    auto a = add(g, transpose(g));
    auto eig = sym_eig(a);
    for (std::size_t i = 1; i < eig.values.size(); ++i) CHECK(eig.values[i - 1] <= eig.values[i]);
    CHECK(reconstruction_defect(a, eig) < 1e-7 * std::max(1.0, max_abs_value(a)));
    CHECK(orthonormality_defect(eig.vectors) < 1e-8);
}

TEST_CASE("sym_eig: orthonormal columns over 100 random draws") {
    for (std::uint64_t s = 0; s < 100; ++s) {
        auto rng = make_rng(100, s);
        auto g = random_gaussian(rng, {6, 6});
        auto a = add(g, transpose(g));
        CHECK(orthonormality_defect(sym_eig(a).vectors) < 1e-8);
    }
}

TEST_CASE("laplacian_eigvecs: 2-node path has values (0,2)") {
    Graph g;
    g.n = 2;
    g.add_edge(0, 1);
    auto eig = laplacian_eigvecs(g, 2, LaplacianVariant::unnormalized);
    CHECK(eig.values[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(eig.values[1] == doctest::Approx(2.0).epsilon(1e-12));
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(eig.vectors->at(0, 0)) == doctest::Approx(r).epsilon(1e-10));
    CHECK(std::abs(eig.vectors->at(0, 0) * eig.vectors->at(1, 0) - r * r) < 1e-10); // same sign
    CHECK(eig.vectors->at(0, 1) * eig.vectors->at(1, 1) < 0.0);                     // opposite
}

TEST_CASE("laplacian_eigvecs rejects k > n") {
    Graph g;
    g.n = 2;
    g.add_edge(0, 1);
    CHECK_THROWS(laplacian_eigvecs(g, 3, LaplacianVariant::unnormalized));
}

TEST_CASE("even cycle adjacency has -2 with the alternating eigenvector") {
    auto g = generate_cycle({6});
    auto eig = sym_eig(adjacency(g), EigSource::adjacency);
    CHECK(eig.values.front() == doctest::Approx(-2.0).epsilon(1e-10));
    // simple bottom eigenvalue: next one is -1
    CHECK(eig.values[1] > -1.5);
    auto z = eig.vectors;
    const double mag = 1.0 / std::sqrt(6.0);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(std::abs(z->at(i, 0)) == doctest::Approx(mag).epsilon(1e-8));
        if (i > 0) CHECK(z->at(i, 0) * z->at(i - 1, 0) < 0.0); // alternating signs
    }
}

TEST_CASE("disconnected graph: one zero eigenvalue per component") {
    Graph g;
    g.n = 4;
    g.add_edge(0, 1);
    g.add_edge(2, 3);
    auto eig = laplacian_eigvecs(g, 2, LaplacianVariant::unnormalized);
    CHECK(std::abs(eig.values[0]) < 1e-10);
    CHECK(std::abs(eig.values[1]) < 1e-10);
}

TEST_CASE("pca_frame: uncorrelated sorted columns give a signed identity") {
    // columns mean-zero, uncorrelated, variances 9 > 1
    auto x = Tensor::from_data({4, 2}, {3, 1, -3, -1, 3, -1, -3, 1});
    auto f = pca_frame(x);
    CHECK(f.variances[0] > f.variances[1]);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            const double v = std::abs(f.rotation->at(i, j));
            CHECK(v == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
        }
}

TEST_CASE("pca_frame: rotation diagonalizes the covariance") {
    auto rng = make_rng(8);
    auto x = random_gaussian(rng, {30, 4});
    for (std::size_t j = 0; j < 4; ++j) // spread variances so the frame is well defined
        for (std::size_t i = 0; i < 30; ++i) x->at(i, j) *= 1.0 + double(j);
    auto f = pca_frame(x);
    auto c = covariance(x);
    auto d = matmul(matmul(transpose(f.rotation), c), f.rotation);
    double trace = 0.0;
    for (std::size_t i = 0; i < 4; ++i) trace += c->at(i, i);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            if (i != j) CHECK(std::abs(d->at(i, j)) < 1e-7 * trace);
    CHECK(orthonormality_defect(f.rotation) < 1e-8);
}

TEST_CASE("pca_frame: frames of X and XQ differ by Q^T and signs") {
    auto rng = make_rng(9);
    auto x = random_gaussian(rng, {25, 3});
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < 25; ++i) x->at(i, j) *= 1.0 + 2.0 * double(j);
    auto q = random_orthogonal(rng, 3).q;
    auto rx = pca_frame(x).rotation;
    auto rxq = pca_frame(matmul(x, q)).rotation;
    auto ratio = matmul(transpose(rxq), matmul(transpose(q), rx)); // should be diag(+-1)
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            const double v = std::abs(ratio->at(i, j));
            CHECK(v == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-7));
        }
}

TEST_CASE("pca_frame: translation leaves the frame unchanged up to signs") {
    auto rng = make_rng(10);
    auto x = random_gaussian(rng, {20, 3});
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < 20; ++i) x->at(i, j) *= 1.0 + 2.0 * double(j);
    auto shifted = Tensor::from_data(x->shape, x->data);
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t j = 0; j < 3; ++j) shifted->at(i, j) += 5.0 - 3.0 * double(j);
    auto r1 = pca_frame(x).rotation;
    auto r2 = pca_frame(shifted).rotation;
    for (std::size_t j = 0; j < 3; ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < 3; ++i) dot += r1->at(i, j) * r2->at(i, j);
        CHECK(std::abs(std::abs(dot) - 1.0) < 1e-8); // columns agree up to sign
    }
}

TEST_CASE("pca_frame: equal variances raise DegenerateCovariance") {
    auto x = Tensor::from_data({4, 2}, {1, 1, -1, -1, 1, -1, -1, 1});
    CHECK_THROWS_AS(pca_frame(x), DegenerateCovariance);
}
