#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "signeq/experiments.hpp"
#include "signeq/rng.hpp"
#include "signeq/symmetry.hpp"

using namespace signeq;

TEST_CASE("auc: perfectly separated scores give 1.0") {
    CHECK(auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == 1.0);
}

TEST_CASE("auc: pinned mixed case is 0.5") {
    // pairs (0.9 vs 0.8) wins, (0.3 vs 0.8) loses
    CHECK(auc({0.9, 0.8, 0.3}, {1, 0, 1}) == 0.5);
}

TEST_CASE("auc: all-equal scores tie out at 0.5") {
    CHECK(auc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == 0.5);
}

TEST_CASE("auc rejects single-class input") {
    CHECK_THROWS(auc({0.1, 0.2}, {1, 1}));
    CHECK_THROWS(auc({0.1, 0.2}, {0, 0}));
}

TEST_CASE("ResultsRecord: metric lookup, csv schema, json echo") {
    ResultsRecord rec;
    rec.experiment = "demo";
    rec.model = "m";
    rec.seed = 3;
    rec.metrics = {{"a", 1.5}};
    rec.wall_s = 0.25;
    rec.calls = 7;
    CHECK(rec.metric("a") == 1.5);
    CHECK_THROWS(rec.metric("missing"));
    CHECK(ResultsRecord::csv_header() == "experiment,model,seed,metric,value,wall_s,calls");
    CHECK(rec.csv_rows().find("demo,m,3,a,1.5") == 0);
    auto j = rec.to_json();
    CHECK(j["experiment"] == "demo");
    CHECK(j["metrics"]["a"] == 1.5);
}

TEST_CASE("gen_nbody: zero charges move in straight lines exactly") {
    NBodyConfig cfg;
    auto rng = make_rng(0);
    auto pos = random_gaussian(rng, {5, 3});
    auto vel = random_gaussian(rng, {5, 3});
    auto q = Tensor::zeros({5, 1});
    auto fin = integrate_nbody(pos, vel, q, cfg.steps, cfg.dt, cfg.softening);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(fin->at(i, j) ==
                  doctest::Approx(pos->at(i, j) + double(cfg.steps) * cfg.dt * vel->at(i, j))
                      .epsilon(1e-12));
}

TEST_CASE("gen_nbody: the integrator is O(d)-covariant") {
    NBodyConfig cfg;
    auto rng = make_rng(1);
    auto pos = random_gaussian(rng, {5, 3});
    auto vel = random_gaussian(rng, {5, 3});
    auto q = random_gaussian(rng, {5, 1});
    auto rot = random_orthogonal(rng, 3).q;
    auto fin = integrate_nbody(pos, vel, q, 300, cfg.dt, cfg.softening);
    auto fin_rot = integrate_nbody(matmul(pos, rot), matmul(vel, rot), q, 300, cfg.dt,
                                   cfg.softening);
    CHECK(max_abs_diff(fin_rot, matmul(fin, rot)) < 1e-8);
}

TEST_CASE("gen_nbody: sample shapes and determinism") {
    NBodyConfig cfg;
    cfg.d = 4;
    auto a = gen_nbody(cfg, 3, 11);
    auto b = gen_nbody(cfg, 3, 11);
    REQUIRE(a.size() == 3);
    CHECK(a[0].positions->rows() == cfg.n_particles);
    CHECK(a[0].positions->cols() == 4);
    CHECK(a[0].charges->cols() == 1);
    for (std::size_t t = 0; t < 3; ++t)
        CHECK(max_abs_diff(a[t].target, b[t].target) == 0.0);
}

TEST_CASE("NBodyModel: core is exactly sign equivariant on the stacked input") {
    auto rng = make_rng(2);
    auto model = NBodyModel::create(3, rng);
    auto x = random_gaussian(rng, {10, 3}); // 5 particles stacked pos over vel
    auto charges = random_gaussian(rng, {5, 1});
    auto report = check_sign_equivariance_exhaustive(
        [&](const TensorPtr& v) { return model.core(v, charges); }, x, 3, 1e-12);
    CHECK(report.passed);
}

TEST_CASE("two_copy_lifted_basis: orthonormal with mirrored-row structure") {
    Graph base;
    EigBasis eig;
    for (std::uint64_t s = 3;; ++s) { // retry draws whose base spectrum is not simple
        base = generate_er({40, 0.2}, s);
        try {
            eig = two_copy_lifted_basis(base, 8, LaplacianVariant::normalized);
            break;
        } catch (const std::runtime_error&) {
            REQUIRE(s < 23);
        }
    }
    auto v = eig.vectors;
    REQUIRE(v->rows() == 80);
    REQUIRE(v->cols() == 8);
    auto g = matmul(transpose(v), v);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            CHECK(std::abs(g->at(i, j) - (i == j ? 1.0 : 0.0)) < 1e-8);
    // each column is either symmetric or antisymmetric across the mirror
    for (std::size_t j = 0; j < 8; ++j) {
        double symm = 0.0, anti = 0.0;
        for (std::size_t i = 0; i < 40; ++i) {
            symm = std::max(symm, std::abs(v->at(i, j) - v->at(i + 40, j)));
            anti = std::max(anti, std::abs(v->at(i, j) + v->at(i + 40, j)));
        }
        CHECK(std::min(symm, anti) < 1e-10);
    }
    CHECK_FALSE(eig.all_distinct); // doubled spectrum is two-fold by construction
    CHECK_THROWS(two_copy_lifted_basis(base, 7, LaplacianVariant::normalized)); // odd k
}

TEST_CASE("cycle fixture: -2 eigenvector ranks two-hop pairs above one-hop") {
    auto g = generate_cycle({6});
    auto eig = sym_eig(adjacency(g), EigSource::adjacency);
    REQUIRE(eig.values.front() == doctest::Approx(-2.0).epsilon(1e-10));
    auto z = eig.vectors;
    double worst_two_hop = 1e18, best_one_hop = -1e18;
    for (std::size_t i = 0; i < 6; ++i) {
        const double one = z->at(i, 0) * z->at((i + 1) % 6, 0);
        const double two = z->at(i, 0) * z->at((i + 2) % 6, 0);
        best_one_hop = std::max(best_one_hop, one);
        worst_two_hop = std::min(worst_two_hop, two);
    }
    CHECK(best_one_hop < 0.0);
    CHECK(worst_two_hop > 0.0);
}

TEST_CASE("negative control: a plain MLP is not sign equivariant") {
    auto rng = make_rng(3);
    auto mlp = Mlp::create({4, 16, 4}, rng);
    auto v = random_gaussian(rng, {1, 4});
    auto report = check_sign_equivariance_exhaustive(
        [&](const TensorPtr& x) { return mlp.forward(x); }, v, 4, 1e-2);
    CHECK_FALSE(report.passed);
    CHECK(report.max_violation > 1e-2);
}

TEST_CASE("run_poly_fit: degree-1 target is fit to high precision") {
    PolyFitConfig cfg;
    cfg.degree = 1;
    cfg.max_steps = 2000;
    cfg.target_mse = 1e-6;
    auto rec = run_poly_fit(cfg);
    CHECK(rec.metric("heldout_mse") < 1e-6);
    CHECK(rec.metric("steps") <= 2000);
}

TEST_CASE("run_linkpred: small run is reproducible bit-for-bit") {
    LinkPredConfig cfg;
    cfg.n = 60;
    cfg.er_p = 0.3; // dense enough to keep the small spectrum simple
    cfg.extra_edges = 40;
    cfg.k = 6;
    cfg.epochs = 5;
    cfg.model = LinkPredModel::signeq;
    auto a = run_linkpred(cfg);
    auto b = run_linkpred(cfg);
    CHECK(a.metric("test_auc") == b.metric("test_auc"));
    CHECK(a.metric("val_auc") == b.metric("val_auc"));
    CHECK(a.metric("param_count") == b.metric("param_count"));
    CHECK(a.metric("param_count") <= double(cfg.budget));
}

TEST_CASE("linkpred model names round-trip") {
    for (auto m : {LinkPredModel::gcn_constant, LinkPredModel::signnet_struct,
                   LinkPredModel::dot_baseline, LinkPredModel::mlp_hadamard_baseline,
                   LinkPredModel::signeq})
        CHECK(linkpred_model_from_name(linkpred_model_name(m)) == m);
    CHECK_THROWS(linkpred_model_from_name("nope"));
}

TEST_CASE("sign-equivariant stack passes the exhaustive check on a real eigenbasis") {
    LinkPredConfig cfg;
    cfg.n = 50;
    cfg.er_p = 0.3;
    cfg.extra_edges = 30;
    cfg.k = 4;
    cfg.epochs = 10;
    cfg.model = LinkPredModel::signeq;
    auto data = prepare_linkpred(cfg);
    auto rng = make_rng(cfg.seed, 1);
    auto net = DssSignEqLayer::create(cfg.k, {16, 16}, rng);
    auto report = check_sign_equivariance_exhaustive(
        [&](const TensorPtr& v) { return net.forward(v); }, data.basis.vectors, cfg.k, 1e-10);
    CHECK(report.passed);
}
