// Command-line front end: dims, check, linkpred, nbody, polyfit.
// Exit codes: 0 success, 1 property/acceptance failure, 2 usage/config error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "signeq/experiments.hpp"
#include "signeq/symmetry.hpp"
#include "signeq/wrap.hpp"

namespace {

using namespace signeq;
using nlohmann::json;

// temp file + rename, so interrupted runs never leave partial output
void atomic_write(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + tmp.string());
        os << content;
    }
    std::filesystem::rename(tmp, path);
}

std::filesystem::path output_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("SIGNEQ_OUT")) return env;
    return ".";
}

// strict parsing: unknown config keys are an error, not a silent no-op
void reject_unknown(const json& cfg, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : cfg.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) { ok = true; break; }
        if (!ok) throw std::invalid_argument("unknown config key: " + key);
    }
}

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file " + path);
    return json::parse(is, nullptr, true, /*ignore_comments=*/true);
}

void write_records(const std::filesystem::path& dir, const std::string& stem,
                   const std::vector<ResultsRecord>& records) {
    std::filesystem::create_directories(dir);
    json arr = json::array();
    std::string csv = ResultsRecord::csv_header() + "\n";
    for (const auto& r : records) {
        arr.push_back(r.to_json());
        csv += r.csv_rows();
    }
    atomic_write(dir / (stem + ".json"), arr.dump(2) + "\n");
    atomic_write(dir / (stem + ".csv"), csv);
}

// Runs fn(seed) for each seed, optionally in parallel; results ordered by
// position in `seeds`, independent of completion order.
std::vector<ResultsRecord> run_seeds(const std::vector<std::uint64_t>& seeds, std::size_t jobs,
                                     const std::function<ResultsRecord(std::uint64_t)>& fn) {
    std::vector<ResultsRecord> out(seeds.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < seeds.size(); i++) out[i] = fn(seeds[i]);
        return out;
    }
    std::mutex mtx;
    std::size_t next = 0;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(jobs, seeds.size()); t++)
        pool.emplace_back([&]() {
            while (true) {
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lock(mtx);
                    if (next >= seeds.size()) return;
                    i = next++;
                }
                out[i] = fn(seeds[i]);
            }
        });
    for (auto& th : pool) th.join();
    return out;
}

int cmd_dims(std::size_t kmax, const std::string& out_flag) {
    auto csv = dim_table_csv(dim_table(kmax));
    const auto dir = output_dir(out_flag);
    std::filesystem::create_directories(dir);
    atomic_write(std::filesystem::path(dir) / "dims.csv", csv);
    std::cout << csv;
    return 0;
}

struct CheckOutcome {
    int failures = 0;
    void report(const std::string& name, bool ok, double value) {
        std::cout << (ok ? "pass" : "FAIL") << "  " << name << "  (" << value << ")\n";
        if (!ok) failures++;
    }
};

int cmd_check(std::uint64_t seed) {
    CheckOutcome out;
    auto rng = make_rng(seed, 1);

    // exhaustive sign checks on every sign-equivariant / invariant model
    {
        const std::size_t n = 6, k = 6;
        auto input = random_gaussian(rng, {n, k});
        auto se = SignEqElementwise::create(k, {16, 16}, rng);
        auto r = check_sign_equivariance_exhaustive(
            [&](const TensorPtr& v) { return se.forward(v); }, input, k, 1e-12);
        out.report("signeq_elementwise exhaustive sign", r.passed, r.max_violation);

        auto dss = DssSignEqLayer::create(k, {16, 16}, rng);
        r = check_sign_equivariance_exhaustive(
            [&](const TensorPtr& v) { return dss.forward(v); }, input, k, 1e-12);
        out.report("dss layer exhaustive sign", r.passed, r.max_violation);

        auto layer = SignEqLayer::create(n, k, n, 8, rng);
        r = check_sign_equivariance_exhaustive(
            [&](const TensorPtr& v) { return layer.forward(v); }, input, k, 1e-12);
        out.report("signeq layer exhaustive sign", r.passed, r.max_violation);

        auto sn = SignNetElementwise::create(k, 8, {8}, {8}, 4, rng);
        r = check_sign_equivariance_exhaustive(
            [&](const TensorPtr& v) { return sn.forward(v); }, input, k, 1e-12, true);
        out.report("signnet exhaustive sign invariance", r.passed, r.max_violation);
    }

    // permutation equivariance of the DSS layer
    {
        const std::size_t n = 10, k = 5;
        auto dss = DssSignEqLayer::create(k, {16}, rng);
        auto r = check_equivariance(
            [&](const TensorPtr& v) { return dss.forward(v); },
            [n, k](Rng& r2) { return random_gaussian(r2, {n, k}); },
            [n](Rng& r2) { return GroupElement{random_permutation(r2, n)}; }, ActionSide::rows,
            ActionSide::rows, 100, 1e-10, seed + 2);
        out.report("dss layer permutation equivariance", r.passed, r.max_violation);
    }

    // PCA wrap: O(k) equivariance of both modes
    {
        const std::size_t n = 12, k = 4;
        auto core = DssSignEqLayer::create(k, {16}, rng);
        for (auto mode : {WrapMode::canonicalize, WrapMode::frame_average}) {
            WrappedModel w;
            w.mode = mode;
            w.inner = [&core](const TensorPtr& v) { return core.forward(v); };
            auto r = check_equivariance(
                [&](const TensorPtr& x) { return w.forward(x); },
                [n, k](Rng& r2) { return random_gaussian(r2, {n, k}); },
                [k](Rng& r2) { return GroupElement{random_orthogonal(r2, k)}; },
                ActionSide::columns, ActionSide::columns, 100, 1e-6, seed + 3);
            out.report(mode == WrapMode::canonicalize ? "canonicalize O(k) equivariance"
                                                      : "frame averaging O(k) equivariance",
                       r.passed, r.max_violation);
        }
    }

    // gradients of the main layer types against central differences
    {
        const std::size_t k = 4;
        auto se = SignEqElementwise::create(k, {8}, rng);
        ParamTree tree;
        se.collect(tree, "se");
        auto x = random_uniform(rng, {3, k}, 0.5, 1.5); // clear of the abs kink
        double err = grad_check(
            [&](const std::vector<TensorPtr>&) { return sum(se.forward(x)); }, tree.tensors());
        out.report("signeq_elementwise grad check", err < 1e-4, err);
    }

    // negative control: a plain MLP is not sign equivariant
    {
        const std::size_t k = 4;
        auto mlp = Mlp::create({k, 16, k}, rng);
        auto input = random_gaussian(rng, {3, k});
        auto r = check_sign_equivariance_exhaustive(
            [&](const TensorPtr& v) { return mlp.forward(v); }, input, k, 1e-2);
        out.report("plain MLP fails sign equivariance (negative control)", !r.passed,
                   r.max_violation);
    }

    std::cout << (out.failures ? "CHECK FAILED\n" : "all checks passed\n");
    return out.failures ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sign-equivariant models: dimension tables, property checks, experiments"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may appear after the subcommand

    std::string config_path, out_flag;
    std::uint64_t seed = 0;
    std::size_t jobs = 1, n_seeds = 1;
    bool paper_scale = false;
    app.add_option("--config", config_path, "JSON config file (comments allowed)");
    app.add_option("--out", out_flag, "output directory (or SIGNEQ_OUT env var)");
    app.add_option("--seed", seed, "root seed");
    app.add_option("--seeds", n_seeds, "number of consecutive seeds starting at --seed");
    app.add_option("--jobs", jobs, "parallel seed workers");
    app.add_flag("--paper-scale", paper_scale, "use full-paper dataset sizes");

    auto* dims = app.add_subcommand("dims", "emit the equivariant-map dimension table as CSV");
    std::size_t kmax = 20;
    dims->add_option("--kmax", kmax, "largest k");

    auto* check = app.add_subcommand("check", "run the property suite");

    auto* linkpred = app.add_subcommand("linkpred", "near-symmetric link prediction study");
    std::string graph_kind = "er", model_name = "signeq";
    linkpred->add_option("--graph", graph_kind, "er | ba");
    linkpred->add_option("--model", model_name,
                         "gcn_constant | signnet_struct | dot_baseline | "
                         "mlp_hadamard_baseline | signeq | all");

    auto* nbody = app.add_subcommand("nbody", "n-body orthogonal equivariance study");
    std::string nbody_mode = "canonicalize";
    std::size_t nbody_d = 3;
    nbody->add_option("--mode", nbody_mode, "canonicalize | frame_average");
    nbody->add_option("--d", nbody_d, "spatial dimension");

    auto* polyfit = app.add_subcommand("polyfit", "fit a sampled sign-equivariant polynomial");
    std::size_t poly_k = 4;
    unsigned poly_degree = 4;
    polyfit->add_option("--k", poly_k, "input dimension");
    polyfit->add_option("--degree", poly_degree, "target polynomial degree");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const json cfg = load_config(config_path);
        std::vector<std::uint64_t> seeds;
        for (std::size_t i = 0; i < n_seeds; i++) seeds.push_back(seed + i);

        if (dims->parsed()) {
            reject_unknown(cfg, {"kmax"});
            return cmd_dims(cfg.value("kmax", kmax), out_flag);
        }
        if (check->parsed()) return cmd_check(seed);

        if (linkpred->parsed()) {
            reject_unknown(cfg, {"graph", "n", "er_p", "ba_m", "extra_edges", "k", "epochs",
                                 "lr", "model"});
            LinkPredConfig base;
            base.graph = cfg.value("graph", graph_kind) == "ba" ? GraphKind::ba : GraphKind::er;
            base.n = cfg.value("n", base.n);
            base.er_p = cfg.value("er_p", base.er_p);
            base.ba_m = cfg.value("ba_m", base.ba_m);
            base.extra_edges = cfg.value("extra_edges", base.extra_edges);
            base.k = cfg.value("k", base.k);
            base.epochs = cfg.value("epochs", base.epochs);
            base.lr = cfg.value("lr", base.lr);
            const std::string want = cfg.value("model", model_name);
            std::vector<LinkPredModel> models;
            if (want == "all")
                models = {LinkPredModel::gcn_constant, LinkPredModel::signnet_struct,
                          LinkPredModel::dot_baseline, LinkPredModel::mlp_hadamard_baseline,
                          LinkPredModel::signeq};
            else
                models = {linkpred_model_from_name(want)};
            auto records = run_seeds(seeds, jobs, [&](std::uint64_t s) {
                LinkPredConfig c = base;
                c.seed = s;
                auto data = prepare_linkpred(c);
                ResultsRecord merged;
                std::vector<ResultsRecord> per_model;
                for (auto m : models) {
                    c.model = m;
                    per_model.push_back(run_linkpred_model(data, c));
                }
                // fold the per-model records into one row set
                merged = per_model.front();
                for (std::size_t i = 1; i < per_model.size(); i++) {
                    const auto& r = per_model[i];
                    merged.metrics.emplace_back(r.model + "_test_auc", r.metric("test_auc"));
                    merged.wall_s += r.wall_s;
                }
                if (per_model.size() > 1) {
                    merged.model = "all";
                    merged.metrics.insert(merged.metrics.begin(),
                                          {per_model.front().model + "_test_auc",
                                           per_model.front().metric("test_auc")});
                }
                return merged;
            });
            write_records(output_dir(out_flag), "linkpred", records);
            return 0;
        }

        if (nbody->parsed()) {
            reject_unknown(cfg, {"d", "mode", "epochs", "lr", "train", "test"});
            NBodyConfig base;
            base.d = cfg.value("d", nbody_d);
            base.mode = cfg.value("mode", nbody_mode) == "frame_average" ? WrapMode::frame_average
                                                                        : WrapMode::canonicalize;
            base.epochs = cfg.value("epochs", base.epochs);
            base.lr = cfg.value("lr", base.lr);
            if (paper_scale) {
                base.train = 3000;
                base.val = 2000;
                base.test = 2000;
            }
            base.train = cfg.value("train", base.train);
            base.test = cfg.value("test", base.test);
            auto records = run_seeds(seeds, jobs, [&](std::uint64_t s) {
                NBodyConfig c = base;
                c.seed = s;
                return run_nbody(c);
            });
            write_records(output_dir(out_flag), "nbody", records);
            return 0;
        }

        if (polyfit->parsed()) {
            reject_unknown(cfg, {"k", "degree", "max_steps"});
            PolyFitConfig base;
            base.k = cfg.value("k", poly_k);
            base.degree = cfg.value("degree", poly_degree);
            base.max_steps = cfg.value("max_steps", base.max_steps);
            auto records = run_seeds(seeds, jobs, [&](std::uint64_t s) {
                PolyFitConfig c = base;
                c.seed = s;
                return run_poly_fit(c);
            });
            write_records(output_dir(out_flag), "polyfit", records);
            return 0;
        }
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
