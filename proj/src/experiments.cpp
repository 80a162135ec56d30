#include "signeq/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace signeq {

namespace {

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

// Median per-epoch wall time, excluding the first epoch (warm-up).
double epoch_median(const std::vector<double>& epoch_walls) {
    if (epoch_walls.size() <= 1) return epoch_walls.empty() ? 0.0 : epoch_walls[0];
    return median({epoch_walls.begin() + 1, epoch_walls.end()});
}

} // namespace

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("auc: scores/labels length mismatch");
    std::size_t n_pos = 0, n_neg = 0;
    for (int l : labels) (l ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("auc: both classes required");
    // average ranks with ties, then the Mann-Whitney statistic
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> rank(scores.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) j++;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t t = i; t <= j; t++) rank[order[t]] = avg;
        i = j + 1;
    }
    double pos_rank_sum = 0.0;
    for (std::size_t t = 0; t < labels.size(); t++)
        if (labels[t]) pos_rank_sum += rank[t];
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

std::string linkpred_model_name(LinkPredModel m) {
    switch (m) {
    case LinkPredModel::gcn_constant: return "gcn_constant";
    case LinkPredModel::signnet_struct: return "signnet_struct";
    case LinkPredModel::dot_baseline: return "dot_baseline";
    case LinkPredModel::mlp_hadamard_baseline: return "mlp_hadamard_baseline";
    case LinkPredModel::signeq: return "signeq";
    }
    throw std::logic_error("unreachable");
}

LinkPredModel linkpred_model_from_name(const std::string& name) {
    for (LinkPredModel m :
         {LinkPredModel::gcn_constant, LinkPredModel::signnet_struct, LinkPredModel::dot_baseline,
          LinkPredModel::mlp_hadamard_baseline, LinkPredModel::signeq})
        if (linkpred_model_name(m) == name) return m;
    throw std::invalid_argument("unknown link prediction model: " + name);
}

nlohmann::json LinkPredConfig::to_json() const {
    return {{"graph", graph == GraphKind::er ? "er" : "ba"},
            {"n", n},
            {"er_p", er_p},
            {"ba_m", ba_m},
            {"extra_edges", extra_edges},
            {"k", k},
            {"model", linkpred_model_name(model)},
            {"epochs", epochs},
            {"lr", lr},
            {"budget", budget},
            {"seed", seed},
            {"decode", signeq_decode == DecodeMode::dot ? "dot" : "mlp_hadamard"},
            {"laplacian", variant == LaplacianVariant::unnormalized ? "unnormalized" : "normalized"}};
}

double ResultsRecord::metric(const std::string& name) const {
    for (const auto& [k, v] : metrics)
        if (k == name) return v;
    throw std::invalid_argument("metric not recorded: " + name);
}

nlohmann::json ResultsRecord::to_json() const {
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [k, v] : metrics) m[k] = v;
    return {{"experiment", experiment}, {"model", model},   {"seed", seed},
            {"config", config},         {"metrics", m},     {"wall_s", wall_s},
            {"calls", calls}};
}

std::string ResultsRecord::csv_header() { return "experiment,model,seed,metric,value,wall_s,calls"; }

std::string ResultsRecord::csv_rows() const {
    std::ostringstream os;
    for (const auto& [k, v] : metrics)
        os << experiment << "," << model << "," << seed << "," << k << "," << v << "," << wall_s
           << "," << calls << "\n";
    return os.str();
}

namespace {

Graph make_two_copy_graph(const LinkPredConfig& cfg, std::uint64_t stream) {
    Graph base = cfg.graph == GraphKind::er
                     ? generate_er({cfg.n, cfg.er_p}, cfg.seed ^ (stream * 2 + 1))
                     : generate_ba({cfg.n, cfg.ba_m}, cfg.seed ^ (stream * 2 + 1));
    return two_copy(base, cfg.extra_edges, cfg.seed ^ (stream * 2 + 2));
}

} // namespace

LinkPredData prepare_linkpred(const LinkPredConfig& cfg) {
    LinkPredData data;
    for (std::size_t attempt = 0;; attempt++) {
        if (attempt > cfg.max_resamples)
            throw std::runtime_error("prepare_linkpred: no simple spectrum after resampling");
        data.graph = make_two_copy_graph(cfg, attempt);
        data.split = split_edges(data.graph, 0.8, 0.1, 0.1, 1, cfg.seed + 77);
        // eigenvectors come from the training graph only: held-out edges must
        // not leak into the features
        data.train_graph.n = data.graph.n;
        data.train_graph.edges = data.split.train_pos;
        data.basis = laplacian_eigvecs(data.train_graph, cfg.k, cfg.variant);
        if (data.basis.all_distinct) break;
        data.resamples++;
    }
    return data;
}

namespace {

// Mean aggregation over the closed neighborhood: rows of (A + I) scaled to
// sum to 1.
SparseMatrix mean_adjacency(const Graph& g) {
    std::vector<std::size_t> rows, cols;
    std::vector<double> vals;
    auto deg = g.degrees();
    auto push = [&](std::size_t i, std::size_t j) {
        rows.push_back(i);
        cols.push_back(j);
        vals.push_back(1.0 / static_cast<double>(deg[i] + 1));
    };
    for (std::size_t i = 0; i < g.n; i++) push(i, i);
    for (const auto& [a, b] : g.edges) {
        push(a, b);
        push(b, a);
    }
    return SparseMatrix::from_triplets(g.n, g.n, rows, cols, vals);
}

struct LinkPredNet {
    LinkPredModel tag;
    std::size_t k = 0;
    // gcn
    SparseMatrix ahat;
    Mlp gcn1, gcn2; // used as single affine layers
    // signnet
    SignNetElementwise signnet;
    // signeq
    DssSignEqLayer dss1, dss2;
    // decoders
    DecodeMode decode = DecodeMode::dot;
    Mlp decoder_mlp;
    bool has_decoder_mlp = false;

    ParamTree params;

    TensorPtr embed(const TensorPtr& v) const {
        switch (tag) {
        case LinkPredModel::gcn_constant: {
            auto x0 = Tensor::ones({ahat.n_rows, 1});
            auto h1 = relu(gcn1.forward(spmm(ahat, x0)));
            return gcn2.forward(spmm(ahat, h1));
        }
        case LinkPredModel::signnet_struct:
            return signnet.forward(v);
        case LinkPredModel::dot_baseline:
        case LinkPredModel::mlp_hadamard_baseline:
            return v;
        case LinkPredModel::signeq:
            return dss2.forward(dss1.forward(v));
        }
        throw std::logic_error("unreachable");
    }

    TensorPtr score(const TensorPtr& z, const std::vector<std::size_t>& is,
                    const std::vector<std::size_t>& js) const {
        auto zi = gather_rows(z, is);
        auto zj = gather_rows(z, js);
        return pair_decode(decode, zi, zj, has_decoder_mlp ? &decoder_mlp : nullptr);
    }
};

LinkPredNet build_linkpred_net(const LinkPredData& data, const LinkPredConfig& cfg) {
    LinkPredNet net;
    net.tag = cfg.model;
    net.k = cfg.k;
    auto rng = make_rng(cfg.seed, 101);
    switch (cfg.model) {
    case LinkPredModel::gcn_constant:
        net.ahat = mean_adjacency(data.train_graph);
        net.gcn1 = Mlp::create({1, 64}, rng);
        net.gcn2 = Mlp::create({64, cfg.k}, rng);
        net.gcn1.collect(net.params, "gcn1");
        net.gcn2.collect(net.params, "gcn2");
        net.decode = DecodeMode::dot;
        break;
    case LinkPredModel::signnet_struct:
        net.signnet = SignNetElementwise::create(cfg.k, 16, {32}, {64}, cfg.k, rng);
        net.signnet.collect(net.params, "signnet");
        net.decode = DecodeMode::dot;
        break;
    case LinkPredModel::dot_baseline:
        net.decode = DecodeMode::dot;
        break;
    case LinkPredModel::mlp_hadamard_baseline:
        net.decoder_mlp = Mlp::create({cfg.k, 32, 32, 1}, rng);
        net.has_decoder_mlp = true;
        net.decoder_mlp.collect(net.params, "decoder");
        net.decode = DecodeMode::mlp_hadamard;
        break;
    case LinkPredModel::signeq:
        net.dss1 = DssSignEqLayer::create(cfg.k, {64, 48}, rng);
        net.dss2 = DssSignEqLayer::create(cfg.k, {64, 48}, rng);
        net.dss1.mean_complement = true;
        net.dss2.mean_complement = true;
        net.dss1.collect(net.params, "dss1");
        net.dss2.collect(net.params, "dss2");
        net.decode = cfg.signeq_decode;
        if (net.decode == DecodeMode::mlp_hadamard) {
            net.decoder_mlp = Mlp::create({cfg.k, 64, 1}, rng);
            net.has_decoder_mlp = true;
            net.decoder_mlp.collect(net.params, "decoder");
        }
        break;
    }
    if (net.params.count() > cfg.budget)
        throw std::runtime_error("link prediction model exceeds parameter budget: " +
                                 std::to_string(net.params.count()));
    return net;
}

void edge_endpoints(const EdgeList& edges, std::vector<std::size_t>& is,
                    std::vector<std::size_t>& js) {
    for (const auto& [a, b] : edges) {
        is.push_back(a);
        js.push_back(b);
    }
}

double eval_auc(const LinkPredNet& net, const TensorPtr& z, const EdgeList& pos,
                const EdgeList& neg) {
    std::vector<std::size_t> is, js;
    edge_endpoints(pos, is, js);
    edge_endpoints(neg, is, js);
    auto logits = net.score(z, is, js);
    std::vector<double> scores(logits->data.begin(), logits->data.end());
    std::vector<int> labels(pos.size(), 1);
    labels.resize(pos.size() + neg.size(), 0);
    return auc(scores, labels);
}

// Trains the model in place, full batch: one Adam step per epoch over all
// train positives plus an equal number of fresh negatives. Returns
// per-epoch wall times.
std::vector<double> train_linkpred(LinkPredNet& net, const LinkPredData& data,
                                   const LinkPredConfig& cfg) {
    auto params = net.params.tensors();
    std::vector<double> walls;
    if (params.empty()) return walls; // dot baseline: nothing to train
    AdamState adam;
    auto neg_rng = make_rng(cfg.seed, 202);
    auto v = data.basis.vectors;
    std::vector<std::size_t> pos_i, pos_j;
    edge_endpoints(data.split.train_pos, pos_i, pos_j);
    for (std::size_t epoch = 0; epoch < cfg.epochs; epoch++) {
        const double t0 = now_s();
        auto negs = sample_negative_edges(data.graph, data.split.train_pos.size(), neg_rng);
        std::vector<std::size_t> is = pos_i, js = pos_j;
        edge_endpoints(negs, is, js);
        auto labels = Tensor::create({is.size(), 1});
        std::fill(labels->data.begin(), labels->data.begin() + pos_i.size(), 1.0);
        auto z = net.embed(v);
        auto loss = bce_with_logits(net.score(z, is, js), labels);
        backward(loss);
        adam_step(params, adam, cfg.lr);
        zero_grads(params);
        walls.push_back(now_s() - t0);
    }
    return walls;
}

} // namespace

ResultsRecord run_linkpred_model(const LinkPredData& data, const LinkPredConfig& cfg) {
    const double t0 = now_s();
    auto net = build_linkpred_net(data, cfg);
    auto walls = train_linkpred(net, data, cfg);
    auto z = net.embed(data.basis.vectors);
    ResultsRecord rec;
    rec.experiment = "linkpred";
    rec.model = linkpred_model_name(cfg.model);
    rec.seed = cfg.seed;
    rec.config = cfg.to_json();
    rec.calls = 1;
    rec.metrics.emplace_back("test_auc", eval_auc(net, z, data.split.test_pos, data.split.test_neg));
    rec.metrics.emplace_back("val_auc", eval_auc(net, z, data.split.val_pos, data.split.val_neg));
    rec.metrics.emplace_back("epoch_wall_median", epoch_median(walls));
    rec.metrics.emplace_back("resamples", static_cast<double>(data.resamples));
    rec.metrics.emplace_back("param_count", static_cast<double>(net.params.count()));
    rec.wall_s = now_s() - t0;
    return rec;
}

ResultsRecord run_linkpred(const LinkPredConfig& cfg) {
    auto data = prepare_linkpred(cfg);
    return run_linkpred_model(data, cfg);
}

TensorPtr linkpred_embeddings(const LinkPredData& data, const LinkPredConfig& cfg) {
    auto net = build_linkpred_net(data, cfg);
    train_linkpred(net, data, cfg);
    return net.embed(data.basis.vectors);
}

EigBasis two_copy_lifted_basis(const Graph& base, std::size_t k, LaplacianVariant variant) {
    if (k % 2 != 0) throw std::invalid_argument("two_copy_lifted_basis: k must be even");
    auto lower = laplacian_eigvecs(base, k / 2, variant);
    if (!lower.all_distinct)
        throw std::runtime_error("two_copy_lifted_basis: base spectrum not simple");
    const std::size_t n = base.n;
    EigBasis out;
    out.source = lower.source;
    out.vectors = Tensor::create({2 * n, k});
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t c = 0; c < k / 2; c++) {
        out.values.push_back(lower.values[c]);
        out.values.push_back(lower.values[c]);
        for (std::size_t i = 0; i < n; i++) {
            const double u = lower.vectors->at(i, c) * inv_sqrt2;
            out.vectors->at(i, 2 * c) = u;
            out.vectors->at(i + n, 2 * c) = u;
            out.vectors->at(i, 2 * c + 1) = u;
            out.vectors->at(i + n, 2 * c + 1) = -u;
        }
    }
    out.all_distinct = false; // every lifted eigenvalue is two-fold
    return out;
}

MirrorContrast run_mirror_contrast(std::size_t n_base, double er_p, std::size_t k,
                                   std::size_t epochs, double lr, std::uint64_t seed) {
    Graph base;
    EigBasis basis;
    for (std::size_t attempt = 0;; attempt++) {
        if (attempt > 50)
            throw std::runtime_error("run_mirror_contrast: no simple base spectrum");
        base = generate_er({n_base, er_p}, seed + attempt * 13);
        try {
            basis = two_copy_lifted_basis(base, k, LaplacianVariant::unnormalized);
            break;
        } catch (const std::runtime_error&) {
        }
    }
    const std::size_t n = base.n;
    LinkPredData data;
    data.graph = two_copy(base, 0, seed);
    data.train_graph = data.graph; // the mirror symmetry is the point here
    data.basis = basis;
    data.split = split_edges(data.graph, 0.8, 0.1, 0.1, 1, seed + 77);

    MirrorContrast result;
    {
        auto rng = make_rng(seed, 301);
        auto sn = SignNetElementwise::create(k, 16, {32}, {64}, k, rng);
        auto z = sn.forward(basis.vectors);
        for (std::size_t i = 0; i < n; i++)
            for (std::size_t c = 0; c < z->cols(); c++)
                result.signnet_max_pair_diff = std::max(
                    result.signnet_max_pair_diff, std::abs(z->at(i, c) - z->at(i + n, c)));
    }
    {
        LinkPredConfig cfg;
        cfg.k = k;
        cfg.model = LinkPredModel::signeq;
        cfg.epochs = epochs;
        cfg.lr = lr;
        cfg.seed = seed;
        auto z = linkpred_embeddings(data, cfg);
        double total = 0.0;
        for (std::size_t i = 0; i < n; i++)
            for (std::size_t c = 0; c < z->cols(); c++)
                total += std::abs(z->at(i, c) - z->at(i + n, c));
        result.signeq_mean_pair_diff = total / static_cast<double>(n * z->cols());
    }
    return result;
}

nlohmann::json NBodyConfig::to_json() const {
    return {{"n_particles", n_particles},
            {"d", d},
            {"train", train},
            {"val", val},
            {"test", test},
            {"steps", steps},
            {"dt", dt},
            {"softening", softening},
            {"mode", mode == WrapMode::canonicalize ? "canonicalize" : "frame_average"},
            {"epochs", epochs},
            {"lr", lr},
            {"seed", seed}};
}

TensorPtr integrate_nbody(const TensorPtr& positions, const TensorPtr& velocities,
                          const TensorPtr& charges, std::size_t steps, double dt,
                          double softening) {
    const std::size_t n = positions->rows(), d = positions->cols();
    std::vector<double> pos = positions->data;
    std::vector<double> vel = velocities->data;
    std::vector<double> acc(n * d, 0.0);
    auto compute_acc = [&]() {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t i = 0; i < n; i++)
            for (std::size_t j = i + 1; j < n; j++) {
                double r2 = softening;
                for (std::size_t c = 0; c < d; c++) {
                    const double diff = pos[i * d + c] - pos[j * d + c];
                    r2 += diff * diff;
                }
                const double f = charges->data[i] * charges->data[j] / (r2 * std::sqrt(r2));
                for (std::size_t c = 0; c < d; c++) {
                    const double diff = pos[i * d + c] - pos[j * d + c];
                    acc[i * d + c] += f * diff;
                    acc[j * d + c] -= f * diff;
                }
            }
    };
    // leapfrog (kick-drift-kick)
    compute_acc();
    for (std::size_t s = 0; s < steps; s++) {
        for (std::size_t t = 0; t < n * d; t++) vel[t] += 0.5 * dt * acc[t];
        for (std::size_t t = 0; t < n * d; t++) pos[t] += dt * vel[t];
        compute_acc();
        for (std::size_t t = 0; t < n * d; t++) vel[t] += 0.5 * dt * acc[t];
        for (double p : pos)
            if (!std::isfinite(p) || std::abs(p) > 1e3)
                throw std::runtime_error("integrate_nbody: trajectory blew up");
    }
    return Tensor::from_data({n, d}, std::move(pos));
}

std::vector<NBodySample> gen_nbody(const NBodyConfig& cfg, std::size_t count,
                                   std::uint64_t stream) {
    std::vector<NBodySample> out;
    auto rng = make_rng(cfg.seed, 9000 + stream);
    std::uniform_int_distribution<int> coin(0, 1);
    std::size_t blowups = 0;
    while (out.size() < count) {
        NBodySample s;
        s.positions = random_gaussian(rng, {cfg.n_particles, cfg.d});
        s.velocities = random_gaussian(rng, {cfg.n_particles, cfg.d}, 0.5);
        s.charges = Tensor::create({cfg.n_particles, 1});
        for (auto& q : s.charges->data) q = coin(rng) ? 1.0 : -1.0;
        try {
            s.target = integrate_nbody(s.positions, s.velocities, s.charges, cfg.steps, cfg.dt,
                                       cfg.softening);
        } catch (const std::runtime_error&) {
            if (++blowups > 100 * count)
                throw std::runtime_error("gen_nbody: too many unstable trajectories");
            continue;
        }
        out.push_back(std::move(s));
    }
    return out;
}

NBodyModel NBodyModel::create(std::size_t d, Rng& rng) {
    NBodyModel m;
    m.d = d;
    m.gate = Mlp::create({6 * d + 1, 64, 64, 2 * d}, rng);
    return m;
}

TensorPtr NBodyModel::core(const TensorPtr& x, const TensorPtr& charges) const {
    const std::size_t n = x->rows() / 2, dd = x->cols();
    auto pos = slice_rows(x, 0, n);
    auto vel = slice_rows(x, n, 2 * n);
    auto inv = concat_cols(concat_cols(abs(pos), abs(vel)), mul(pos, vel)); // n x 3d
    auto mean_inv = scale(matmul(Tensor::ones({n, 1}), col_sums(inv)),
                          1.0 / static_cast<double>(n));
    auto feats = concat_cols(concat_cols(inv, mean_inv), charges);
    auto g = gate.forward(feats); // n x 2d
    return add(mul(pos, slice_cols(g, 0, dd)), mul(vel, slice_cols(g, dd, 2 * dd)));
}

TensorPtr NBodyModel::predict(const TensorPtr& positions, const TensorPtr& velocities,
                              const TensorPtr& charges) const {
    const std::size_t n = positions->rows(), dd = positions->cols();
    auto stacked = Tensor::create({2 * n, dd});
    std::copy(positions->data.begin(), positions->data.end(), stacked->data.begin());
    std::copy(velocities->data.begin(), velocities->data.end(), stacked->data.begin() + n * dd);
    WrappedModel w;
    w.mode = mode;
    w.inner = [this, &charges](const TensorPtr& v) { return core(v, charges); };
    auto out = w.forward(stacked); // n x d displacements, O(d) equivariant
    inner_calls += w.call_counter;
    return add(positions, out);
}

std::vector<TensorPtr> NBodyModel::params() {
    ParamTree tree;
    gate.collect(tree, "gate");
    return tree.tensors();
}

NBodyModel train_nbody(const NBodyConfig& cfg, const std::vector<NBodySample>& train_set,
                       double* final_train_mse) {
    auto rng = make_rng(cfg.seed, 401);
    auto model = NBodyModel::create(cfg.d, rng);
    model.mode = cfg.mode;
    auto params = model.params();
    AdamState adam;
    const std::size_t batch = 32;
    double last_mse = 0.0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; epoch++) {
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < train_set.size(); start += batch) {
            const std::size_t end = std::min(start + batch, train_set.size());
            TensorPtr loss;
            for (std::size_t i = start; i < end; i++) {
                const auto& s = train_set[i];
                auto l = mse_loss(model.predict(s.positions, s.velocities, s.charges), s.target);
                loss = loss ? add(loss, l) : l;
            }
            loss = scale(loss, 1.0 / static_cast<double>(end - start));
            backward(loss);
            adam_step(params, adam, cfg.lr);
            zero_grads(params);
            epoch_loss += loss->item() * static_cast<double>(end - start);
        }
        last_mse = epoch_loss / static_cast<double>(train_set.size());
    }
    if (final_train_mse) *final_train_mse = last_mse;
    return model;
}

double nbody_mse(const NBodyModel& model, const std::vector<NBodySample>& set) {
    double total = 0.0;
    for (const auto& s : set)
        total += mse_loss(model.predict(s.positions, s.velocities, s.charges), s.target)->item();
    return total / static_cast<double>(set.size());
}

ResultsRecord run_nbody(const NBodyConfig& cfg) {
    const double t0 = now_s();
    auto train_set = gen_nbody(cfg, cfg.train, 0);
    auto test_set = gen_nbody(cfg, cfg.test, 2);

    // per-epoch timing measured against the training loop directly
    std::vector<double> epoch_walls;
    auto rng = make_rng(cfg.seed, 401);
    auto model = NBodyModel::create(cfg.d, rng);
    model.mode = cfg.mode;
    auto params = model.params();
    AdamState adam;
    const std::size_t batch = 32;
    double train_mse = 0.0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; epoch++) {
        const double e0 = now_s();
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < train_set.size(); start += batch) {
            const std::size_t end = std::min(start + batch, train_set.size());
            TensorPtr loss;
            for (std::size_t i = start; i < end; i++) {
                const auto& s = train_set[i];
                auto l = mse_loss(model.predict(s.positions, s.velocities, s.charges), s.target);
                loss = loss ? add(loss, l) : l;
            }
            loss = scale(loss, 1.0 / static_cast<double>(end - start));
            backward(loss);
            adam_step(params, adam, cfg.lr);
            zero_grads(params);
            epoch_loss += loss->item() * static_cast<double>(end - start);
        }
        train_mse = epoch_loss / static_cast<double>(train_set.size());
        epoch_walls.push_back(now_s() - e0);
    }

    // inner calls per forward, measured on one probe
    model.inner_calls = 0;
    const auto& probe = test_set.front();
    model.predict(probe.positions, probe.velocities, probe.charges);
    const std::size_t calls_per_forward = model.inner_calls;

    ResultsRecord rec;
    rec.experiment = "nbody";
    rec.model = cfg.mode == WrapMode::canonicalize ? "signeq_wrapped" : "frame_average";
    rec.seed = cfg.seed;
    rec.config = cfg.to_json();
    rec.calls = calls_per_forward;
    rec.metrics.emplace_back("test_mse", nbody_mse(model, test_set));
    rec.metrics.emplace_back("train_mse", train_mse);
    rec.metrics.emplace_back("epoch_wall_median", epoch_median(epoch_walls));
    rec.metrics.emplace_back("calls_per_forward", static_cast<double>(calls_per_forward));
    rec.wall_s = now_s() - t0;
    return rec;
}

nlohmann::json PolyFitConfig::to_json() const {
    return {{"k", k},         {"degree", degree},       {"n_terms", n_terms},
            {"train", train}, {"heldout", heldout},     {"max_steps", max_steps},
            {"lr", lr},       {"target_mse", target_mse}, {"seed", seed}};
}

ResultsRecord run_poly_fit(const PolyFitConfig& cfg) {
    const double t0 = now_s();
    if (cfg.k > 8 || cfg.degree > 6)
        throw std::invalid_argument("run_poly_fit: k <= 8 and degree <= 6");
    auto target = sample_signeq_poly(cfg.k, cfg.degree, cfg.n_terms, cfg.seed + 55);
    auto rng = make_rng(cfg.seed, 501);
    auto make_set = [&](std::size_t count) {
        auto x = random_uniform(rng, {count, cfg.k}, -1.0, 1.0);
        auto y = Tensor::create({count, cfg.k});
        std::vector<double> row(cfg.k);
        for (std::size_t i = 0; i < count; i++) {
            for (std::size_t j = 0; j < cfg.k; j++) row[j] = x->at(i, j);
            auto out = target.eval(row);
            for (std::size_t j = 0; j < cfg.k; j++) y->at(i, j) = out[j];
        }
        return std::pair{x, y};
    };
    auto [x_train, y_train] = make_set(cfg.train);
    auto [x_held, y_held] = make_set(cfg.heldout);

    auto model = SignEqElementwise::create(cfg.k, {64, 64}, rng);
    ParamTree tree;
    model.collect(tree, "model");
    auto params = tree.tensors();
    AdamState adam;
    double train_mse = 0.0, held_mse = 0.0;
    std::size_t steps_used = 0;
    for (std::size_t step = 0; step < cfg.max_steps; step++) {
        auto loss = mse_loss(model.forward(x_train), y_train);
        backward(loss);
        adam_step(params, adam, cfg.lr);
        zero_grads(params);
        train_mse = loss->item();
        steps_used = step + 1;
        if (step % 100 == 99 || step + 1 == cfg.max_steps) {
            held_mse = mse_loss(model.forward(x_held), y_held)->item();
            if (held_mse < cfg.target_mse) break;
        }
    }
    held_mse = mse_loss(model.forward(x_held), y_held)->item();

    ResultsRecord rec;
    rec.experiment = "polyfit";
    rec.model = "signeq_elementwise";
    rec.seed = cfg.seed;
    rec.config = cfg.to_json();
    rec.calls = 1;
    rec.metrics.emplace_back("train_mse", train_mse);
    rec.metrics.emplace_back("heldout_mse", held_mse);
    rec.metrics.emplace_back("steps", static_cast<double>(steps_used));
    rec.wall_s = now_s() - t0;
    return rec;
}

} // namespace signeq
