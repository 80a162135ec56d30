#include "signeq/models.hpp"

#include <cmath>
#include <stdexcept>

namespace signeq {

std::vector<TensorPtr> ParamTree::tensors() const {
    std::vector<TensorPtr> out;
    out.reserve(entries.size());
    for (const auto& [name, t] : entries) out.push_back(t);
    return out;
}

std::size_t ParamTree::count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : entries) n += t->size();
    return n;
}

Mlp Mlp::create(const std::vector<std::size_t>& widths, Rng& rng) {
    if (widths.size() < 2) throw std::invalid_argument("Mlp: need at least input and output width");
    Mlp mlp;
    for (std::size_t l = 0; l + 1 < widths.size(); l++) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(widths[l]));
        mlp.weights.push_back(random_uniform(rng, {widths[l], widths[l + 1]}, -bound, bound, true));
        mlp.biases.push_back(random_uniform(rng, {1, widths[l + 1]}, -bound, bound, true));
    }
    return mlp;
}

TensorPtr Mlp::forward(const TensorPtr& x) const {
    if (x->cols() != weights.front()->rows())
        throw std::invalid_argument("Mlp::forward: input width mismatch");
    TensorPtr h = x;
    for (std::size_t l = 0; l < weights.size(); l++) {
        h = add_rowvec(matmul(h, weights[l]), biases[l]);
        if (l + 1 < weights.size()) h = relu(h);
    }
    return h;
}

void Mlp::collect(ParamTree& tree, const std::string& prefix) const {
    for (std::size_t l = 0; l < weights.size(); l++) {
        tree.add(prefix + ".w" + std::to_string(l), weights[l]);
        tree.add(prefix + ".b" + std::to_string(l), biases[l]);
    }
}

std::size_t Mlp::param_count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += w->size();
    for (const auto& b : biases) n += b->size();
    return n;
}

std::size_t Mlp::param_count_for(const std::vector<std::size_t>& widths) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); l++) n += widths[l] * widths[l + 1] + widths[l + 1];
    return n;
}

SignEqElementwise SignEqElementwise::create(std::size_t k, const std::vector<std::size_t>& hidden,
                                            Rng& rng, std::size_t extra_features) {
    std::vector<std::size_t> widths;
    widths.push_back(k + extra_features);
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(k);
    return {Mlp::create(widths, rng)};
}

TensorPtr SignEqElementwise::forward(const TensorPtr& v) const {
    return mul(v, mlp.forward(abs(v)));
}

TensorPtr SignEqElementwise::forward(const TensorPtr& v, const TensorPtr& extra) const {
    return mul(v, mlp.forward(concat_cols(abs(v), extra)));
}

void SignEqElementwise::collect(ParamTree& tree, const std::string& prefix) const {
    mlp.collect(tree, prefix + ".mlp");
}

SignNetElementwise SignNetElementwise::create(std::size_t k, std::size_t channels,
                                              const std::vector<std::size_t>& phi_hidden,
                                              const std::vector<std::size_t>& rho_hidden,
                                              std::size_t d_out, Rng& rng) {
    SignNetElementwise net;
    net.k = k;
    net.channels = channels;
    std::vector<std::size_t> pw{1};
    pw.insert(pw.end(), phi_hidden.begin(), phi_hidden.end());
    pw.push_back(channels);
    std::vector<std::size_t> rw{k * channels};
    rw.insert(rw.end(), rho_hidden.begin(), rho_hidden.end());
    rw.push_back(d_out);
    net.phi = Mlp::create(pw, rng);
    net.rho = Mlp::create(rw, rng);
    return net;
}

TensorPtr SignNetElementwise::forward(const TensorPtr& v) const {
    const std::size_t n = v->rows();
    if (v->cols() != k) throw std::invalid_argument("SignNet: column count mismatch");
    auto flat = reshape(v, {n * k, 1});
    auto agg = add(phi.forward(flat), phi.forward(scale(flat, -1.0))); // even in each entry
    return rho.forward(reshape(agg, {n, k * channels}));
}

void SignNetElementwise::collect(ParamTree& tree, const std::string& prefix) const {
    phi.collect(tree, prefix + ".phi");
    rho.collect(tree, prefix + ".rho");
}

SignNetDense SignNetDense::create(std::size_t n, std::size_t k, std::size_t h,
                                  const std::vector<std::size_t>& phi_hidden,
                                  const std::vector<std::size_t>& rho_hidden, std::size_t n_out,
                                  Rng& rng) {
    SignNetDense net;
    net.k = k;
    net.n_out = n_out;
    std::vector<std::size_t> pw{n};
    pw.insert(pw.end(), phi_hidden.begin(), phi_hidden.end());
    pw.push_back(h);
    std::vector<std::size_t> rw{k * h};
    rw.insert(rw.end(), rho_hidden.begin(), rho_hidden.end());
    rw.push_back(n_out * k);
    net.phi = Mlp::create(pw, rng);
    net.rho = Mlp::create(rw, rng);
    return net;
}

TensorPtr SignNetDense::forward(const TensorPtr& v) const {
    if (v->cols() != k) throw std::invalid_argument("SignNetDense: column count mismatch");
    auto vt = transpose(v); // k x n, one eigenvector per row
    auto agg = add(phi.forward(vt), phi.forward(scale(vt, -1.0))); // k x h
    auto out = rho.forward(reshape(agg, {1, agg->size()}));        // 1 x n_out*k
    return reshape(out, {n_out, k});
}

void SignNetDense::collect(ParamTree& tree, const std::string& prefix) const {
    phi.collect(tree, prefix + ".phi");
    rho.collect(tree, prefix + ".rho");
}

SignEqLayer SignEqLayer::create(std::size_t n, std::size_t k, std::size_t n_out,
                                std::size_t signnet_h, Rng& rng) {
    SignEqLayer layer;
    const double bound = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t j = 0; j < k; j++)
        layer.blocks.blocks.push_back(random_uniform(rng, {n_out, n}, -bound, bound, true));
    layer.signnet = SignNetDense::create(n, k, signnet_h, {signnet_h}, {signnet_h}, n_out, rng);
    return layer;
}

TensorPtr SignEqLayer::forward(const TensorPtr& v) const {
    return mul(columnwise_apply(blocks, v), signnet.forward(v));
}

void SignEqLayer::collect(ParamTree& tree, const std::string& prefix) const {
    for (std::size_t j = 0; j < blocks.blocks.size(); j++)
        tree.add(prefix + ".w" + std::to_string(j), blocks.blocks[j]);
    signnet.collect(tree, prefix + ".signnet");
}

DssSignEqLayer DssSignEqLayer::create(std::size_t k, const std::vector<std::size_t>& hidden,
                                      Rng& rng, std::size_t extra_features) {
    return {SignEqElementwise::create(k, hidden, rng, extra_features),
            SignEqElementwise::create(k, hidden, rng, extra_features)};
}

TensorPtr DssSignEqLayer::complement(const TensorPtr& v) const {
    // complement sum = column total - own row
    auto total = matmul(Tensor::ones({v->rows(), 1}), col_sums(v));
    auto comp = sub(total, v);
    if (mean_complement && v->rows() > 1)
        comp = scale(comp, 1.0 / static_cast<double>(v->rows() - 1));
    return comp;
}

TensorPtr DssSignEqLayer::forward(const TensorPtr& v) const {
    return add(f1.forward(v), f2.forward(complement(v)));
}

TensorPtr DssSignEqLayer::forward(const TensorPtr& v, const TensorPtr& extra) const {
    return add(f1.forward(v, extra), f2.forward(complement(v), extra));
}

TensorPtr DssSignEqLayer::forward_graph(const TensorPtr& v, const SparseMatrix& adj) const {
    if (adj.n_rows != v->rows() || adj.n_cols != v->rows())
        throw std::invalid_argument("DssSignEqLayer: adjacency size mismatch");
    return add(f1.forward(v), f2.forward(spmm(adj, v)));
}

void DssSignEqLayer::collect(ParamTree& tree, const std::string& prefix) const {
    f1.collect(tree, prefix + ".f1");
    f2.collect(tree, prefix + ".f2");
}

TensorPtr pair_decode(DecodeMode mode, const TensorPtr& zi, const TensorPtr& zj, const Mlp* mlp) {
    if (zi->shape != zj->shape) throw std::invalid_argument("pair_decode: width mismatch");
    auto prod = mul(zi, zj);
    if (mode == DecodeMode::dot) return row_sums(prod);
    if (mlp == nullptr) throw std::invalid_argument("pair_decode: mlp_hadamard needs an MLP");
    return mlp->forward(prod);
}

UniversalPairDecoder UniversalPairDecoder::create(std::size_t k,
                                                  const std::vector<std::size_t>& inner_hidden,
                                                  std::size_t h,
                                                  const std::vector<std::size_t>& outer_hidden,
                                                  Rng& rng) {
    UniversalPairDecoder dec;
    std::vector<std::size_t> iw{2 * k};
    iw.insert(iw.end(), inner_hidden.begin(), inner_hidden.end());
    iw.push_back(h);
    std::vector<std::size_t> ow{h};
    ow.insert(ow.end(), outer_hidden.begin(), outer_hidden.end());
    ow.push_back(1);
    dec.inner = Mlp::create(iw, rng);
    dec.outer = Mlp::create(ow, rng);
    return dec;
}

TensorPtr UniversalPairDecoder::forward(const TensorPtr& z) const {
    if (z->rows() != 2) throw std::invalid_argument("UniversalPairDecoder: need exactly 2 rows");
    auto a = slice_rows(z, 0, 1);
    auto b = slice_rows(z, 1, 2);
    auto cross = mul(a, b); // v (.) rev(v) entry, identical for both rows
    auto row0 = concat_cols(mul(a, a), cross);
    auto row1 = concat_cols(mul(b, b), cross);
    // DeepSets over the two rows: order cannot matter
    return outer.forward(add(inner.forward(row0), inner.forward(row1)));
}

void UniversalPairDecoder::collect(ParamTree& tree, const std::string& prefix) const {
    inner.collect(tree, prefix + ".inner");
    outer.collect(tree, prefix + ".outer");
}

std::size_t ModelSpec::predicted_param_count() const {
    auto chain = [](std::vector<std::size_t> w) { return Mlp::param_count_for(w); };
    switch (arch) {
    case Arch::mlp:
        return chain(widths);
    case Arch::signeq_elementwise: {
        std::vector<std::size_t> w{k};
        w.insert(w.end(), widths.begin(), widths.end());
        w.push_back(k);
        return chain(w);
    }
    case Arch::signnet: {
        // widths = {channels, phi_hidden, rho_hidden, d_out}
        if (widths.size() != 4) throw std::invalid_argument("signnet widths layout");
        const auto [c, ph, rh, d_out] = std::tuple{widths[0], widths[1], widths[2], widths[3]};
        return chain({1, ph, c}) + chain({k * c, rh, d_out});
    }
    case Arch::dss_stack: {
        // widths = {n_layers, hidden...}
        if (widths.size() < 2) throw std::invalid_argument("dss_stack widths layout");
        std::vector<std::size_t> w{k};
        w.insert(w.end(), widths.begin() + 1, widths.end());
        w.push_back(k);
        return widths[0] * 2 * chain(w);
    }
    case Arch::signeq_layer_stack: {
        // widths = {n_layers, n, signnet_h}; square layers n x n
        if (widths.size() != 3) throw std::invalid_argument("signeq_layer_stack widths layout");
        const std::size_t layers = widths[0], n = widths[1], h = widths[2];
        const std::size_t per_layer =
            k * n * n + Mlp::param_count_for({n, h, h}) + Mlp::param_count_for({k * h, h, n * k});
        return layers * per_layer;
    }
    case Arch::pair_decoder: {
        std::vector<std::size_t> w{k};
        w.insert(w.end(), widths.begin(), widths.end());
        w.push_back(1);
        return chain(w);
    }
    case Arch::universal_pair_decoder: {
        // widths = {inner_hidden, h, outer_hidden}
        if (widths.size() != 3) throw std::invalid_argument("universal_pair_decoder widths layout");
        return chain({2 * k, widths[0], widths[1]}) + chain({widths[1], widths[2], 1});
    }
    }
    throw std::logic_error("unreachable");
}

void ModelSpec::check_budget() const {
    if (budget && predicted_param_count() > *budget)
        throw std::invalid_argument("ModelSpec: parameter count " +
                                    std::to_string(predicted_param_count()) +
                                    " exceeds budget " + std::to_string(*budget));
}

std::string arch_name(Arch a) {
    switch (a) {
    case Arch::mlp: return "mlp";
    case Arch::signeq_elementwise: return "signeq_elementwise";
    case Arch::signnet: return "signnet";
    case Arch::signeq_layer_stack: return "signeq_layer_stack";
    case Arch::dss_stack: return "dss_stack";
    case Arch::pair_decoder: return "pair_decoder";
    case Arch::universal_pair_decoder: return "universal_pair_decoder";
    }
    throw std::logic_error("unreachable");
}

Arch arch_from_name(const std::string& name) {
    for (Arch a : {Arch::mlp, Arch::signeq_elementwise, Arch::signnet, Arch::signeq_layer_stack,
                   Arch::dss_stack, Arch::pair_decoder, Arch::universal_pair_decoder})
        if (arch_name(a) == name) return a;
    throw std::invalid_argument("unknown architecture: " + name);
}

} // namespace signeq
