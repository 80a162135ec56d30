#include "signeq/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace signeq {

namespace {

Edge norm_edge(std::size_t i, std::size_t j) {
    return i < j ? Edge{i, j} : Edge{j, i};
}

std::set<Edge> edge_set(const Graph& g) { return {g.edges.begin(), g.edges.end()}; }

} // namespace

bool Graph::has_edge(std::size_t i, std::size_t j) const {
    const Edge e = norm_edge(i, j);
    return std::find(edges.begin(), edges.end(), e) != edges.end();
}

void Graph::add_edge(std::size_t i, std::size_t j) {
    if (i == j) throw std::invalid_argument("add_edge: self-loop");
    if (i >= n || j >= n) throw std::invalid_argument("add_edge: node out of range");
    const Edge e = norm_edge(i, j);
    if (has_edge(i, j)) throw std::invalid_argument("add_edge: duplicate edge");
    edges.push_back(e);
}

std::vector<std::size_t> Graph::degrees() const {
    std::vector<std::size_t> d(n, 0);
    for (const auto& [i, j] : edges) {
        d[i]++;
        d[j]++;
    }
    return d;
}

Graph generate_er(const ErSpec& spec, std::uint64_t seed) {
    if (spec.p < 0.0 || spec.p > 1.0) throw std::invalid_argument("er: p out of [0,1]");
    Graph g;
    g.n = spec.n;
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < spec.n; i++)
        for (std::size_t j = i + 1; j < spec.n; j++)
            if (u(rng) < spec.p) g.edges.emplace_back(i, j);
    return g;
}

Graph generate_ba(const BaSpec& spec, std::uint64_t seed) {
    if (spec.m == 0 || spec.m >= spec.n) throw std::invalid_argument("ba: need 0 < m < n");
    Graph g;
    g.n = spec.n;
    auto rng = make_rng(seed);
    // seed clique on the first m nodes
    std::vector<std::size_t> targets; // nodes repeated by degree
    for (std::size_t i = 0; i < spec.m; i++)
        for (std::size_t j = i + 1; j < spec.m; j++) {
            g.edges.emplace_back(i, j);
            targets.push_back(i);
            targets.push_back(j);
        }
    std::set<Edge> seen(g.edges.begin(), g.edges.end());
    for (std::size_t v = spec.m; v < spec.n; v++) {
        std::set<std::size_t> chosen;
        std::uniform_int_distribution<std::size_t> pick(0, targets.size() - 1);
        while (chosen.size() < spec.m) chosen.insert(targets[pick(rng)]);
        for (std::size_t t : chosen) {
            g.edges.push_back(norm_edge(v, t));
            seen.insert(g.edges.back());
            targets.push_back(v);
            targets.push_back(t);
        }
    }
    return g;
}

Graph generate_cycle(const CycleSpec& spec) {
    if (spec.len < 3) throw std::invalid_argument("cycle: length must be >= 3");
    Graph g;
    g.n = spec.len;
    for (std::size_t i = 0; i < spec.len; i++)
        g.edges.push_back(norm_edge(i, (i + 1) % spec.len));
    return g;
}

Graph two_copy(const Graph& base, std::size_t extra_edges, std::uint64_t seed) {
    Graph g;
    g.n = 2 * base.n;
    g.edges.reserve(2 * base.edges.size() + extra_edges);
    for (const auto& [i, j] : base.edges) g.edges.emplace_back(i, j);
    for (const auto& [i, j] : base.edges) g.edges.emplace_back(i + base.n, j + base.n);
    std::set<Edge> seen(g.edges.begin(), g.edges.end());
    auto rng = make_rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, g.n - 1);
    std::size_t added = 0;
    while (added < extra_edges) {
        const std::size_t i = pick(rng), j = pick(rng);
        if (i == j) continue;
        const Edge e = norm_edge(i, j);
        if (seen.count(e)) continue; // resample collisions so the count is exact
        seen.insert(e);
        g.edges.push_back(e);
        added++;
    }
    return g;
}

EdgeList sample_negative_edges(const Graph& g, std::size_t count, Rng& rng) {
    const std::set<Edge> existing = edge_set(g);
    const std::size_t max_edges = g.n * (g.n - 1) / 2;
    if (existing.size() + count > max_edges)
        throw std::runtime_error("negative sampling: not enough non-edges");
    std::set<Edge> taken;
    EdgeList out;
    std::uniform_int_distribution<std::size_t> pick(0, g.n - 1);
    std::size_t rejections = 0;
    const std::size_t max_rejections = 100 * (count + 16) + 1000000;
    while (out.size() < count) {
        const std::size_t i = pick(rng), j = pick(rng);
        if (i == j) continue;
        const Edge e = norm_edge(i, j);
        if (existing.count(e) || taken.count(e)) {
            if (++rejections > max_rejections)
                throw std::runtime_error("negative sampling: rejection bound exceeded");
            continue;
        }
        taken.insert(e);
        out.push_back(e);
    }
    return out;
}

EdgeSplit split_edges(const Graph& g, double train_ratio, double val_ratio, double test_ratio,
                      std::size_t neg_per_pos, std::uint64_t seed) {
    if (std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9)
        throw std::invalid_argument("split_edges: ratios must sum to 1");
    auto rng = make_rng(seed);
    EdgeList shuffled = g.edges;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const std::size_t total = shuffled.size();
    const std::size_t n_val = static_cast<std::size_t>(val_ratio * total);
    const std::size_t n_test = static_cast<std::size_t>(test_ratio * total);
    const std::size_t n_train = total - n_val - n_test;
    EdgeSplit split;
    split.train_pos.assign(shuffled.begin(), shuffled.begin() + n_train);
    split.val_pos.assign(shuffled.begin() + n_train, shuffled.begin() + n_train + n_val);
    split.test_pos.assign(shuffled.begin() + n_train + n_val, shuffled.end());
    split.val_neg = sample_negative_edges(g, neg_per_pos * split.val_pos.size(), rng);
    split.test_neg = sample_negative_edges(g, neg_per_pos * split.test_pos.size(), rng);
    return split;
}

TensorPtr adjacency(const Graph& g) {
    auto a = Tensor::zeros({g.n, g.n});
    for (const auto& [i, j] : g.edges) {
        a->at(i, j) = 1.0;
        a->at(j, i) = 1.0;
    }
    return a;
}

void write_graph(std::ostream& os, const Graph& g) {
    os << "n=" << g.n << "\n";
    for (const auto& [i, j] : g.edges) os << i << " " << j << "\n";
}

Graph read_graph(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header.rfind("n=", 0) != 0)
        throw std::runtime_error("read_graph: missing n= header");
    Graph g;
    g.n = std::stoull(header.substr(2));
    std::size_t i, j;
    while (is >> i >> j) g.add_edge(i, j);
    return g;
}

} // namespace signeq
