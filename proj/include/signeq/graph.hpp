#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "signeq/rng.hpp"
#include "signeq/tensor.hpp"

namespace signeq {

using Edge = std::pair<std::size_t, std::size_t>; // stored with first < second
using EdgeList = std::vector<Edge>;

// Simple undirected graph: no self-loops, no duplicate edges.
struct Graph {
    std::size_t n = 0;
    EdgeList edges;

    bool has_edge(std::size_t i, std::size_t j) const;
    void add_edge(std::size_t i, std::size_t j); // throws on self-loop or duplicate
    std::vector<std::size_t> degrees() const;
};

// Generator specs
struct ErSpec { std::size_t n; double p; };
struct BaSpec { std::size_t n; std::size_t m; };
struct CycleSpec { std::size_t len; };

Graph generate_er(const ErSpec& spec, std::uint64_t seed);
// Preferential attachment starting from a complete graph on m nodes.
Graph generate_ba(const BaSpec& spec, std::uint64_t seed);
Graph generate_cycle(const CycleSpec& spec);
// Two disjoint relabeled copies of `base` plus `extra_edges` uniformly random
// new edges over the 2n-node set, sampled without replacement (exact count).
Graph two_copy(const Graph& base, std::size_t extra_edges, std::uint64_t seed);

struct EdgeSplit {
    EdgeList train_pos, val_pos, test_pos;
    EdgeList val_neg, test_neg;
};

// Uniform random partition of the edges into train/val/test positives plus
// rejection-sampled negatives (neg_per_pos per val/test positive).
EdgeSplit split_edges(const Graph& g, double train_ratio, double val_ratio, double test_ratio,
                      std::size_t neg_per_pos, std::uint64_t seed);

// Sample `count` non-edges uniformly, excluding anything in `taken`.
EdgeList sample_negative_edges(const Graph& g, std::size_t count, Rng& rng);

TensorPtr adjacency(const Graph& g); // n x n symmetric 0/1, zero diagonal

// Plain-text edge list: header line "n=<count>", then one "i j" per line.
void write_graph(std::ostream& os, const Graph& g);
Graph read_graph(std::istream& is);

} // namespace signeq
