#pragma once

#include "contextua/numeric.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace contextua {

using Path = std::vector<std::size_t>;  // node indices, starting at the root

// Connected simple undirected graph with a root. Node indices follow the
// constructor's label order; neighbour lists are sorted by index.
class RootedGraph {
public:
    RootedGraph(std::vector<std::string> labels, std::vector<std::pair<std::size_t, std::size_t>> edges,
                std::size_t root);

    std::size_t size() const { return labels_.size(); }
    std::size_t root() const { return root_; }
    const std::string& label(std::size_t v) const { return labels_.at(v); }
    std::size_t index_of(const std::string& label) const;
    const std::vector<std::size_t>& neighbours(std::size_t v) const { return adjacency_.at(v); }
    bool adjacent(std::size_t v, std::size_t w) const;
    // Sorted (min, max) pairs.
    const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }

    std::size_t degree() const;
    // BFS distance (in edges) from the root.
    const std::vector<std::size_t>& distances() const { return distance_; }
    // Least K such that every node is reached by a path of at most K nodes.
    std::size_t radius() const;

    bool is_path(const Path& p) const;

private:
    std::vector<std::string> labels_;
    std::vector<std::pair<std::size_t, std::size_t>> edges_;
    std::vector<std::vector<std::size_t>> adjacency_;
    std::size_t root_;
    std::vector<std::size_t> distance_;
};

// Nodes (a_1..a_k) in [n]^k, lexicographic order, labels "a1.a2...", root (1..1).
RootedGraph hypergrid(std::size_t n, std::size_t k);
RootedGraph line(std::size_t n);
// Nodes (i, j), 1 <= i <= depth, 1 <= j <= k^(i-1), labels "i.j", root (1,1).
RootedGraph kary_tree(std::size_t k, std::size_t depth);

struct PathDistribution {
    std::vector<Prob> weights;
    std::vector<Path> paths;
};

// One lexicographically least minimal path per node, each with weight 1/|V|.
PathDistribution min_path_distribution(const RootedGraph& g);

// Checks root start, non-repetition, edge steps, endpoint uniformity and
// the radius length bound; returns an empty string when all hold.
std::string check_path_distribution(const RootedGraph& g, const PathDistribution& d);

}  // namespace contextua
