#include "contextua/graph.hpp"

#include "contextua/error.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace contextua {

RootedGraph::RootedGraph(std::vector<std::string> labels, std::vector<std::pair<std::size_t, std::size_t>> edges,
                         std::size_t root)
    : labels_(std::move(labels)), adjacency_(labels_.size()), root_(root) {
    require(!labels_.empty(), ErrorCode::InvalidArgument, "graph needs at least one node");
    require(root_ < labels_.size(), ErrorCode::InvalidArgument, "root is not a node");
    std::set<std::string> seen(labels_.begin(), labels_.end());
    require(seen.size() == labels_.size(), ErrorCode::LabelCollision, "duplicate node label");
    std::set<std::pair<std::size_t, std::size_t>> unique;
    for (auto [a, b] : edges) {
        require(a < size() && b < size(), ErrorCode::InvalidArgument, "edge references an unknown node");
        require(a != b, ErrorCode::InvalidArgument, "self-loops are not allowed");
        unique.insert({std::min(a, b), std::max(a, b)});
    }
    edges_.assign(unique.begin(), unique.end());
    for (auto [a, b] : edges_) {
        adjacency_[a].push_back(b);
        adjacency_[b].push_back(a);
    }
    for (auto& n : adjacency_) std::sort(n.begin(), n.end());

    const std::size_t unreached = static_cast<std::size_t>(-1);
    distance_.assign(size(), unreached);
    std::deque<std::size_t> queue{root_};
    distance_[root_] = 0;
    while (!queue.empty()) {
        std::size_t v = queue.front();
        queue.pop_front();
        for (std::size_t w : adjacency_[v])
            if (distance_[w] == unreached) {
                distance_[w] = distance_[v] + 1;
                queue.push_back(w);
            }
    }
    require(std::find(distance_.begin(), distance_.end(), unreached) == distance_.end(), ErrorCode::InvalidArgument,
            "rooted graph must be connected");
}

std::size_t RootedGraph::index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    require(it != labels_.end(), ErrorCode::InvalidArgument, "unknown node '" + label + "'");
    return static_cast<std::size_t>(it - labels_.begin());
}

bool RootedGraph::adjacent(std::size_t v, std::size_t w) const {
    const auto& n = adjacency_.at(v);
    return std::binary_search(n.begin(), n.end(), w);
}

std::size_t RootedGraph::degree() const {
    std::size_t d = 0;
    for (const auto& n : adjacency_) d = std::max(d, n.size());
    return d;
}

std::size_t RootedGraph::radius() const { return *std::max_element(distance_.begin(), distance_.end()) + 1; }

bool RootedGraph::is_path(const Path& p) const {
    if (p.empty() || p.front() != root_) return false;
    std::set<std::size_t> seen;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] >= size() || !seen.insert(p[k]).second) return false;
        if (k && !adjacent(p[k - 1], p[k])) return false;
    }
    return true;
}

RootedGraph hypergrid(std::size_t n, std::size_t k) {
    require(n >= 1 && k >= 1, ErrorCode::InvalidArgument, "hypergrid needs n, k >= 1");
    std::vector<std::size_t> radices(k, n);
    std::size_t count = radix_product(radices);
    std::vector<std::string> labels;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t idx = 0; idx < count; ++idx) {
        auto a = radix_digits(idx, radices);
        std::string label;
        for (std::size_t j = 0; j < k; ++j) label += (j ? "." : "") + std::to_string(a[j] + 1);
        labels.push_back(label);
        for (std::size_t j = 0; j < k; ++j)
            if (a[j] + 1 < n) {
                auto b = a;
                ++b[j];
                edges.push_back({idx, radix_index(b, radices)});
            }
    }
    return RootedGraph(std::move(labels), std::move(edges), 0);
}

RootedGraph line(std::size_t n) { return hypergrid(n, 1); }

RootedGraph kary_tree(std::size_t k, std::size_t depth) {
    require(k >= 1 && depth >= 1, ErrorCode::InvalidArgument, "tree needs k, depth >= 1");
    std::vector<std::string> labels;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
    std::size_t width = 1;
    for (std::size_t i = 1; i <= depth; ++i, width *= k)
        for (std::size_t j = 1; j <= width; ++j) {
            index[{i, j}] = labels.size();
            labels.push_back(std::to_string(i) + "." + std::to_string(j));
        }
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (const auto& [node, idx] : index) {
        auto [i, j] = node;
        if (i == depth) continue;
        for (std::size_t c = k * (j - 1) + 1; c <= k * j; ++c) edges.push_back({idx, index.at({i + 1, c})});
    }
    return RootedGraph(std::move(labels), std::move(edges), 0);
}

PathDistribution min_path_distribution(const RootedGraph& g) {
    // Layer by layer, each node keeps the least path over its predecessors.
    std::vector<Path> best(g.size());
    std::vector<std::vector<std::size_t>> layers;
    for (std::size_t v = 0; v < g.size(); ++v) {
        std::size_t d = g.distances()[v];
        if (layers.size() <= d) layers.resize(d + 1);
        layers[d].push_back(v);
    }
    best[g.root()] = {g.root()};
    for (std::size_t d = 1; d < layers.size(); ++d)
        for (std::size_t v : layers[d]) {
            for (std::size_t u : g.neighbours(v)) {
                if (g.distances()[u] + 1 != d) continue;
                Path candidate = best[u];
                candidate.push_back(v);
                if (best[v].empty() || candidate < best[v]) best[v] = std::move(candidate);
            }
        }
    PathDistribution out;
    Prob w(ratio(1, static_cast<long>(g.size())));
    for (std::size_t v = 0; v < g.size(); ++v) {
        out.weights.push_back(w);
        out.paths.push_back(best[v]);
    }
    return out;
}

std::string check_path_distribution(const RootedGraph& g, const PathDistribution& d) {
    if (d.weights.size() != d.paths.size()) return "weights and paths differ in length";
    std::vector<Rational> endpoint(g.size(), 0);
    for (std::size_t k = 0; k < d.paths.size(); ++k) {
        const Path& p = d.paths[k];
        if (!g.is_path(p)) return "entry " + std::to_string(k) + " is not a path from the root";
        if (p.size() > g.radius()) return "entry " + std::to_string(k) + " is longer than the radius";
        endpoint[p.back()] += d.weights[k].to_rational();
    }
    for (std::size_t v = 0; v < g.size(); ++v)
        if (endpoint[v] != ratio(1, static_cast<long>(g.size())))
            return "endpoint marginal at " + g.label(v) + " is " + format_rational(endpoint[v]);
    return "";
}

}  // namespace contextua
