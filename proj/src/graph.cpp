#include "blocksel/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "blocksel/error.hpp"

namespace blocksel {

Graph::Graph(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
    for (Edge& e : edges_) {
        if (e.u >= n_ || e.v >= n_) throw std::invalid_argument("edge endpoint out of range");
        if (e.u == e.v) throw std::invalid_argument("self-loop in edge set");
        if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

    offsets_.assign(n_ + 1, 0);
    for (const Edge& e : edges_) {
        ++offsets_[e.u + 1];
        ++offsets_[e.v + 1];
    }
    for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
    adj_.resize(offsets_[n_]);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const Edge& e : edges_) {
        adj_[fill[e.u]++] = e.v;
        adj_[fill[e.v]++] = e.u;
    }
    for (std::size_t i = 0; i < n_; ++i) std::sort(adj_.begin() + offsets_[i], adj_.begin() + offsets_[i + 1]);
}

bool Graph::has_edge(node_t i, node_t j) const noexcept {
    if (i >= n_ || j >= n_) return false;
    auto nb = neighbors(i);
    return std::binary_search(nb.begin(), nb.end(), j);
}

namespace {

bool skip_line(const std::string& line, char comment) {
    auto pos = line.find_first_not_of(" \t\r");
    return pos == std::string::npos || line[pos] == comment;
}

}  // namespace

EdgeList load_edge_list(std::istream& in, const EdgeListOptions& options) {
    EdgeList out;
    std::unordered_map<std::string, node_t> index;
    auto lookup = [&](const std::string& id) {
        auto [it, inserted] = index.emplace(id, static_cast<node_t>(out.ids.size()));
        if (inserted) out.ids.push_back(id);
        return it->second;
    };

    std::vector<Edge> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (skip_line(line, options.comment)) continue;
        std::istringstream ss(line);
        std::string a, b, extra;
        if (!(ss >> a >> b) || (ss >> extra)) throw ParseError("expected exactly two node identifiers", lineno);
        node_t u = lookup(a);
        node_t v = lookup(b);
        if (u == v) {
            ++out.self_loops_dropped;
            continue;
        }
        edges.push_back({std::min(u, v), std::max(u, v)});
    }
    if (out.ids.empty()) throw ParseError("edge list is empty");

    const std::size_t raw = edges.size();
    out.graph = Graph(out.ids.size(), std::move(edges));
    out.duplicates_dropped = raw - out.graph.num_edges();
    return out;
}

EdgeList load_edge_list_file(const std::string& path, const EdgeListOptions& options) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open edge list '" + path + "'");
    return load_edge_list(in, options);
}

void write_edge_list(std::ostream& out, const Graph& g, std::span<const std::string> ids) {
    if (!ids.empty() && ids.size() != g.num_nodes()) throw std::invalid_argument("id table size mismatch");
    for (const Edge& e : g.edges()) {
        if (ids.empty())
            out << e.u << ' ' << e.v << '\n';
        else
            out << ids[e.u] << ' ' << ids[e.v] << '\n';
    }
}

std::vector<int> load_labels(std::istream& in, std::span<const std::string> ids) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);

    std::vector<int> labels(ids.size(), 0);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (skip_line(line, '#')) continue;
        std::istringstream ss(line);
        std::string id, extra;
        long label = 0;
        if (!(ss >> id >> label) || (ss >> extra)) throw ParseError("expected \"node_id label\"", lineno);
        if (label < 1) throw ParseError("labels are 1-based positive integers", lineno);
        auto it = index.find(id);
        if (it == index.end()) continue;  // nodes outside the analyzed graph (e.g. dropped by LCC)
        labels[it->second] = static_cast<int>(label);
    }
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == 0) throw ParseError("node '" + ids[i] + "' has no label");
    return labels;
}

std::vector<int> load_labels_file(const std::string& path, std::span<const std::string> ids) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open label file '" + path + "'");
    return load_labels(in, ids);
}

std::vector<std::size_t> connected_components(const Graph& g) {
    const std::size_t n = g.num_nodes();
    constexpr std::size_t unseen = static_cast<std::size_t>(-1);
    std::vector<std::size_t> comp(n, unseen);
    std::vector<node_t> stack;
    std::size_t next = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] != unseen) continue;
        comp[s] = next;
        stack.push_back(static_cast<node_t>(s));
        while (!stack.empty()) {
            node_t v = stack.back();
            stack.pop_back();
            for (node_t w : g.neighbors(v)) {
                if (comp[w] == unseen) {
                    comp[w] = next;
                    stack.push_back(w);
                }
            }
        }
        ++next;
    }
    return comp;
}

Subgraph largest_connected_component(const Graph& g) {
    Subgraph out;
    const std::size_t n = g.num_nodes();
    out.old_to_new.assign(n, -1);
    if (n == 0) return out;

    auto comp = connected_components(g);
    std::vector<std::size_t> sizes(*std::max_element(comp.begin(), comp.end()) + 1, 0);
    for (std::size_t c : comp) ++sizes[c];
    // Components are numbered in order of their smallest member, so the first
    // maximum is the tie winner.
    const std::size_t best = static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());

    for (std::size_t i = 0; i < n; ++i) {
        if (comp[i] == best) {
            out.old_to_new[i] = static_cast<std::int64_t>(out.new_to_old.size());
            out.new_to_old.push_back(static_cast<node_t>(i));
        }
    }
    std::vector<Edge> edges;
    for (const Edge& e : g.edges()) {
        if (comp[e.u] == best)
            edges.push_back({static_cast<node_t>(out.old_to_new[e.u]), static_cast<node_t>(out.old_to_new[e.v])});
    }
    out.graph = Graph(out.new_to_old.size(), std::move(edges));
    return out;
}

std::vector<std::size_t> degrees(const Graph& g) {
    std::vector<std::size_t> deg(g.num_nodes());
    for (std::size_t i = 0; i < deg.size(); ++i) deg[i] = g.degree(static_cast<node_t>(i));
    return deg;
}

double density(const Graph& g) {
    const double n = static_cast<double>(g.num_nodes());
    if (g.num_nodes() < 2) throw std::invalid_argument("density requires at least two nodes");
    return 2.0 * static_cast<double>(g.num_edges()) / (n * (n - 1.0));
}

double avg_degree(const Graph& g) {
    if (g.num_nodes() == 0) throw std::invalid_argument("average degree of an empty node set");
    return 2.0 * static_cast<double>(g.num_edges()) / static_cast<double>(g.num_nodes());
}

}  // namespace blocksel
