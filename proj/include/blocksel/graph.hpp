#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace blocksel {

using node_t = std::uint32_t;

/// Unordered node pair stored with u < v.
struct Edge {
    node_t u;
    node_t v;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Simple undirected graph: sorted unique edge list plus CSR adjacency.
/// Immutable after construction.
class Graph {
public:
    Graph() = default;

    /// Canonicalizes (orders endpoints, sorts, deduplicates) the given pairs.
    /// Throws std::invalid_argument on self-loops or endpoints >= n.
    Graph(std::size_t n, std::vector<Edge> edges);

    std::size_t num_nodes() const noexcept { return n_; }
    std::size_t num_edges() const noexcept { return edges_.size(); }

    std::span<const Edge> edges() const noexcept { return edges_; }
    std::span<const node_t> neighbors(node_t i) const noexcept {
        return {adj_.data() + offsets_[i], adj_.data() + offsets_[i + 1]};
    }
    std::size_t degree(node_t i) const noexcept { return offsets_[i + 1] - offsets_[i]; }
    bool has_edge(node_t i, node_t j) const noexcept;

    friend bool operator==(const Graph& a, const Graph& b) { return a.n_ == b.n_ && a.edges_ == b.edges_; }

private:
    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::size_t> offsets_ = {0};
    std::vector<node_t> adj_;
};

struct EdgeListOptions {
    char comment = '#';
};

/// Result of reading an edge list: the graph plus the identifier <-> index map.
struct EdgeList {
    Graph graph;
    std::vector<std::string> ids;  // ids[index] = identifier from the file
    std::size_t self_loops_dropped = 0;
    std::size_t duplicates_dropped = 0;
};

/// Reads whitespace-separated "u v" lines. Identifiers are arbitrary strings
/// numbered in first-seen order. Blank lines and comment lines are skipped.
/// Throws ParseError on malformed lines or empty input.
EdgeList load_edge_list(std::istream& in, const EdgeListOptions& options = {});
EdgeList load_edge_list_file(const std::string& path, const EdgeListOptions& options = {});

/// Writes one "u v" line per edge in canonical order. When ids is non-empty
/// it must have num_nodes() entries and is used in place of indices.
void write_edge_list(std::ostream& out, const Graph& g, std::span<const std::string> ids = {});

/// Reads "node_id label" lines (1-based labels), returning labels ordered by
/// the index each identifier has in ids. Every node must be labeled.
std::vector<int> load_labels(std::istream& in, std::span<const std::string> ids);
std::vector<int> load_labels_file(const std::string& path, std::span<const std::string> ids);

struct Subgraph {
    Graph graph;
    std::vector<node_t> new_to_old;
    std::vector<std::int64_t> old_to_new;  // -1 for dropped nodes
};

/// Induced subgraph on the largest connected component. Ties go to the
/// component containing the smallest original index.
Subgraph largest_connected_component(const Graph& g);

/// Component id per node (components numbered by smallest member).
std::vector<std::size_t> connected_components(const Graph& g);

std::vector<std::size_t> degrees(const Graph& g);

/// 2|E| / (n(n-1)); throws std::invalid_argument when n < 2.
double density(const Graph& g);

/// 2|E| / n; throws std::invalid_argument when n == 0.
double avg_degree(const Graph& g);

}  // namespace blocksel
