#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace causalsem {

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Endpoint mark of an edge. `none` means the pair is not adjacent.
enum class Mark : std::uint8_t { none = 0, tail, arrow, circle };

enum class GraphKind { dag, cpdag, pag, weighted_dag };

std::string to_string(Mark m);
std::string to_string(GraphKind k);
Mark mark_from_string(const std::string& s);
GraphKind graph_kind_from_string(const std::string& s);

struct Edge {
    std::size_t a = 0;
    std::size_t b = 0;
    Mark mark_a = Mark::tail;
    Mark mark_b = Mark::arrow;
    std::optional<double> weight;
};

/// Graph over named nodes with at most one edge per unordered pair; each edge
/// carries a mark at both endpoints. Covers DAGs, CPDAGs, PAGs and weighted DAGs.
class MixedGraph {
public:
    MixedGraph() = default;
    explicit MixedGraph(std::vector<std::string> nodes, GraphKind kind = GraphKind::dag);

    std::size_t size() const { return nodes_.size(); }
    const std::vector<std::string>& nodes() const { return nodes_; }
    const std::string& name(std::size_t i) const { return nodes_.at(i); }
    std::size_t index_of(const std::string& name) const;
    std::optional<std::size_t> find(const std::string& name) const;

    GraphKind kind() const { return kind_; }
    void set_kind(GraphKind k) { kind_ = k; }

    /// Mark at `at` on the edge between `at` and `other`.
    Mark mark(std::size_t at, std::size_t other) const { return marks_[other * size() + at]; }
    bool adjacent(std::size_t i, std::size_t j) const { return mark(i, j) != Mark::none; }
    bool directed(std::size_t from, std::size_t to) const {
        return mark(from, to) == Mark::tail && mark(to, from) == Mark::arrow;
    }
    bool undirected(std::size_t i, std::size_t j) const {
        return mark(i, j) == Mark::tail && mark(j, i) == Mark::tail;
    }
    bool bidirected(std::size_t i, std::size_t j) const {
        return mark(i, j) == Mark::arrow && mark(j, i) == Mark::arrow;
    }

    void set_edge(std::size_t i, std::size_t j, Mark at_i, Mark at_j);
    void add_directed(std::size_t from, std::size_t to) { set_edge(from, to, Mark::tail, Mark::arrow); }
    void add_undirected(std::size_t i, std::size_t j) { set_edge(i, j, Mark::tail, Mark::tail); }
    void add_bidirected(std::size_t i, std::size_t j) { set_edge(i, j, Mark::arrow, Mark::arrow); }
    void add_directed(const std::string& from, const std::string& to) { add_directed(index_of(from), index_of(to)); }
    void remove_edge(std::size_t i, std::size_t j);
    /// Changes one endpoint mark of an existing edge.
    void set_mark(std::size_t at, std::size_t other, Mark m);

    std::optional<double> weight(std::size_t from, std::size_t to) const;
    void set_weight(std::size_t from, std::size_t to, double w);

    std::vector<std::size_t> adjacent_nodes(std::size_t i) const;
    std::vector<std::size_t> parents(std::size_t i) const;
    std::vector<std::size_t> children(std::size_t i) const;
    std::vector<std::size_t> undirected_neighbors(std::size_t i) const;

    /// Edges with a < b, in row-major order.
    std::vector<Edge> edges() const;
    std::size_t edge_count() const;

    bool operator==(const MixedGraph& other) const;

private:
    std::vector<std::string> nodes_;
    GraphKind kind_ = GraphKind::dag;
    std::vector<Mark> marks_;
    std::vector<double> weights_;
};

// ---------------------------------------------------------------------------
// Background knowledge

/// Domain constraints on edge orientation. Tier k+1 nodes may not cause tier k
/// nodes; pairs are (cause, effect) node names.
struct BackgroundKnowledge {
    std::vector<std::vector<std::string>> tiers;
    std::set<std::pair<std::string, std::string>> forbidden;
    std::set<std::pair<std::string, std::string>> required;

    bool empty() const { return tiers.empty() && forbidden.empty() && required.empty(); }
    /// Throws GraphError when required and forbidden overlap or required edges form a cycle.
    void validate() const;
    bool is_forbidden(const std::string& cause, const std::string& effect) const;
    bool is_required(const std::string& cause, const std::string& effect) const;
    /// Stable FNV-1a digest over the canonical text form.
    std::string digest() const;
};

/// Knowledge resolved against a node list for constant-time queries.
class KnowledgeIndex {
public:
    KnowledgeIndex() = default;
    KnowledgeIndex(const BackgroundKnowledge& bk, const std::vector<std::string>& nodes);

    bool empty() const { return empty_; }
    bool forbidden(std::size_t cause, std::size_t effect) const {
        return !empty_ && forbidden_[cause * p_ + effect];
    }
    bool required(std::size_t cause, std::size_t effect) const {
        return !empty_ && required_[cause * p_ + effect];
    }
    bool forbidden_both(std::size_t i, std::size_t j) const { return forbidden(i, j) && forbidden(j, i); }
    /// Tier position, or -1 when the node is in no tier.
    int tier(std::size_t i) const { return empty_ ? -1 : tiers_[i]; }

private:
    bool empty_ = true;
    std::size_t p_ = 0;
    std::vector<bool> forbidden_;
    std::vector<bool> required_;
    std::vector<int> tiers_;
};

/// Edges that contradict the knowledge: a forbidden cause-effect pair whose
/// cause endpoint is not an arrowhead, or a required edge that is missing or
/// not pointed at its effect.
std::vector<std::string> knowledge_violations(const MixedGraph& g, const BackgroundKnowledge& bk);

// ---------------------------------------------------------------------------
// Operations

/// True iff every edge is tail-to-arrow and the directed graph is acyclic.
bool is_dag(const MixedGraph& g);
bool has_directed_path(const MixedGraph& g, std::size_t from, std::size_t to);
/// Topological order of the directed part; smallest index first among ready nodes.
std::vector<std::size_t> topological_order(const MixedGraph& g);
std::vector<std::size_t> descendants(const MixedGraph& g, std::size_t v);
std::vector<std::size_t> ancestors(const MixedGraph& g, std::size_t v);

bool d_separated(const MixedGraph& dag, std::size_t x, std::size_t y, const std::vector<std::size_t>& z);
bool d_separated(const MixedGraph& dag, const std::string& x, const std::string& y,
                 const std::vector<std::string>& z);

struct MeekResult {
    MixedGraph graph;
    std::vector<std::string> conflicts;
};

/// Orients undirected edges from knowledge, then closes under Meek rules 1-4.
MeekResult apply_meek_rules(MixedGraph g, const KnowledgeIndex& knowledge = {});

MixedGraph cpdag_of(const MixedGraph& dag);
MixedGraph consistent_extension(const MixedGraph& cpdag);
std::size_t structural_hamming_distance(const MixedGraph& g1, const MixedGraph& g2);
MixedGraph simplify_by_weight(const MixedGraph& g, double threshold);

// ---------------------------------------------------------------------------
// Serialization

std::string graph_to_json(const MixedGraph& g);
MixedGraph graph_from_json(const std::string& text);
std::string graph_to_dot(const MixedGraph& g, const std::string& title = "causal_graph");

std::string knowledge_to_json(const BackgroundKnowledge& bk);

}  // namespace causalsem
