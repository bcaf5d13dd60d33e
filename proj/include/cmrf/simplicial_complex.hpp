#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace cmrf {

using VertexId = std::int64_t;
using Edge = std::array<VertexId, 2>;
using Triangle = std::array<VertexId, 3>;

/// Oriented 2-dimensional simplicial complex in canonical form.
///
/// Vertices are sorted ascending. Every edge is stored as (tail, head) with
/// tail < head and the edge list is lexicographic; every triangle is stored
/// with ascending vertex ids and the triangle list is lexicographic. These
/// orderings define the indexing of all vertex, edge and triangle signals.
/// Instances are immutable and can only be produced by build_complex().
class SimplicialComplex2 {
public:
    const std::vector<VertexId>& vertices() const noexcept { return vertices_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const std::vector<Triangle>& triangles() const noexcept { return triangles_; }

    std::size_t num_vertices() const noexcept { return vertices_.size(); }
    std::size_t num_edges() const noexcept { return edges_.size(); }
    std::size_t num_triangles() const noexcept { return triangles_.size(); }
    static constexpr int dimension() noexcept { return 2; }

    /// Position of a vertex id in vertices(), if present.
    std::optional<std::size_t> vertex_index(VertexId v) const;
    /// Position of the edge {a, b} (either orientation) in edges(), if present.
    std::optional<std::size_t> edge_index(VertexId a, VertexId b) const;

    friend bool operator==(const SimplicialComplex2&, const SimplicialComplex2&) = default;

private:
    friend SimplicialComplex2 build_complex(std::vector<VertexId>, std::vector<Edge>,
                                            std::vector<Triangle>);

    std::vector<VertexId> vertices_;
    std::vector<Edge> edges_;
    std::vector<Triangle> triangles_;
};

/// Validates and canonicalizes raw simplex lists.
///
/// Throws DegenerateSimplex for a repeated vertex inside a simplex,
/// DuplicateSimplex when a simplex is listed twice (in any orientation) and
/// ClosureViolation when a face of an edge or triangle is missing.
SimplicialComplex2 build_complex(std::vector<VertexId> vertices, std::vector<Edge> edges,
                                 std::vector<Triangle> triangles);

/// Signed incidence matrices. b1 is |V|x|E| and b2 is |E|x|T|; rows index the
/// lower-order simplices.
struct IncidencePair {
    Eigen::MatrixXi b1;
    Eigen::MatrixXi b2;

    std::size_t num_vertices() const noexcept { return static_cast<std::size_t>(b1.rows()); }
    std::size_t num_edges() const noexcept { return static_cast<std::size_t>(b1.cols()); }
    std::size_t num_triangles() const noexcept { return static_cast<std::size_t>(b2.cols()); }
};

IncidencePair incidence(const SimplicialComplex2& complex);

struct HodgeLaplacians {
    Eigen::MatrixXd l0;       // b1 b1^T
    Eigen::MatrixXd l1_down;  // b1^T b1
    Eigen::MatrixXd l1_up;    // b2 b2^T
    Eigen::MatrixXd l2;       // b2^T b2

    Eigen::MatrixXd l1() const { return l1_down + l1_up; }
};

HodgeLaplacians hodge_laplacians(const IncidencePair& inc);

struct HodgeComponents {
    Eigen::VectorXd irrotational;  // in im(b1^T)
    Eigen::VectorXd solenoidal;    // in im(b2)
    Eigen::VectorXd harmonic;      // in ker(L1)
};

/// Orthogonal projections of an edge signal onto the three Hodge subspaces.
/// Singular values below 1e-12 relative to the largest are treated as zero.
HodgeComponents hodge_decompose(const IncidencePair& inc, const Eigen::VectorXd& x);

/// Ranks and Betti numbers of the complex.
struct HomologySummary {
    std::size_t rank_b1 = 0;
    std::size_t rank_b2 = 0;
    std::size_t betti0 = 0;
    std::size_t betti1 = 0;  // dim ker(L1)
    std::size_t betti2 = 0;

    bool trivial_first_homology() const noexcept { return betti1 == 0; }
};

HomologySummary homology(const IncidencePair& inc);

/// Adjacency lists over the edge set; neighbors of each edge are sorted.
struct EdgeAdjacency {
    std::vector<std::vector<std::size_t>> neighbors;

    std::size_t size() const noexcept { return neighbors.size(); }
    bool linked(std::size_t i, std::size_t j) const;
    std::size_t num_links() const;
};

/// Edges are linked iff they share a vertex.
EdgeAdjacency line_graph(const SimplicialComplex2& complex);

/// Edges are linked iff they are faces of a common triangle.
EdgeAdjacency upper_adjacency(const SimplicialComplex2& complex);

struct RandomComplexOptions {
    std::size_t num_vertices = 10;
    double edge_probability = 0.5;
    std::size_t triangle_budget = 0;
    /// When set, graphs are resampled until they have exactly this many edges.
    std::optional<std::size_t> target_edges;
    /// When false, graphs with fewer 3-cliques than the budget are accepted and
    /// all of their cliques become triangles. When true such graphs are resampled.
    bool exact_triangles = true;
    bool require_trivial_homology = true;
    std::size_t max_graph_attempts = 20000;
    std::size_t selections_per_graph = 32;
};

/// Samples an Erdos-Renyi graph and fills a uniformly chosen subset of its
/// 3-cliques. Deterministic for a given seed. Throws GenerationFailed when the
/// retry bound is exhausted.
SimplicialComplex2 random_2sc(const RandomComplexOptions& options, std::uint64_t seed);

}  // namespace cmrf
