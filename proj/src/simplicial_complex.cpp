#include "cmrf/simplicial_complex.hpp"

#include "cmrf/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <type_traits>

namespace cmrf {

namespace {

std::string describe(const Edge& e)
{
    std::ostringstream os;
    os << "(" << e[0] << ", " << e[1] << ")";
    return os.str();
}

std::string describe(const Triangle& t)
{
    std::ostringstream os;
    os << "(" << t[0] << ", " << t[1] << ", " << t[2] << ")";
    return os.str();
}

template <typename T>
void reject_adjacent_duplicates(const std::vector<T>& sorted, const char* kind)
{
    auto it = std::adjacent_find(sorted.begin(), sorted.end());
    if (it != sorted.end()) {
        if constexpr (std::is_same_v<T, VertexId>) {
            throw DuplicateSimplex(std::string("duplicate ") + kind + " " + std::to_string(*it));
        } else {
            throw DuplicateSimplex(std::string("duplicate ") + kind + " " + describe(*it));
        }
    }
}

// Orthonormal basis of the column space, via thin SVD.
Eigen::MatrixXd column_space_basis(const Eigen::MatrixXd& a)
{
    if (a.cols() == 0 || a.rows() == 0) {
        return Eigen::MatrixXd(a.rows(), 0);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double cutoff = 1e-12 * sv(0);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff) {
        ++rank;
    }
    return svd.matrixU().leftCols(rank);
}

std::size_t numeric_rank(const Eigen::MatrixXi& m)
{
    if (m.size() == 0) {
        return 0;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m.cast<double>());
    return static_cast<std::size_t>(lu.rank());
}

}  // namespace

std::optional<std::size_t> SimplicialComplex2::vertex_index(VertexId v) const
{
    auto it = std::lower_bound(vertices_.begin(), vertices_.end(), v);
    if (it == vertices_.end() || *it != v) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - vertices_.begin());
}

std::optional<std::size_t> SimplicialComplex2::edge_index(VertexId a, VertexId b) const
{
    const Edge key{std::min(a, b), std::max(a, b)};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
    if (it == edges_.end() || *it != key) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - edges_.begin());
}

SimplicialComplex2 build_complex(std::vector<VertexId> vertices, std::vector<Edge> edges,
                                 std::vector<Triangle> triangles)
{
    SimplicialComplex2 out;

    std::sort(vertices.begin(), vertices.end());
    reject_adjacent_duplicates(vertices, "vertex");
    out.vertices_ = std::move(vertices);

    for (auto& e : edges) {
        if (e[0] == e[1]) {
            throw DegenerateSimplex("edge " + describe(e) + " repeats a vertex");
        }
        if (e[0] > e[1]) {
            std::swap(e[0], e[1]);
        }
        for (VertexId v : e) {
            if (!out.vertex_index(v)) {
                throw ClosureViolation("edge " + describe(e) + " uses vertex " + std::to_string(v) +
                                       " which is not in the vertex set");
            }
        }
    }
    std::sort(edges.begin(), edges.end());
    reject_adjacent_duplicates(edges, "edge");
    out.edges_ = std::move(edges);

    for (auto& t : triangles) {
        std::sort(t.begin(), t.end());
        if (t[0] == t[1] || t[1] == t[2]) {
            throw DegenerateSimplex("triangle " + describe(t) + " repeats a vertex");
        }
        const Edge faces[3] = {{t[0], t[1]}, {t[0], t[2]}, {t[1], t[2]}};
        for (const auto& f : faces) {
            if (!out.edge_index(f[0], f[1])) {
                throw ClosureViolation("triangle " + describe(t) + " is missing its edge " +
                                       describe(f));
            }
        }
    }
    std::sort(triangles.begin(), triangles.end());
    reject_adjacent_duplicates(triangles, "triangle");
    out.triangles_ = std::move(triangles);

    return out;
}

IncidencePair incidence(const SimplicialComplex2& complex)
{
    const auto nv = static_cast<Eigen::Index>(complex.num_vertices());
    const auto ne = static_cast<Eigen::Index>(complex.num_edges());
    const auto nt = static_cast<Eigen::Index>(complex.num_triangles());

    IncidencePair inc;
    inc.b1 = Eigen::MatrixXi::Zero(nv, ne);
    inc.b2 = Eigen::MatrixXi::Zero(ne, nt);

    for (Eigen::Index j = 0; j < ne; ++j) {
        const auto& e = complex.edges()[static_cast<std::size_t>(j)];
        inc.b1(static_cast<Eigen::Index>(*complex.vertex_index(e[0])), j) = -1;
        inc.b1(static_cast<Eigen::Index>(*complex.vertex_index(e[1])), j) = +1;
    }

    // boundary of [a,b,c] = [b,c] - [a,c] + [a,b]
    for (Eigen::Index j = 0; j < nt; ++j) {
        const auto& t = complex.triangles()[static_cast<std::size_t>(j)];
        inc.b2(static_cast<Eigen::Index>(*complex.edge_index(t[1], t[2])), j) = +1;
        inc.b2(static_cast<Eigen::Index>(*complex.edge_index(t[0], t[2])), j) = -1;
        inc.b2(static_cast<Eigen::Index>(*complex.edge_index(t[0], t[1])), j) = +1;
    }
    return inc;
}

HodgeLaplacians hodge_laplacians(const IncidencePair& inc)
{
    const Eigen::MatrixXd b1 = inc.b1.cast<double>();
    const Eigen::MatrixXd b2 = inc.b2.cast<double>();
    HodgeLaplacians out;
    out.l0 = b1 * b1.transpose();
    out.l1_down = b1.transpose() * b1;
    out.l1_up = b2 * b2.transpose();
    out.l2 = b2.transpose() * b2;
    return out;
}

HodgeComponents hodge_decompose(const IncidencePair& inc, const Eigen::VectorXd& x)
{
    if (x.size() != static_cast<Eigen::Index>(inc.num_edges())) {
        throw DimensionMismatch("edge signal has length " + std::to_string(x.size()) +
                                ", complex has " + std::to_string(inc.num_edges()) + " edges");
    }
    const Eigen::MatrixXd grad = inc.b1.cast<double>().transpose();
    const Eigen::MatrixXd curl_adj = inc.b2.cast<double>();

    const Eigen::MatrixXd q_irr = column_space_basis(grad);
    const Eigen::MatrixXd q_sol = column_space_basis(curl_adj);

    HodgeComponents out;
    out.irrotational = q_irr * (q_irr.transpose() * x);
    out.solenoidal = q_sol * (q_sol.transpose() * x);

    out.harmonic = Eigen::VectorXd::Zero(x.size());
    if (x.size() > 0) {
        const Eigen::MatrixXd l1 = grad * grad.transpose() + curl_adj * curl_adj.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(l1);
        const auto& lambda = eig.eigenvalues();
        const double cutoff = 1e-12 * std::max(lambda.cwiseAbs().maxCoeff(), 1.0);
        for (Eigen::Index i = 0; i < lambda.size(); ++i) {
            if (std::abs(lambda(i)) <= cutoff) {
                const auto v = eig.eigenvectors().col(i);
                out.harmonic += v * v.dot(x);
            }
        }
    }
    return out;
}

HomologySummary homology(const IncidencePair& inc)
{
    HomologySummary h;
    h.rank_b1 = numeric_rank(inc.b1);
    h.rank_b2 = numeric_rank(inc.b2);
    h.betti0 = inc.num_vertices() - h.rank_b1;
    h.betti1 = inc.num_edges() - h.rank_b1 - h.rank_b2;
    h.betti2 = inc.num_triangles() - h.rank_b2;
    return h;
}

bool EdgeAdjacency::linked(std::size_t i, std::size_t j) const
{
    const auto& n = neighbors.at(i);
    return std::binary_search(n.begin(), n.end(), j);
}

std::size_t EdgeAdjacency::num_links() const
{
    std::size_t total = 0;
    for (const auto& n : neighbors) {
        total += n.size();
    }
    return total / 2;
}

namespace {

void link(EdgeAdjacency& adj, std::size_t i, std::size_t j)
{
    adj.neighbors[i].push_back(j);
    adj.neighbors[j].push_back(i);
}

void finalize(EdgeAdjacency& adj)
{
    for (auto& n : adj.neighbors) {
        std::sort(n.begin(), n.end());
        n.erase(std::unique(n.begin(), n.end()), n.end());
    }
}

}  // namespace

EdgeAdjacency line_graph(const SimplicialComplex2& complex)
{
    std::vector<std::vector<std::size_t>> incident(complex.num_vertices());
    for (std::size_t e = 0; e < complex.num_edges(); ++e) {
        for (VertexId v : complex.edges()[e]) {
            incident[*complex.vertex_index(v)].push_back(e);
        }
    }
    EdgeAdjacency adj;
    adj.neighbors.resize(complex.num_edges());
    for (const auto& star : incident) {
        for (std::size_t a = 0; a < star.size(); ++a) {
            for (std::size_t b = a + 1; b < star.size(); ++b) {
                link(adj, star[a], star[b]);
            }
        }
    }
    finalize(adj);
    return adj;
}

EdgeAdjacency upper_adjacency(const SimplicialComplex2& complex)
{
    EdgeAdjacency adj;
    adj.neighbors.resize(complex.num_edges());
    for (const auto& t : complex.triangles()) {
        const std::size_t ab = *complex.edge_index(t[0], t[1]);
        const std::size_t ac = *complex.edge_index(t[0], t[2]);
        const std::size_t bc = *complex.edge_index(t[1], t[2]);
        link(adj, ab, ac);
        link(adj, ab, bc);
        link(adj, ac, bc);
    }
    finalize(adj);
    return adj;
}

}  // namespace cmrf
