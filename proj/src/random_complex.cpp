#include "cmrf/error.hpp"
#include "cmrf/simplicial_complex.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>

namespace cmrf {

namespace {

struct Graph {
    std::size_t n = 0;
    std::vector<char> adjacent;  // n*n
    std::vector<Edge> edges;

    bool has(std::size_t a, std::size_t b) const { return adjacent[a * n + b] != 0; }
};

Graph sample_er_graph(std::size_t n, double p, std::mt19937_64& rng)
{
    std::bernoulli_distribution coin(p);
    Graph g;
    g.n = n;
    g.adjacent.assign(n * n, 0);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (coin(rng)) {
                g.adjacent[a * n + b] = g.adjacent[b * n + a] = 1;
                g.edges.push_back({static_cast<VertexId>(a), static_cast<VertexId>(b)});
            }
        }
    }
    return g;
}

std::vector<Triangle> three_cliques(const Graph& g)
{
    std::vector<Triangle> out;
    for (const auto& e : g.edges) {
        const auto a = static_cast<std::size_t>(e[0]);
        const auto b = static_cast<std::size_t>(e[1]);
        for (std::size_t c = b + 1; c < g.n; ++c) {
            if (g.has(a, c) && g.has(b, c)) {
                out.push_back({e[0], e[1], static_cast<VertexId>(c)});
            }
        }
    }
    return out;
}

}  // namespace

SimplicialComplex2 random_2sc(const RandomComplexOptions& options, std::uint64_t seed)
{
    const std::size_t n = options.num_vertices;
    const double p = options.edge_probability;
    if (n < 3) {
        throw std::invalid_argument("random_2sc needs at least 3 vertices");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("edge probability must lie in [0, 1]");
    }

    const std::size_t max_edges = n * (n - 1) / 2;
    if (options.target_edges) {
        const std::size_t target = *options.target_edges;
        if (target > max_edges || (p == 0.0 && target > 0) || (p == 1.0 && target != max_edges)) {
            throw GenerationFailed("edge target " + std::to_string(target) +
                                   " is unreachable with " + std::to_string(n) +
                                   " vertices and probability " + std::to_string(p));
        }
    }

    std::vector<VertexId> vertices(n);
    for (std::size_t i = 0; i < n; ++i) {
        vertices[i] = static_cast<VertexId>(i);
    }

    std::mt19937_64 rng(seed);
    for (std::size_t attempt = 0; attempt < options.max_graph_attempts; ++attempt) {
        Graph g = sample_er_graph(n, p, rng);
        if (options.target_edges && g.edges.size() != *options.target_edges) {
            continue;
        }
        const std::vector<Triangle> cliques = three_cliques(g);
        if (options.exact_triangles && cliques.size() < options.triangle_budget) {
            continue;
        }
        const std::size_t count = std::min(options.triangle_budget, cliques.size());
        // With every clique selected there is only one subset to try.
        const std::size_t selections = count == cliques.size() ? 1 : options.selections_per_graph;

        for (std::size_t s = 0; s < selections; ++s) {
            std::vector<Triangle> chosen;
            chosen.reserve(count);
            std::sample(cliques.begin(), cliques.end(), std::back_inserter(chosen), count, rng);

            SimplicialComplex2 complex = build_complex(vertices, g.edges, std::move(chosen));
            if (options.require_trivial_homology &&
                !homology(incidence(complex)).trivial_first_homology()) {
                continue;
            }
            return complex;
        }
    }
    throw GenerationFailed("no admissible complex after " +
                           std::to_string(options.max_graph_attempts) + " graph samples");
}

}  // namespace cmrf
