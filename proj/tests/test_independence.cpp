#include <doctest.h>

#include "support/oracles.hpp"

#include "cmrf/cmrf_model.hpp"
#include "cmrf/error.hpp"
#include "cmrf/experiment.hpp"
#include "cmrf/independence.hpp"

#include <random>

using namespace cmrf;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Model {
    SimplicialComplex2 complex;
    IncidencePair inc;
    SgmParams params;
    CmrfGraph graph;
    EdgePrecision prec;
};

Model make_model(SimplicialComplex2 c, VectorXd d_v, VectorXd d_t)
{
    IncidencePair inc = incidence(c);
    SgmParams p{min_valid_k(inc, d_v, d_t), std::move(d_v), std::move(d_t)};
    CmrfGraph g = build_cmrf(inc, p);
    EdgePrecision prec = build_precision(inc, p);
    return {std::move(c), std::move(inc), std::move(p), std::move(g), std::move(prec)};
}

// Six vertices, seven edges, triangles {1,2,3} and {3,4,5}, pendant edge (5,6).
// Edges in canonical order: e1=(1,2) e2=(1,3) e3=(2,3) e4=(3,4) e5=(3,5) e6=(4,5) e7=(5,6).
Model two_triangle_model()
{
    auto c = build_complex({1, 2, 3, 4, 5, 6}, {{1, 2}, {1, 3}, {2, 3}, {3, 4}, {3, 5}, {4, 5}, {5, 6}},
                           {{1, 2, 3}, {3, 4, 5}});
    VectorXd d_v(6);
    d_v << 0, 0, 1.5, 0.7, 2.0, 0;
    return make_model(std::move(c), d_v, Eigen::Vector2d(1.2, 3.0));
}

Model sparse_table1_model(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    auto c = random_2sc(ExperimentConfig::table1_complex_options(), rng());
    VectorXd d_v = oracle::sparse_coefficients(c.num_vertices(), 0.5, rng);
    VectorXd d_t = oracle::sparse_coefficients(c.num_triangles(), 0.5, rng);
    return make_model(std::move(c), d_v, d_t);
}

oracle::Adjacency adjacency(const std::vector<Link>& links, std::size_t n)
{
    oracle::Adjacency a(n, std::vector<char>(n, 0));
    for (const auto& [i, j] : links) {
        a[i][j] = a[j][i] = 1;
    }
    return a;
}

CmrfGraph random_graph(std::size_t n, double p_lower, double p_upper, std::mt19937_64& rng)
{
    std::bernoulli_distribution lo(p_lower), up(p_upper);
    std::vector<Link> lower, upper;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (lo(rng)) lower.emplace_back(i, j);
            if (up(rng)) upper.emplace_back(i, j);
        }
    }
    return CmrfGraph(n, lower, upper);
}

}  // namespace

TEST_CASE("graph separation on a path")
{
    const CmrfGraph path(3, {{0, 1}}, {{1, 2}});
    CHECK(is_graph_separated(path, {{0}, {2}, {1}}));
    CHECK_FALSE(is_graph_separated(path, {{0}, {2}, {}}));
    CHECK_FALSE(is_color_separated(path, {0}, {1}));
    // The only route changes color at node 1.
    CHECK(is_color_separated(path, {0}, {2}));
}

TEST_CASE("directly linked nodes are never separated")
{
    const CmrfGraph g(4, {{0, 1}, {1, 2}, {2, 3}}, {});
    CHECK_FALSE(is_graph_separated(g, {{0}, {1}, {2, 3}}));
    CHECK_FALSE(is_graph_separated(g, {{0}, {1}, {}}));
}

TEST_CASE("queries are validated")
{
    const CmrfGraph g(4, {{0, 1}}, {});
    CHECK_THROWS_AS(is_graph_separated(g, {{0}, {0}, {}}), OverlappingSets);
    CHECK_THROWS_AS(is_graph_separated(g, {{0}, {1}, {1}}), OverlappingSets);
    CHECK_THROWS_AS(is_color_separated(g, {2}, {2}), OverlappingSets);
    CHECK_THROWS_AS(is_graph_separated(g, {{0}, {7}, {}}), DimensionMismatch);
    CHECK(is_graph_separated(g, {{}, {1}, {}}));
    CHECK(is_color_separated(g, {0}, {}));
}

TEST_CASE("filled triangle with an active triangle: monochromatic upper path")
{
    const auto m = make_model(build_complex({1, 2, 3}, {{1, 2}, {1, 3}, {2, 3}}, {{1, 2, 3}}),
                              VectorXd::Zero(3), VectorXd::Ones(1));
    CHECK_FALSE(is_color_separated(m.graph, {0}, {2}));
    CHECK_THROWS_AS(verify_marginal_independence(m.prec, m.graph, {0}, {2}), NotColorSeparated);
}

TEST_CASE("two-triangle complex: the first edge is independent of the far side")
{
    const auto m = two_triangle_model();
    const EdgeSet far{3, 4, 5, 6};
    CHECK(is_color_separated(m.graph, {0}, far));
    // Color separation is not graph separation: a bichromatic path exists.
    CHECK_FALSE(is_graph_separated(m.graph, {{0}, far, {}}));

    const auto report = verify_marginal_independence(m.prec, m.graph, {0}, far);
    CHECK(report.passed);
    CHECK_FALSE(report.vacuous);
    CHECK(report.max_abs <= report.tolerance);
    CHECK(report.margin() >= 0.0);

    // The near side is coupled through the lower links at vertex 3.
    CHECK_FALSE(is_color_separated(m.graph, {1}, {3}));
    const MatrixXd sigma = covariance(m.prec);
    CHECK(std::abs(sigma(1, 3)) > 1e-3);
}

TEST_CASE("diagonal model: every pair is separated and uncorrelated")
{
    const auto m = make_model(build_complex({1, 2, 3}, {{1, 2}, {1, 3}, {2, 3}}, {{1, 2, 3}}),
                              VectorXd::Zero(3), VectorXd::Zero(1));
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = i + 1; j < 3; ++j) {
            CHECK(is_color_separated(m.graph, {i}, {j}));
            const auto r = verify_marginal_independence(m.prec, m.graph, {i}, {j});
            CHECK(r.max_abs == 0.0);
            CHECK(r.passed);
        }
    }
}

TEST_CASE("vacuous reports")
{
    const auto m = two_triangle_model();
    const auto r = verify_marginal_independence(m.prec, m.graph, {}, {3});
    CHECK(r.vacuous);
    CHECK(r.passed);
    const auto c = verify_conditional_independence(m.prec, m.graph, {{2}, {}, {3}});
    CHECK(c.vacuous);
}

TEST_CASE("pairwise Markov: zero precision entry, everything else conditioned")
{
    const auto m = sparse_table1_model(4);
    const std::size_t n = m.prec.num_edges();
    std::size_t checked = 0;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (m.graph.has_link(a, b)) continue;
            EdgeSet rest;
            for (std::size_t s = 0; s < n; ++s) {
                if (s != a && s != b) rest.push_back(s);
            }
            const auto r = verify_conditional_independence(m.prec, m.graph, {{a}, {b}, rest});
            CHECK(r.passed);
            ++checked;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("disconnected components are uncorrelated without conditioning")
{
    const auto m = make_model(build_complex({0, 1, 2, 3, 4, 5},
                                            {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}},
                                            {{0, 1, 2}, {3, 4, 5}}),
                              VectorXd::Ones(6), Eigen::Vector2d(2, 1));
    const SeparationQuery q{{0, 1}, {3, 5}, {}};
    CHECK(is_graph_separated(m.graph, q));
    const auto r = verify_conditional_independence(m.prec, m.graph, q);
    CHECK(r.passed);
    CHECK(r.max_abs < 1e-15);
    CHECK_THROWS_AS(verify_conditional_independence(m.prec, m.graph, {{0}, {1}, {}}), NotSeparated);
}

TEST_CASE("repeated conditioning indices do not break the Schur complement")
{
    const CmrfGraph path(3, {{0, 1}, {1, 2}}, {});
    MatrixXd omega(3, 3);
    omega << 2, -0.5, 0,
            -0.5, 2, -0.5,
             0, -0.5, 2;
    const MatrixXd sigma = omega.inverse();
    const auto once = verify_conditional_independence(sigma, path, {{0}, {2}, {1}});
    const auto twice = verify_conditional_independence(sigma, path, {{0}, {2}, {1, 1}});
    CHECK(once.passed);
    CHECK(twice.passed);
    CHECK(twice.max_abs == doctest::Approx(once.max_abs));
    CHECK_THROWS_AS(verify_conditional_independence(MatrixXd::Identity(4, 4), path, {{0}, {2}, {1}}),
                    DimensionMismatch);
}

TEST_CASE("deciders agree with path enumeration on small random graphs")
{
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        std::mt19937_64 rng(seed);
        const std::size_t n = 2 + seed % 6;
        const auto g = random_graph(n, 0.3, 0.3, rng);
        std::vector<Link> both = g.lower_links();
        both.insert(both.end(), g.upper_links().begin(), g.upper_links().end());
        const auto any_paths = oracle::all_paths(adjacency(both, n));
        const auto lo_paths = oracle::all_paths(adjacency(g.lower_links(), n));
        const auto up_paths = oracle::all_paths(adjacency(g.upper_links(), n));

        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (a == b) continue;
                CHECK(is_color_separated(g, {a}, {b}) == oracle::color_separated(lo_paths, up_paths, {a}, {b}));
                for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
                    if (mask & ((1u << a) | (1u << b))) continue;
                    EdgeSet s;
                    for (std::size_t i = 0; i < n; ++i) {
                        if (mask & (1u << i)) s.push_back(i);
                    }
                    CHECK(is_graph_separated(g, {{a}, {b}, s}) == oracle::graph_separated(any_paths, {a}, {b}, s));
                }
            }
        }
    }
}

TEST_CASE("adding links never creates separation")
{
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 7;
        const auto g = random_graph(n, 0.2, 0.2, rng);
        std::uniform_int_distribution<std::size_t> node(0, n - 1);
        std::size_t i = node(rng), j = node(rng);
        if (i == j) j = (i + 1) % n;
        auto lower = g.lower_links();
        auto upper = g.upper_links();
        (trial % 2 ? lower : upper).emplace_back(std::min(i, j), std::max(i, j));
        const CmrfGraph denser(n, lower, upper);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                if (!is_color_separated(g, {a}, {b})) {
                    CHECK_FALSE(is_color_separated(denser, {a}, {b}));
                }
                for (std::size_t s = 0; s < n; ++s) {
                    if (s == a || s == b) continue;
                    if (!is_graph_separated(g, {{a}, {b}, {s}})) {
                        CHECK_FALSE(is_graph_separated(denser, {{a}, {b}, {s}}));
                    }
                }
            }
        }
    }
}

TEST_CASE("random sparse models: separated singleton queries pass")
{
    std::size_t marginal = 0, conditional = 0;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const auto m = sparse_table1_model(seed);
        const MatrixXd sigma = covariance(m.prec);
        const std::size_t n = m.prec.num_edges();
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                if (is_color_separated(m.graph, {a}, {b})) {
                    CHECK(verify_marginal_independence(sigma, m.graph, {a}, {b}).passed);
                    ++marginal;
                }
                for (std::size_t s1 = 0; s1 < n; ++s1) {
                    for (std::size_t s2 = s1 + 1; s2 < n; ++s2) {
                        if (s1 == a || s1 == b || s2 == a || s2 == b) continue;
                        const SeparationQuery q{{a}, {b}, {s1, s2}};
                        if (is_graph_separated(m.graph, q)) {
                            CHECK(verify_conditional_independence(sigma, m.graph, q).passed);
                            ++conditional;
                        }
                    }
                }
            }
        }
    }
    CHECK(marginal > 0);
    CHECK(conditional > 0);
}
