#include <doctest.h>

#include "support/oracles.hpp"

#include "cmrf/cmrf_model.hpp"
#include "cmrf/error.hpp"
#include "cmrf/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace cmrf;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const SimplicialComplex2& filled_triangle()
{
    static const auto c = build_complex({1, 2, 3}, {{1, 2}, {1, 3}, {2, 3}}, {{1, 2, 3}});
    return c;
}

SgmParams params(double k, VectorXd d_v, VectorXd d_t)
{
    return SgmParams{k, std::move(d_v), std::move(d_t)};
}

struct RandomModel {
    SimplicialComplex2 complex;
    IncidencePair inc;
    SgmParams params;
};

RandomModel table1_model(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    RandomModel m{random_2sc(ExperimentConfig::table1_complex_options(), rng()), {}, {}};
    m.inc = incidence(m.complex);
    std::uniform_real_distribution<double> coef(0.2, 5.0);
    m.params.d_v = VectorXd::NullaryExpr(10, [&] { return coef(rng); });
    m.params.d_t = VectorXd::NullaryExpr(12, [&] { return coef(rng); });
    m.params.k = min_valid_k(m.inc, m.params.d_v, m.params.d_t);
    return m;
}

bool contains(const std::vector<Link>& links, Link l)
{
    return std::find(links.begin(), links.end(), l) != links.end();
}

}  // namespace

TEST_CASE("precision of the filled triangle with one active triangle")
{
    const auto inc = incidence(filled_triangle());
    const auto prec = build_precision(inc, params(4.0, VectorXd::Zero(3), VectorXd::Ones(1)));
    MatrixXd expected(3, 3);
    expected << 3, 1, -1,
                1, 3, 1,
               -1, 1, 3;
    CHECK(prec.omega() == expected);
    CHECK(prec.omega_d() == 4.0 * MatrixXd::Identity(3, 3));
    CHECK(prec.omega_u() == expected);
    CHECK(prec.lower_term().isZero());

    const MatrixXd sigma = covariance(prec);
    CHECK(oracle::max_abs(sigma * prec.omega() - MatrixXd::Identity(3, 3)) < 1e-12);
}

TEST_CASE("k at the spectral radius is rejected with a usable suggestion")
{
    const auto inc = incidence(filled_triangle());
    CHECK(min_valid_k(inc, VectorXd::Zero(3), VectorXd::Ones(1), 0.1) == doctest::Approx(3.1).epsilon(1e-12));
    try {
        build_precision(inc, params(3.0, VectorXd::Zero(3), VectorXd::Ones(1)));
        FAIL("expected NotPositiveDefinite");
    } catch (const NotPositiveDefinite& e) {
        CHECK(e.suggested_k() == doctest::Approx(3.1).epsilon(1e-12));
    }
    CHECK_NOTHROW(build_precision(inc, params(3.1, VectorXd::Zero(3), VectorXd::Ones(1))));
}

TEST_CASE("no interactions gives a scaled identity")
{
    const auto inc = incidence(filled_triangle());
    CHECK(min_valid_k(inc, VectorXd::Zero(3), VectorXd::Zero(1), 0.25) == 0.25);
    const auto prec = build_precision(inc, params(1.0, VectorXd::Zero(3), VectorXd::Zero(1)));
    CHECK(prec.omega() == MatrixXd::Identity(3, 3));
    CHECK(covariance(prec) == MatrixXd::Identity(3, 3));
    CHECK(covariance_from_factors(prec).isApprox(MatrixXd::Identity(3, 3), 1e-15));
}

TEST_CASE("build_precision validates its parameters")
{
    const auto inc = incidence(filled_triangle());
    CHECK_THROWS_AS(build_precision(inc, params(4, VectorXd::Zero(2), VectorXd::Ones(1))), DimensionMismatch);
    CHECK_THROWS_AS(build_precision(inc, params(4, VectorXd::Zero(3), VectorXd::Ones(2))), DimensionMismatch);
    CHECK_THROWS_AS(build_precision(inc, params(4, -VectorXd::Ones(3), VectorXd::Ones(1))),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_precision(inc, params(4, VectorXd::Zero(3), VectorXd::Constant(1, NAN))),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_precision(inc, params(0, VectorXd::Zero(3), VectorXd::Zero(1))),
                    std::invalid_argument);
}

TEST_CASE("Table 1 draws: precision matches the matrix oracle and clears the margin")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto m = table1_model(seed);
        const auto prec = build_precision(m.inc, m.params);
        const auto [b1, b2] = oracle::incidence(m.complex);
        const MatrixXd lower = oracle::lower_term(b1, m.params.d_v);
        const MatrixXd upper = oracle::upper_term(b2, m.params.d_t);
        const double k = m.params.k;
        CHECK(k == doctest::Approx(oracle::lambda_max(lower + upper) + 0.1).epsilon(1e-12));

        CHECK(oracle::max_abs(prec.omega() - oracle::precision(b1, b2, k, m.params.d_v, m.params.d_t)) <= 1e-12 * k);
        CHECK(oracle::max_abs(prec.lower_term() - lower) <= 1e-12 * k);
        CHECK(oracle::max_abs(prec.upper_term() - upper) <= 1e-12 * k);

        Eigen::SelfAdjointEigenSolver<MatrixXd> es(prec.omega(), Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() >= 0.1 - 1e-9);
    }
}

TEST_CASE("factorization identities hold on random models")
{
    for (std::uint64_t seed = 100; seed < 130; ++seed) {
        const auto m = table1_model(seed);
        const auto prec = build_precision(m.inc, m.params);
        const double k = prec.k();
        const auto n = static_cast<Eigen::Index>(prec.num_edges());
        const MatrixXd id = MatrixXd::Identity(n, n);
        const MatrixXd& om = prec.omega();
        const MatrixXd& od = prec.omega_d();
        const MatrixXd& ou = prec.omega_u();

        CHECK(oracle::max_abs(om - (od + ou - k * id)) <= 1e-12 * k);
        CHECK(oracle::max_abs(k * om - od * ou) <= 1e-10 * k * k);
        CHECK(oracle::max_abs(od * ou - ou * od) <= 1e-10 * k * k);

        const MatrixXd sigma = om.inverse();
        const MatrixXd factored = ou.inverse() + od.inverse() - id / k;
        CHECK(oracle::max_abs(sigma - factored) <= 1e-10);
        CHECK(oracle::max_abs(covariance(prec) - sigma) <= 1e-10);
        CHECK(oracle::max_abs(covariance_from_factors(prec) - factored) <= 1e-10);

        const auto r = check_identities(prec);
        CHECK(r.sum <= 1e-12);
        CHECK(r.product <= 1e-10);
        CHECK(r.commutator <= 1e-10);
        CHECK(r.covariance <= 1e-10);
        CHECK(r.min_eigenvalue > 0.0);
        CHECK(r.worst() <= 1e-10);
    }
}

TEST_CASE("CMRF links of the filled triangle")
{
    const auto inc = incidence(filled_triangle());
    auto g = build_cmrf(inc, params(4, VectorXd::Zero(3), VectorXd::Ones(1)));
    CHECK(g.lower_links().empty());
    CHECK(g.upper_links() == std::vector<Link>{{0, 1}, {0, 2}, {1, 2}});

    g = build_cmrf(inc, params(4, Eigen::Vector3d(1, 0, 0), VectorXd::Zero(1)));
    CHECK(g.lower_links() == std::vector<Link>{{0, 1}});
    CHECK(g.upper_links().empty());
    CHECK(g.has_lower(1, 0));
    CHECK_FALSE(g.has_link(1, 2));
    CHECK_THROWS_AS(build_cmrf(inc, params(4, VectorXd::Zero(2), VectorXd::Zero(1))), DimensionMismatch);
}

TEST_CASE("an exactly cancelling pair keeps its CMRF link and is reported")
{
    // e12 and e13 share vertex 1 (+d_1) and the triangle (-d_t); equal weights cancel.
    const auto inc = incidence(filled_triangle());
    const auto p = params(6, Eigen::Vector3d(1, 0, 0), VectorXd::Ones(1));
    const auto prec = build_precision(inc, p);
    const auto g = build_cmrf(inc, p);
    CHECK(prec.omega()(0, 1) == 0.0);
    CHECK(g.has_lower(0, 1));
    CHECK(g.has_upper(0, 1));
    CHECK(cancelled_links(prec, g) == std::vector<Link>{{0, 1}});
    CHECK_FALSE(contains(gmrf_links(prec), {0, 1}));
}

TEST_CASE("CMRF support is symbolic and contains the GMRF")
{
    std::mt19937_64 rng(5);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto m = table1_model(seed);
        m.params.d_v = oracle::sparse_coefficients(10, 0.5, rng);
        m.params.d_t = oracle::sparse_coefficients(12, 0.5, rng);
        m.params.k = min_valid_k(m.inc, m.params.d_v, m.params.d_t);
        const auto g = build_cmrf(m.inc, m.params);
        const auto prec = build_precision(m.inc, m.params);
        const auto& c = m.complex;

        for (std::size_t i = 0; i < c.num_edges(); ++i) {
            for (std::size_t j = i + 1; j < c.num_edges(); ++j) {
                const auto ei = c.edges()[i], ej = c.edges()[j];
                bool lower = false;
                for (auto u : ei) {
                    if ((u == ej[0] || u == ej[1]) && m.params.d_v(*c.vertex_index(u)) != 0.0) lower = true;
                }
                bool upper = false;
                for (std::size_t t = 0; t < c.num_triangles(); ++t) {
                    const auto tri = c.triangles()[t];
                    auto in = [&](Edge e) {
                        return std::count(tri.begin(), tri.end(), e[0]) && std::count(tri.begin(), tri.end(), e[1]);
                    };
                    if (in(ei) && in(ej) && m.params.d_t(static_cast<Eigen::Index>(t)) != 0.0) upper = true;
                }
                CHECK(g.has_lower(i, j) == lower);
                CHECK(g.has_upper(i, j) == upper);
            }
        }
        for (const auto& l : gmrf_links(prec)) {
            CHECK(g.has_link(l.first, l.second));
        }
    }
}

TEST_CASE("d_t = 0 removes upper links")
{
    auto m = table1_model(3);
    m.params.d_t.setZero();
    const auto g = build_cmrf(m.inc, m.params);
    CHECK(g.upper_links().empty());
    CHECK(g.lower_links().size() == line_graph(m.complex).num_links());
}

TEST_CASE("CmrfGraph normalizes and validates links")
{
    const CmrfGraph g(4, {{2, 1}, {1, 2}, {0, 3}}, {{3, 0}});
    CHECK(g.lower_links() == std::vector<Link>{{0, 3}, {1, 2}});
    CHECK(g.upper_links() == std::vector<Link>{{0, 3}});
    CHECK(g.lower_neighbors(2) == std::vector<std::size_t>{1});
    CHECK(g.has_upper(3, 0));
    CHECK_THROWS_AS(CmrfGraph(3, {{1, 1}}, {}), DimensionMismatch);
    CHECK_THROWS_AS(CmrfGraph(3, {}, {{0, 3}}), DimensionMismatch);
}

TEST_CASE("white noise sampling")
{
    const auto inc = incidence(filled_triangle());
    const auto prec = build_precision(inc, params(1.0, VectorXd::Zero(3), VectorXd::Zero(1)));
    const std::size_t n = 100000;
    const MatrixXd x = sample(prec, n, 42);
    CHECK(x.rows() == 3);
    CHECK(x.cols() == static_cast<Eigen::Index>(n));
    const MatrixXd cov = x * x.transpose() / static_cast<double>(n);
    CHECK(oracle::max_abs(cov - MatrixXd::Identity(3, 3)) < 5.0 * std::sqrt(2.0 / n));
}

TEST_CASE("sample covariance of the filled-triangle model is within 5 standard errors")
{
    const auto inc = incidence(filled_triangle());
    const auto prec = build_precision(inc, params(4.0, Eigen::Vector3d(0.5, 1.0, 0.0), VectorXd::Ones(1)));
    const MatrixXd sigma = covariance(prec);
    const std::size_t n = 100000;
    const MatrixXd x = sample(prec, n, 9);
    const MatrixXd cov = x * x.transpose() / static_cast<double>(n);
    for (Eigen::Index i = 0; i < 3; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) {
            const double se = std::sqrt((sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) / n);
            CHECK(std::abs(cov(i, j) - sigma(i, j)) < 5.0 * se);
        }
    }
    const EdgeSignalSampler sampler(prec);
    CHECK(oracle::max_abs(sampler.factor() * sampler.factor().transpose() - sigma) < 1e-12);
}

TEST_CASE("sampling is deterministic in the seed")
{
    const auto m = table1_model(1);
    const auto prec = build_precision(m.inc, m.params);
    CHECK(sample(prec, 5, 3) == sample(prec, 5, 3));
    CHECK(sample(prec, 5, 3) != sample(prec, 5, 4));
    CHECK_THROWS_AS(sample(prec, 0, 3), std::invalid_argument);

    const EdgeSignalSampler sampler(prec);
    Rng a(8), b(8);
    VectorXd out;
    sampler.draw_into(b, out);
    CHECK(sampler.draw(a) == out);
}
