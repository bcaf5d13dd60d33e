#include <doctest.h>

#include "support/oracles.hpp"

#include "cmrf/error.hpp"
#include "cmrf/experiment.hpp"

#include <sstream>

using namespace cmrf;
using Eigen::VectorXd;

namespace {

ExperimentConfig small_config()
{
    ExperimentConfig c;
    c.num_runs = 3;
    c.num_iterations = 50;
    c.steady_state_window = 10;
    c.seed = 17;
    return c;
}

std::string csv_of(const ExperimentResult& r)
{
    std::ostringstream os;
    write_csv(os, r);
    return os.str();
}

}  // namespace

TEST_CASE("config validation")
{
    CHECK_NOTHROW(ExperimentConfig{}.validate());
    auto broken = [](auto edit) {
        ExperimentConfig c;
        edit(c);
        return c;
    };
    CHECK_THROWS_AS(broken([](auto& c) { c.num_runs = 0; }).validate(), ConfigError);
    CHECK_THROWS_AS(broken([](auto& c) { c.num_iterations = 0; }).validate(), ConfigError);
    CHECK_THROWS_AS(broken([](auto& c) { c.steady_state_window = 0; }).validate(), ConfigError);
    CHECK_THROWS_AS(broken([](auto& c) { c.step_size = -1; }).validate(), ConfigError);
    CHECK_THROWS_AS(broken([](auto& c) { c.regressor_variance = 0; }).validate(), ConfigError);
    CHECK_THROWS_AS(broken([](auto& c) { c.k_margin = 0; }).validate(), ConfigError);
    CHECK_THROWS_AS(broken([](auto& c) { c.variants.clear(); }).validate(), ConfigError);
    CHECK_THROWS_AS(broken([](auto& c) { c.variants = {Variant::atc_cmrf, Variant::atc_cmrf}; }).validate(),
                    ConfigError);
    CHECK_THROWS_AS(broken([](auto& c) { c.vertex_coefficients = {3, 1}; }).validate(), ConfigError);
    CHECK_THROWS_AS(broken([](auto& c) { c.step_overrides[Variant::atc_plain] = -2; }).validate(), ConfigError);
    CHECK_THROWS_AS(broken([](auto& c) { c.threads = 0; }).validate(), ConfigError);
    CHECK_THROWS_AS(broken([](auto& c) { c.complex_options.num_vertices = 2; }).validate(), ConfigError);
}

TEST_CASE("run setup follows Table 1 and is reproducible")
{
    const ExperimentConfig c = small_config();
    const RunSetup a = prepare_run(c, 0);
    CHECK(a.complex.num_vertices() == 10);
    CHECK(a.complex.num_edges() == 21);
    CHECK(a.complex.num_triangles() == 12);
    CHECK(a.theta0.size() == 10);
    CHECK(a.params.d_v.minCoeff() >= 0.2);
    CHECK(a.params.d_v.maxCoeff() <= 5.0);
    CHECK(a.params.d_t.minCoeff() >= 0.2);
    CHECK(a.params.d_t.maxCoeff() <= 5.0);

    const auto [b1, b2] = oracle::incidence(a.complex);
    const double lmax = oracle::lambda_max(oracle::lower_term(b1, a.params.d_v) + oracle::upper_term(b2, a.params.d_t));
    CHECK(std::abs(a.params.k - (lmax + 0.1)) <= 1e-12 * a.params.k);

    const RunSetup again = prepare_run(c, 0);
    CHECK(again.complex == a.complex);
    CHECK(again.params.d_v == a.params.d_v);
    CHECK(again.theta0 == a.theta0);
    CHECK(again.round_seed == a.round_seed);

    const RunSetup other = prepare_run(c, 1);
    CHECK(other.theta0 != a.theta0);
}

TEST_CASE("step sizes")
{
    ExperimentConfig c = small_config();
    const RunSetup s = prepare_run(c, 0);
    const CouplingTable table = local_coefficients(s.incidence, s.params);
    auto mu = step_sizes(c, table);
    CHECK(mu.at(Variant::atc_cmrf) == c.step_size);
    CHECK(mu.at(Variant::centralized_cmrf) == doctest::Approx(c.step_size / 21.0));
    // Dropping loss terms raises the curvature, so the baselines take smaller steps.
    CHECK(mu.at(Variant::atc_lgmrf) < c.step_size);
    CHECK(mu.at(Variant::atc_plain) < mu.at(Variant::atc_lgmrf));
    CHECK(mu.at(Variant::standalone_lms) == mu.at(Variant::atc_plain));

    double mean_k = 0, mean_cmrf = 0;
    for (const auto& t : table) {
        mean_k += t.k / 21.0;
        mean_cmrf += t.curvature(VariantSpec::of(Variant::atc_cmrf)) / 21.0;
    }
    CHECK(mu.at(Variant::atc_plain) == doctest::Approx(c.step_size * mean_cmrf / mean_k));

    c.step_overrides[Variant::atc_plain] = 0.125;
    CHECK(step_sizes(c, table).at(Variant::atc_plain) == 0.125);

    c.step_scaling = StepScaling::none;
    for (const auto& [v, m] : step_sizes(c, table)) {
        CHECK(m == (v == Variant::atc_plain ? 0.125 : c.step_size));
    }
}

TEST_CASE("one frozen iteration reports the initial deviation")
{
    ExperimentConfig c = small_config();
    c.num_runs = 1;
    c.num_iterations = 1;
    c.step_size = 0.0;
    const ExperimentResult r = run_experiment(c);
    const double expected = prepare_run(c, 0).theta0.squaredNorm();
    CHECK(r.curves.size() == 5);
    for (const auto& curve : r.curves) {
        CHECK(curve.msd_mean.size() == 1);
        CHECK(curve.msd_mean[0] == doctest::Approx(expected).epsilon(1e-14));
        CHECK(curve.msd_std[0] == 0.0);
    }
}

TEST_CASE("subsumption is exact")
{
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        ExperimentConfig c = small_config();
        c.seed = seed;
        c.num_runs = 1;
        c.triangle_coefficients = {0.0, 0.0};
        c.variants = {Variant::atc_cmrf, Variant::atc_lgmrf, Variant::atc_plain};
        RunTrace t = simulate_run(c, 0, true);
        CHECK(t.msd[0] == t.msd[1]);
        CHECK(t.estimates[0] == t.estimates[1]);
        CHECK(t.msd[0] != t.msd[2]);

        c.vertex_coefficients = {0.0, 0.0};
        t = simulate_run(c, 0, true);
        CHECK(t.msd[0] == t.msd[2]);
        CHECK(t.estimates[0] == t.estimates[2]);
    }
}

TEST_CASE("runs are identical across thread counts and reruns")
{
    ExperimentConfig c = small_config();
    const std::string serial = csv_of(run_experiment(c));
    c.threads = 3;
    const std::string parallel = csv_of(run_experiment(c));
    CHECK(serial == parallel);
    CHECK(csv_of(run_experiment(c)) == serial);
    c.seed += 1;
    CHECK(csv_of(run_experiment(c)) != serial);
}

TEST_CASE("CSV layout and summary")
{
    ExperimentConfig c = small_config();
    c.variants = {Variant::standalone_lms, Variant::atc_cmrf};
    const ExperimentResult r = run_experiment(c);
    std::istringstream in(csv_of(r));
    std::string line;
    std::getline(in, line);
    CHECK(line == "variant,iteration,msd_mean,msd_std");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        if (rows == 1) CHECK(line.rfind("standalone_lms,1,", 0) == 0);
        if (rows == 51) CHECK(line.rfind("atc_cmrf,1,", 0) == 0);
    }
    CHECK(rows == 100);

    const auto& curve = r.curve(Variant::atc_cmrf);
    double tail = 0;
    for (std::size_t t = 40; t < 50; ++t) tail += curve.msd_mean[t];
    CHECK(curve.steady_state_msd == doctest::Approx(tail / 10));
    CHECK(curve.steady_state_db() == doctest::Approx(10 * std::log10(tail / 10)));
    CHECK_THROWS_AS(r.curve(Variant::atc_plain), std::out_of_range);

    std::ostringstream summary;
    write_summary(summary, r);
    CHECK(summary.str().find("ordering: atc_cmrf < standalone_lms") != std::string::npos);
}

TEST_CASE("a fixed complex is used in every run")
{
    ExperimentConfig c = small_config();
    c.fixed_complex = build_complex({0, 1, 2, 3}, {{0, 1}, {0, 2}, {1, 2}, {2, 3}}, {{0, 1, 2}});
    CHECK(prepare_run(c, 0).complex == *c.fixed_complex);
    CHECK(prepare_run(c, 5).complex == *c.fixed_complex);
    const ExperimentResult r = run_experiment(c);
    CHECK(r.curves.size() == 5);
}

TEST_CASE("short experiment: topology-aware adaptation helps")
{
    ExperimentConfig c;
    c.num_runs = 10;
    c.num_iterations = 1500;
    c.seed = 3;
    const ExperimentResult r = run_experiment(c);
    const double cmrf = r.curve(Variant::atc_cmrf).steady_state_db();
    CHECK(cmrf < r.curve(Variant::atc_plain).steady_state_db());
    CHECK(r.curve(Variant::atc_plain).steady_state_db() < r.curve(Variant::standalone_lms).steady_state_db());
    CHECK(std::abs(cmrf - r.curve(Variant::centralized_cmrf).steady_state_db()) < 2.0);
}
