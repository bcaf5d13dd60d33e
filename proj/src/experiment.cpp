#include "cmrf/experiment.hpp"

#include "cmrf/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <string>
#include <thread>

namespace cmrf {

namespace {

void require(bool ok, const std::string& message)
{
    if (!ok) {
        throw ConfigError(message);
    }
}

void check_range(const CoefficientRange& r, const char* name)
{
    require(std::isfinite(r.low) && std::isfinite(r.high) && r.low >= 0.0 && r.low <= r.high,
            std::string(name) + " must satisfy 0 <= low <= high");
}

Eigen::VectorXd draw_coefficients(std::size_t n, const CoefficientRange& range, Rng& rng)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(n));
    if (range.low == range.high) {
        out.setConstant(range.low);
        return out;
    }
    std::uniform_real_distribution<double> dist(range.low, range.high);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out(i) = dist(rng);
    }
    return out;
}

double mean_curvature(const CouplingTable& coupling, const VariantSpec& spec)
{
    double total = 0.0;
    for (const auto& c : coupling) {
        total += c.curvature(spec);
    }
    return total / static_cast<double>(coupling.size());
}

}  // namespace

RandomComplexOptions ExperimentConfig::table1_complex_options()
{
    RandomComplexOptions o;
    o.num_vertices = 10;
    o.target_edges = 21;
    o.edge_probability = 21.0 / 45.0;
    o.triangle_budget = 12;
    o.exact_triangles = true;
    o.require_trivial_homology = true;
    return o;
}

void ExperimentConfig::validate() const
{
    check_range(vertex_coefficients, "vertex coefficient range");
    check_range(triangle_coefficients, "triangle coefficient range");
    require(std::isfinite(k_margin) && k_margin > 0.0, "k margin must be positive");
    require(dimension >= 1, "parameter dimension must be at least 1");
    require(std::isfinite(regressor_variance) && regressor_variance > 0.0,
            "regressor variance must be positive");
    require(std::isfinite(step_size) && step_size >= 0.0, "step size must be non-negative");
    for (const auto& [v, mu] : step_overrides) {
        require(std::isfinite(mu) && mu >= 0.0,
                "step size override for " + std::string(variant_name(v)) + " must be non-negative");
    }
    require(num_runs >= 1, "number of runs must be at least 1");
    require(num_iterations >= 1, "number of iterations must be at least 1");
    require(steady_state_window >= 1, "steady-state window must be at least 1");
    require(!variants.empty(), "at least one variant is required");
    for (std::size_t i = 0; i < variants.size(); ++i) {
        for (std::size_t j = i + 1; j < variants.size(); ++j) {
            require(variants[i] != variants[j],
                    "variant " + std::string(variant_name(variants[i])) + " listed twice");
        }
    }
    require(threads >= 1, "thread count must be at least 1");
    if (fixed_complex) {
        require(fixed_complex->num_edges() >= 1, "the complex must have at least one edge");
    } else {
        require(complex_options.num_vertices >= 3, "random complexes need at least 3 vertices");
        require(complex_options.edge_probability >= 0.0 && complex_options.edge_probability <= 1.0,
                "edge probability must lie in [0, 1]");
    }
}

RunSetup prepare_run(const ExperimentConfig& config, std::size_t run_index)
{
    const auto seed = config.seed;
    const auto index = static_cast<std::uint64_t>(run_index);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    Rng rng(seq);

    RunSetup setup{config.fixed_complex ? *config.fixed_complex
                                        : random_2sc(config.complex_options, rng()),
                   {}, {}, {}, 0};
    setup.incidence = incidence(setup.complex);
    setup.params.d_v = draw_coefficients(setup.complex.num_vertices(), config.vertex_coefficients, rng);
    setup.params.d_t =
        draw_coefficients(setup.complex.num_triangles(), config.triangle_coefficients, rng);
    setup.params.k = min_valid_k(setup.incidence, setup.params.d_v, setup.params.d_t, config.k_margin);

    std::normal_distribution<double> gauss(0.0, 1.0);
    setup.theta0.resize(static_cast<Eigen::Index>(config.dimension));
    for (Eigen::Index i = 0; i < setup.theta0.size(); ++i) {
        setup.theta0(i) = gauss(rng);
    }
    setup.round_seed = rng();
    return setup;
}

std::map<Variant, double> step_sizes(const ExperimentConfig& config, const CouplingTable& coupling)
{
    const VariantSpec reference = VariantSpec::of(Variant::atc_cmrf);
    const double ref_rate = mean_curvature(coupling, reference);

    std::map<Variant, double> out;
    for (Variant v : config.variants) {
        if (auto it = config.step_overrides.find(v); it != config.step_overrides.end()) {
            out[v] = it->second;
            continue;
        }
        if (config.step_scaling == StepScaling::none) {
            out[v] = config.step_size;
            continue;
        }
        const VariantSpec spec = VariantSpec::of(v);
        const double rate = spec.is_centralized
                                ? mean_curvature(coupling, reference) * static_cast<double>(coupling.size())
                                : mean_curvature(coupling, spec);
        out[v] = config.step_size * (ref_rate / rate);
    }
    return out;
}

RunTrace simulate_run(const ExperimentConfig& config, const RunSetup& setup, bool record_estimates)
{
    const EdgePrecision prec = build_precision(setup.incidence, setup.params);
    const MeasurementModel model(setup.theta0, config.regressor_variance, prec);
    const CouplingTable coupling = local_coefficients(setup.incidence, setup.params);
    const EdgeAdjacency lg = line_graph(setup.complex);
    const CombinationWeights weights = combination_weights(lg, config.combination);

    RunTrace trace;
    trace.variants = config.variants;
    trace.step_size = step_sizes(config, coupling);
    const std::size_t nv = config.variants.size();
    const std::size_t iterations = config.num_iterations;
    trace.msd.assign(nv, std::vector<double>(iterations));
    if (record_estimates) {
        trace.estimates.assign(nv, {});
    }

    std::vector<VariantSpec> specs;
    std::vector<std::vector<AgentState>> agents;
    std::vector<Eigen::VectorXd> shared;
    for (Variant v : config.variants) {
        specs.push_back(VariantSpec::of(v));
        agents.push_back(make_agents(lg, config.dimension));
        shared.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config.dimension)));
    }

    const auto ne = static_cast<Eigen::Index>(setup.complex.num_edges());
    const auto m = static_cast<Eigen::Index>(config.dimension);

    Rng rng(setup.round_seed);
    RoundData round;
    for (std::size_t t = 0; t < iterations; ++t) {
        generate_round_into(model, rng, round);
        for (std::size_t i = 0; i < nv; ++i) {
            const double mu = trace.step_size.at(specs[i].variant);
            if (specs[i].is_centralized) {
                centralized_round(shared[i], round, prec, mu);
                trace.msd[i][t] = (shared[i] - setup.theta0).squaredNorm();
            } else {
                atc_round(agents[i], round, coupling, weights, specs[i], mu);
                trace.msd[i][t] = mean_square_deviation(agents[i], setup.theta0);
            }
            if (record_estimates) {
                Eigen::MatrixXd snapshot(ne, m);
                for (Eigen::Index e = 0; e < ne; ++e) {
                    snapshot.row(e) = specs[i].is_centralized
                                          ? shared[i].transpose()
                                          : agents[i][static_cast<std::size_t>(e)].theta_hat.transpose();
                }
                trace.estimates[i].push_back(std::move(snapshot));
            }
        }
    }
    return trace;
}

RunTrace simulate_run(const ExperimentConfig& config, std::size_t run_index, bool record_estimates)
{
    return simulate_run(config, prepare_run(config, run_index), record_estimates);
}

double VariantCurve::steady_state_db() const
{
    return 10.0 * std::log10(steady_state_msd);
}

const VariantCurve& ExperimentResult::curve(Variant v) const
{
    for (const auto& c : curves) {
        if (c.variant == v) {
            return c;
        }
    }
    throw std::out_of_range("variant " + std::string(variant_name(v)) + " was not simulated");
}

ExperimentResult run_experiment(const ExperimentConfig& config)
{
    config.validate();

    std::vector<std::vector<std::vector<double>>> per_run(config.num_runs);
    const std::size_t workers = std::min(config.threads, config.num_runs);
    if (workers <= 1) {
        for (std::size_t r = 0; r < config.num_runs; ++r) {
            per_run[r] = simulate_run(config, r).msd;
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::atomic<bool> failed{false};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t r = next++; r < config.num_runs && !failed; r = next++) {
                    try {
                        per_run[r] = simulate_run(config, r).msd;
                    } catch (...) {
                        if (!failed.exchange(true)) {
                            failure = std::current_exception();
                        }
                    }
                }
            });
        }
        for (auto& th : pool) {
            th.join();
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
    }

    // Aggregate in run order so the result does not depend on scheduling.
    ExperimentResult result;
    result.num_runs = config.num_runs;
    result.num_iterations = config.num_iterations;
    const double runs = static_cast<double>(config.num_runs);
    for (std::size_t i = 0; i < config.variants.size(); ++i) {
        VariantCurve curve;
        curve.variant = config.variants[i];
        curve.msd_mean.assign(config.num_iterations, 0.0);
        curve.msd_std.assign(config.num_iterations, 0.0);
        for (std::size_t t = 0; t < config.num_iterations; ++t) {
            double sum = 0.0;
            for (const auto& run : per_run) {
                sum += run[i][t];
            }
            const double mean = sum / runs;
            double sq = 0.0;
            for (const auto& run : per_run) {
                sq += (run[i][t] - mean) * (run[i][t] - mean);
            }
            curve.msd_mean[t] = mean;
            curve.msd_std[t] = config.num_runs > 1 ? std::sqrt(sq / (runs - 1.0)) : 0.0;
        }
        const std::size_t window = std::min(config.steady_state_window, config.num_iterations);
        double tail = 0.0;
        for (std::size_t t = config.num_iterations - window; t < config.num_iterations; ++t) {
            tail += curve.msd_mean[t];
        }
        curve.steady_state_msd = tail / static_cast<double>(window);
        result.curves.push_back(std::move(curve));
    }
    return result;
}

void write_csv(std::ostream& os, const ExperimentResult& result)
{
    const auto flags = os.flags();
    const auto precision = os.precision();
    os << "variant,iteration,msd_mean,msd_std\n";
    os << std::setprecision(12);
    for (const auto& c : result.curves) {
        for (std::size_t t = 0; t < c.msd_mean.size(); ++t) {
            os << variant_name(c.variant) << ',' << (t + 1) << ',' << c.msd_mean[t] << ','
               << c.msd_std[t] << '\n';
        }
    }
    os.flags(flags);
    os.precision(precision);
}

void write_summary(std::ostream& os, const ExperimentResult& result)
{
    std::vector<const VariantCurve*> order;
    for (const auto& c : result.curves) {
        order.push_back(&c);
    }
    std::stable_sort(order.begin(), order.end(), [](const VariantCurve* a, const VariantCurve* b) {
        return a->steady_state_msd < b->steady_state_msd;
    });

    const auto flags = os.flags();
    const auto precision = os.precision();
    os << "steady-state MSD (" << result.num_runs << " runs, " << result.num_iterations
       << " iterations)\n";
    for (const auto* c : order) {
        os << "  " << std::left << std::setw(18) << variant_name(c->variant) << std::right
           << std::scientific << std::setprecision(4) << c->steady_state_msd << "  " << std::fixed
           << std::setprecision(2) << std::setw(8) << c->steady_state_db() << " dB\n";
    }
    os << "ordering:";
    for (std::size_t i = 0; i < order.size(); ++i) {
        os << (i == 0 ? " " : " < ") << variant_name(order[i]->variant);
    }
    os << '\n';
    os.flags(flags);
    os.precision(precision);
}

}  // namespace cmrf
