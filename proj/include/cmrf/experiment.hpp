#pragma once

#include "cmrf/cmrf_model.hpp"
#include "cmrf/diffusion.hpp"
#include "cmrf/simplicial_complex.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

namespace cmrf {

/// Closed interval for uniform coefficient draws; low == high gives a constant.
struct CoefficientRange {
    double low = 0.2;
    double high = 5.0;
};

enum class StepScaling {
    /// mu_v = mu * c_ref / c_v, where c_v is the mean per-agent curvature of
    /// variant v (the total curvature for the centralized variant) and c_ref is
    /// that of atc_cmrf. atc_cmrf always runs with mu.
    matched_rate,
    /// Every variant runs with mu.
    none,
};

struct ExperimentConfig {
    /// When set, every run uses this complex; otherwise each run draws a fresh
    /// one from complex_options.
    std::optional<SimplicialComplex2> fixed_complex;
    RandomComplexOptions complex_options = table1_complex_options();

    CoefficientRange vertex_coefficients;
    CoefficientRange triangle_coefficients;
    double k_margin = kDefaultMargin;

    std::size_t dimension = 10;
    double regressor_variance = 0.2;

    double step_size = 5e-3;
    StepScaling step_scaling = StepScaling::matched_rate;
    std::map<Variant, double> step_overrides;
    CombinationRule combination = CombinationRule::uniform;

    std::size_t num_runs = 100;
    std::size_t num_iterations = 2000;
    std::size_t steady_state_window = 100;
    std::uint64_t seed = 0;
    std::vector<Variant> variants{kAllVariants.begin(), kAllVariants.end()};
    std::size_t threads = 1;

    /// Throws ConfigError on the first invalid field.
    void validate() const;

    /// 10 vertices, 21 edges, 12 triangles, trivial first homology.
    static RandomComplexOptions table1_complex_options();
};

/// Everything drawn at the start of one Monte Carlo run.
struct RunSetup {
    SimplicialComplex2 complex;
    IncidencePair incidence;
    SgmParams params;
    Eigen::VectorXd theta0;
    std::uint64_t round_seed = 0;
};

/// Deterministic in (config.seed, run_index).
RunSetup prepare_run(const ExperimentConfig& config, std::size_t run_index);

/// Step size per requested variant for one model.
std::map<Variant, double> step_sizes(const ExperimentConfig& config, const CouplingTable& coupling);

struct RunTrace {
    std::vector<Variant> variants;
    /// msd[v][t] after round t+1.
    std::vector<std::vector<double>> msd;
    std::map<Variant, double> step_size;
    /// estimates[v][t] is |E| x M (row e = agent e), only when recorded.
    std::vector<std::vector<Eigen::MatrixXd>> estimates;
};

/// Runs every variant on the same round data stream.
RunTrace simulate_run(const ExperimentConfig& config, std::size_t run_index,
                      bool record_estimates = false);

RunTrace simulate_run(const ExperimentConfig& config, const RunSetup& setup,
                      bool record_estimates = false);

struct VariantCurve {
    Variant variant = Variant::atc_cmrf;
    std::vector<double> msd_mean;
    std::vector<double> msd_std;
    /// Mean of msd_mean over the final steady_state_window iterations.
    double steady_state_msd = 0.0;
    double steady_state_db() const;
};

struct ExperimentResult {
    std::vector<VariantCurve> curves;
    std::size_t num_runs = 0;
    std::size_t num_iterations = 0;

    const VariantCurve& curve(Variant v) const;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// variant,iteration,msd_mean,msd_std
void write_csv(std::ostream& os, const ExperimentResult& result);

/// Steady-state MSD per variant, linear and in dB, sorted best first.
void write_summary(std::ostream& os, const ExperimentResult& result);

}  // namespace cmrf
