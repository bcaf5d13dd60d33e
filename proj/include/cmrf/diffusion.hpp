#pragma once

#include "cmrf/cmrf_model.hpp"
#include "cmrf/simplicial_complex.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace cmrf {

enum class Variant { atc_cmrf, atc_lgmrf, atc_plain, standalone_lms, centralized_cmrf };

inline constexpr std::array<Variant, 5> kAllVariants = {
    Variant::atc_cmrf, Variant::atc_lgmrf, Variant::atc_plain, Variant::standalone_lms,
    Variant::centralized_cmrf};

std::string_view variant_name(Variant v);
/// Throws ConfigError for unknown names.
Variant parse_variant(std::string_view name);

/// Which parts of the edge-wise loss an estimator uses.
struct VariantSpec {
    Variant variant = Variant::atc_cmrf;
    bool uses_lower_term = false;
    bool uses_upper_term = false;
    bool uses_combination = false;
    bool is_centralized = false;

    static VariantSpec of(Variant v);
};

/// Linear observation model y_e = u_e^T theta0 + n_e with CMRF-correlated noise.
class MeasurementModel {
public:
    MeasurementModel(Eigen::VectorXd theta0, double regressor_variance, EdgePrecision noise_precision);

    const Eigen::VectorXd& theta0() const noexcept { return theta0_; }
    double regressor_variance() const noexcept { return regressor_variance_; }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(theta0_.size()); }
    std::size_t num_edges() const noexcept { return noise_.num_edges(); }
    const EdgePrecision& noise_precision() const noexcept { return noise_; }
    const EdgeSignalSampler& noise_sampler() const noexcept { return sampler_; }

private:
    Eigen::VectorXd theta0_;
    double regressor_variance_;
    EdgePrecision noise_;
    EdgeSignalSampler sampler_;
};

/// Data observed by the network in one time step. Row e of `regressors` is u_e^T.
struct RoundData {
    Eigen::MatrixXd regressors;
    Eigen::VectorXd measurements;
};

/// Regressors are drawn first (row by row), then one noise vector.
RoundData generate_round(const MeasurementModel& model, Rng& rng);
void generate_round_into(const MeasurementModel& model, Rng& rng, RoundData& out);

/// Coefficient multiplying r_e * r_neighbor in an edge's local loss.
struct CrossTerm {
    std::size_t neighbor = 0;
    double weight = 0.0;
};

/// The part of (k, d_v, d_t) and the incidence structure one edge agent needs:
///   lower_self = d_{u1} + d_{u2} over the endpoints of e
///   lower_cross: d_u B1[u,e] B1[u,e'] for edges e' sharing the endpoint u
///   upper_self = sum of d_tau over triangles tau containing e
///   upper_cross: d_tau B2[e,tau] B2[e',tau] for the other edges of tau
/// Cross terms with a zero coefficient are omitted.
struct LocalCoefficients {
    std::size_t edge = 0;
    double k = 0.0;
    double lower_self = 0.0;
    double upper_self = 0.0;
    std::vector<CrossTerm> lower_cross;
    std::vector<CrossTerm> upper_cross;

    /// Coefficient of the own squared residual in the variant's loss, times two.
    double curvature(const VariantSpec& spec) const;
};

using CouplingTable = std::vector<LocalCoefficients>;

CouplingTable local_coefficients(const IncidencePair& inc, const SgmParams& params);

/// What an agent hears from one line-graph neighbor during a round.
struct NeighborMessage {
    std::size_t from = 0;
    double residual = 0.0;         // y_{e'} - u_{e'}^T theta_{e'}
    Eigen::VectorXd regressor;     // u_{e'}
    Eigen::VectorXd psi;           // intermediate estimate after adaptation
};

struct AgentState {
    std::size_t edge = 0;
    Eigen::VectorXd theta_hat;
    /// One slot per line-graph neighbor, sorted by sender.
    std::vector<NeighborMessage> inbox;
};

/// Agents with zero estimates and inbox slots for every line-graph neighbor.
std::vector<AgentState> make_agents(const EdgeAdjacency& line_graph, std::size_t dimension);

struct LossTerms {
    double phi_h = 0.0;
    double phi_d = 0.0;
    double phi_u = 0.0;

    double total() const noexcept { return phi_h - phi_d - phi_u; }
};

/// Instantaneous edge-wise loss terms. Throws MissingNeighborResidual when a
/// coupled neighbor is absent from the inbox.
LossTerms local_loss_terms(const LocalCoefficients& coeffs, double own_residual,
                           std::span<const NeighborMessage> inbox);

/// Convenience form reading every residual from a full vector.
LossTerms local_loss_terms(std::size_t edge, const Eigen::VectorXd& residuals,
                           const CouplingTable& coupling);

/// Gradient, with respect to this agent's estimate, of the network loss
/// sum_e' Phi_e' restricted to the variant's terms. Neighbor residuals are
/// constants computed by their owners, so coupled pairs contribute
/// +w u_e r_{e'} and the own residual contributes -curvature u_e r_e.
/// Throws MissingNeighborData when a required neighbor is absent.
Eigen::VectorXd local_gradient(const VariantSpec& spec, const LocalCoefficients& coeffs,
                               double own_measurement, const Eigen::VectorXd& own_regressor,
                               const Eigen::VectorXd& theta,
                               std::span<const NeighborMessage> inbox);

enum class CombinationRule { uniform, metropolis };

/// Row-stochastic weights over each closed line-graph neighborhood.
struct CombinationWeights {
    std::vector<double> self;
    std::vector<std::vector<double>> neighbor;  // aligned with the agent inbox order
};

CombinationWeights combination_weights(const EdgeAdjacency& line_graph, CombinationRule rule);

/// One synchronous adapt-then-combine round for a distributed variant:
/// residual exchange, adaptation psi_e = theta_e - mu grad_e, psi exchange,
/// then combination (skipped for standalone LMS).
void atc_round(std::vector<AgentState>& agents, const RoundData& round,
               const CouplingTable& coupling, const CombinationWeights& weights,
               const VariantSpec& spec, double step_size);

/// theta <- theta + mu U^T omega (y - U theta).
void centralized_round(Eigen::VectorXd& theta, const RoundData& round, const EdgePrecision& prec,
                       double step_size);

/// (1/|E|) sum_e ||theta_e - theta0||^2.
double mean_square_deviation(const std::vector<AgentState>& agents, const Eigen::VectorXd& theta0);

}  // namespace cmrf
