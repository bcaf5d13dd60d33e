#include "cmrf/diffusion.hpp"

#include "cmrf/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cmrf {

std::string_view variant_name(Variant v)
{
    switch (v) {
    case Variant::atc_cmrf: return "atc_cmrf";
    case Variant::atc_lgmrf: return "atc_lgmrf";
    case Variant::atc_plain: return "atc_plain";
    case Variant::standalone_lms: return "standalone_lms";
    case Variant::centralized_cmrf: return "centralized_cmrf";
    }
    return "unknown";
}

Variant parse_variant(std::string_view name)
{
    for (Variant v : kAllVariants) {
        if (variant_name(v) == name) {
            return v;
        }
    }
    throw ConfigError("unknown variant '" + std::string(name) + "'");
}

VariantSpec VariantSpec::of(Variant v)
{
    switch (v) {
    case Variant::atc_cmrf: return {v, true, true, true, false};
    case Variant::atc_lgmrf: return {v, true, false, true, false};
    case Variant::atc_plain: return {v, false, false, true, false};
    case Variant::standalone_lms: return {v, false, false, false, false};
    case Variant::centralized_cmrf: return {v, true, true, false, true};
    }
    throw std::invalid_argument("unknown variant");
}

MeasurementModel::MeasurementModel(Eigen::VectorXd theta0, double regressor_variance,
                                   EdgePrecision noise_precision)
    : theta0_(std::move(theta0)),
      regressor_variance_(regressor_variance),
      noise_(std::move(noise_precision)),
      sampler_(noise_)
{
    if (!(std::isfinite(regressor_variance_) && regressor_variance_ > 0.0)) {
        throw std::invalid_argument("regressor variance must be positive");
    }
    if (theta0_.size() == 0 || !theta0_.allFinite()) {
        throw std::invalid_argument("theta0 must be a non-empty finite vector");
    }
}

void generate_round_into(const MeasurementModel& model, Rng& rng, RoundData& out)
{
    const auto n = static_cast<Eigen::Index>(model.num_edges());
    const auto m = static_cast<Eigen::Index>(model.dimension());
    out.regressors.resize(n, m);

    std::normal_distribution<double> gauss(0.0, std::sqrt(model.regressor_variance()));
    for (Eigen::Index e = 0; e < n; ++e) {
        for (Eigen::Index j = 0; j < m; ++j) {
            out.regressors(e, j) = gauss(rng);
        }
    }
    model.noise_sampler().draw_into(rng, out.measurements);
    out.measurements.noalias() += out.regressors * model.theta0();
}

RoundData generate_round(const MeasurementModel& model, Rng& rng)
{
    RoundData out;
    generate_round_into(model, rng, out);
    return out;
}

double LocalCoefficients::curvature(const VariantSpec& spec) const
{
    return k - (spec.uses_lower_term ? lower_self : 0.0) - (spec.uses_upper_term ? upper_self : 0.0);
}

CouplingTable local_coefficients(const IncidencePair& inc, const SgmParams& params)
{
    if (static_cast<std::size_t>(params.d_v.size()) != inc.num_vertices() ||
        static_cast<std::size_t>(params.d_t.size()) != inc.num_triangles()) {
        throw DimensionMismatch("coefficient vectors do not match the complex");
    }
    const Eigen::MatrixXi& b1 = inc.b1;
    const Eigen::MatrixXi& b2 = inc.b2;

    CouplingTable table(inc.num_edges());
    for (Eigen::Index e = 0; e < b1.cols(); ++e) {
        LocalCoefficients& c = table[static_cast<std::size_t>(e)];
        c.edge = static_cast<std::size_t>(e);
        c.k = params.k;

        for (Eigen::Index u = 0; u < b1.rows(); ++u) {
            if (b1(u, e) == 0) {
                continue;
            }
            const double d = params.d_v(u);
            c.lower_self += d;
            if (d == 0.0) {
                continue;
            }
            for (Eigen::Index other = 0; other < b1.cols(); ++other) {
                if (other != e && b1(u, other) != 0) {
                    c.lower_cross.push_back(
                        {static_cast<std::size_t>(other), d * b1(u, e) * b1(u, other)});
                }
            }
        }

        for (Eigen::Index t = 0; t < b2.cols(); ++t) {
            if (b2(e, t) == 0) {
                continue;
            }
            const double d = params.d_t(t);
            c.upper_self += d;
            if (d == 0.0) {
                continue;
            }
            for (Eigen::Index other = 0; other < b2.rows(); ++other) {
                if (other != e && b2(other, t) != 0) {
                    c.upper_cross.push_back(
                        {static_cast<std::size_t>(other), d * b2(e, t) * b2(other, t)});
                }
            }
        }

        auto by_neighbor = [](const CrossTerm& a, const CrossTerm& b) { return a.neighbor < b.neighbor; };
        std::sort(c.lower_cross.begin(), c.lower_cross.end(), by_neighbor);
        std::sort(c.upper_cross.begin(), c.upper_cross.end(), by_neighbor);
    }
    return table;
}

std::vector<AgentState> make_agents(const EdgeAdjacency& line_graph, std::size_t dimension)
{
    const auto m = static_cast<Eigen::Index>(dimension);
    std::vector<AgentState> agents(line_graph.size());
    for (std::size_t e = 0; e < agents.size(); ++e) {
        agents[e].edge = e;
        agents[e].theta_hat = Eigen::VectorXd::Zero(m);
        for (std::size_t from : line_graph.neighbors[e]) {
            agents[e].inbox.push_back({from, 0.0, Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(m)});
        }
    }
    return agents;
}

namespace {

class InboxLookup {
public:
    InboxLookup(std::size_t owner, std::span<const NeighborMessage> inbox) : owner_(owner), inbox_(inbox) {}

    double operator()(std::size_t neighbor) const
    {
        auto it = std::lower_bound(inbox_.begin(), inbox_.end(), neighbor,
                                   [](const NeighborMessage& m, std::size_t id) { return m.from < id; });
        if (it == inbox_.end() || it->from != neighbor) {
            throw MissingNeighborData("agent " + std::to_string(owner_) + " has no message from edge " +
                                      std::to_string(neighbor));
        }
        return it->residual;
    }

private:
    std::size_t owner_;
    std::span<const NeighborMessage> inbox_;
};

class VectorLookup {
public:
    explicit VectorLookup(const Eigen::VectorXd& r) : r_(r) {}

    double operator()(std::size_t neighbor) const
    {
        if (neighbor >= static_cast<std::size_t>(r_.size())) {
            throw MissingNeighborData("no residual for edge " + std::to_string(neighbor));
        }
        return r_(static_cast<Eigen::Index>(neighbor));
    }

private:
    const Eigen::VectorXd& r_;
};

template <typename Lookup>
double cross_sum(const std::vector<CrossTerm>& terms, const Lookup& residual_of)
{
    double acc = 0.0;
    for (const auto& t : terms) {
        acc += t.weight * residual_of(t.neighbor);
    }
    return acc;
}

template <typename Lookup>
LossTerms loss_terms(const LocalCoefficients& c, double r, const Lookup& residual_of)
{
    LossTerms out;
    out.phi_h = 0.5 * c.k * r * r;
    out.phi_d = 0.5 * (c.lower_self * r * r + r * cross_sum(c.lower_cross, residual_of));
    out.phi_u = 0.5 * (c.upper_self * r * r + r * cross_sum(c.upper_cross, residual_of));
    return out;
}

// Scalar s such that the gradient is -s * u_e.
template <typename Lookup>
double gradient_scale(const VariantSpec& spec, const LocalCoefficients& c, double r,
                      const Lookup& residual_of)
{
    double s = c.curvature(spec) * r;
    if (spec.uses_lower_term) {
        s -= cross_sum(c.lower_cross, residual_of);
    }
    if (spec.uses_upper_term) {
        s -= cross_sum(c.upper_cross, residual_of);
    }
    return s;
}

void check_distributed(const VariantSpec& spec)
{
    if (spec.is_centralized) {
        throw std::invalid_argument("the centralized variant has no per-agent update");
    }
}

}  // namespace

LossTerms local_loss_terms(const LocalCoefficients& coeffs, double own_residual,
                           std::span<const NeighborMessage> inbox)
{
    return loss_terms(coeffs, own_residual, InboxLookup(coeffs.edge, inbox));
}

LossTerms local_loss_terms(std::size_t edge, const Eigen::VectorXd& residuals,
                           const CouplingTable& coupling)
{
    const LocalCoefficients& c = coupling.at(edge);
    return loss_terms(c, residuals(static_cast<Eigen::Index>(edge)), VectorLookup(residuals));
}

Eigen::VectorXd local_gradient(const VariantSpec& spec, const LocalCoefficients& coeffs,
                               double own_measurement, const Eigen::VectorXd& own_regressor,
                               const Eigen::VectorXd& theta,
                               std::span<const NeighborMessage> inbox)
{
    check_distributed(spec);
    const double r = own_measurement - own_regressor.dot(theta);
    return -gradient_scale(spec, coeffs, r, InboxLookup(coeffs.edge, inbox)) * own_regressor;
}

CombinationWeights combination_weights(const EdgeAdjacency& line_graph, CombinationRule rule)
{
    const std::size_t n = line_graph.size();
    CombinationWeights w;
    w.self.resize(n);
    w.neighbor.resize(n);
    for (std::size_t e = 0; e < n; ++e) {
        const auto& nbrs = line_graph.neighbors[e];
        const double degree = static_cast<double>(nbrs.size());
        if (rule == CombinationRule::uniform) {
            const double share = 1.0 / (degree + 1.0);
            w.self[e] = share;
            w.neighbor[e].assign(nbrs.size(), share);
        } else {
            double total = 0.0;
            for (std::size_t other : nbrs) {
                const double other_degree = static_cast<double>(line_graph.neighbors[other].size());
                const double weight = 1.0 / (1.0 + std::max(degree, other_degree));
                w.neighbor[e].push_back(weight);
                total += weight;
            }
            w.self[e] = 1.0 - total;
        }
    }
    return w;
}

void atc_round(std::vector<AgentState>& agents, const RoundData& round,
               const CouplingTable& coupling, const CombinationWeights& weights,
               const VariantSpec& spec, double step_size)
{
    check_distributed(spec);
    const std::size_t n = agents.size();
    if (coupling.size() != n || weights.self.size() != n ||
        static_cast<std::size_t>(round.measurements.size()) != n) {
        throw DimensionMismatch("round data, coupling and agents disagree on the number of edges");
    }

    // Residual exchange.
    std::vector<double> residual(n);
    for (std::size_t e = 0; e < n; ++e) {
        const auto row = static_cast<Eigen::Index>(e);
        residual[e] = round.measurements(row) - round.regressors.row(row).dot(agents[e].theta_hat);
    }
    for (auto& agent : agents) {
        for (auto& msg : agent.inbox) {
            msg.residual = residual[msg.from];
            msg.regressor = round.regressors.row(static_cast<Eigen::Index>(msg.from)).transpose();
        }
    }

    // Adaptation.
    std::vector<Eigen::VectorXd> psi(n);
    for (std::size_t e = 0; e < n; ++e) {
        const double s =
            gradient_scale(spec, coupling[e], residual[e], InboxLookup(e, agents[e].inbox));
        const auto u = round.regressors.row(static_cast<Eigen::Index>(e)).transpose();
        psi[e] = agents[e].theta_hat - step_size * (-s * u);
    }

    if (!spec.uses_combination) {
        for (std::size_t e = 0; e < n; ++e) {
            agents[e].theta_hat = std::move(psi[e]);
        }
        return;
    }

    // Combination.
    for (auto& agent : agents) {
        for (auto& msg : agent.inbox) {
            msg.psi = psi[msg.from];
        }
    }
    for (std::size_t e = 0; e < n; ++e) {
        AgentState& agent = agents[e];
        agent.theta_hat = weights.self[e] * psi[e];
        const auto& w = weights.neighbor[e];
        for (std::size_t slot = 0; slot < agent.inbox.size(); ++slot) {
            agent.theta_hat += w[slot] * agent.inbox[slot].psi;
        }
    }
}

void centralized_round(Eigen::VectorXd& theta, const RoundData& round, const EdgePrecision& prec,
                       double step_size)
{
    const Eigen::VectorXd r = round.measurements - round.regressors * theta;
    theta += step_size * (round.regressors.transpose() * (prec.omega() * r));
}

double mean_square_deviation(const std::vector<AgentState>& agents, const Eigen::VectorXd& theta0)
{
    if (agents.empty()) {
        return 0.0;
    }
    double total = 0.0;
    for (const auto& a : agents) {
        total += (a.theta_hat - theta0).squaredNorm();
    }
    return total / static_cast<double>(agents.size());
}

}  // namespace cmrf
