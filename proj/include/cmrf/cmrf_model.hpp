#pragma once

#include "cmrf/simplicial_complex.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace cmrf {

/// Parameters of the simplicial Gaussian edge model: the scalar k and the
/// non-negative latent variability coefficients on vertices and triangles.
struct SgmParams {
    double k = 1.0;
    Eigen::VectorXd d_v;
    Eigen::VectorXd d_t;
};

/// Default safety margin added to the spectral radius when choosing k.
inline constexpr double kDefaultMargin = 0.1;

/// Edge precision matrix together with its lower and upper factors.
///
///   omega   = k I - B1^T diag(d_v) B1 - B2 diag(d_t) B2^T
///   omega_d = k I - B1^T diag(d_v) B1
///   omega_u = k I - B2 diag(d_t) B2^T
///
/// All three are symmetric positive definite. Only build_precision() creates
/// instances.
class EdgePrecision {
public:
    double k() const noexcept { return k_; }
    std::size_t num_edges() const noexcept { return static_cast<std::size_t>(omega_.rows()); }

    const Eigen::MatrixXd& omega() const noexcept { return omega_; }
    const Eigen::MatrixXd& omega_d() const noexcept { return omega_d_; }
    const Eigen::MatrixXd& omega_u() const noexcept { return omega_u_; }

    /// B1^T diag(d_v) B1
    const Eigen::MatrixXd& lower_term() const noexcept { return lower_; }
    /// B2 diag(d_t) B2^T
    const Eigen::MatrixXd& upper_term() const noexcept { return upper_; }

private:
    friend EdgePrecision build_precision(const IncidencePair&, const SgmParams&);

    double k_ = 0.0;
    Eigen::MatrixXd omega_, omega_d_, omega_u_, lower_, upper_;
};

/// Throws DimensionMismatch for wrongly sized coefficient vectors,
/// std::invalid_argument for negative or non-finite values and
/// NotPositiveDefinite when the smallest eigenvalue of omega is not above 1e-9 k.
EdgePrecision build_precision(const IncidencePair& inc, const SgmParams& params);

/// lambda_max(B1^T diag(d_v) B1 + B2 diag(d_t) B2^T) + margin.
double min_valid_k(const IncidencePair& inc, const Eigen::VectorXd& d_v, const Eigen::VectorXd& d_t,
                   double margin = kDefaultMargin);

/// Sigma = omega^{-1}.
Eigen::MatrixXd covariance(const EdgePrecision& prec);

/// omega_u^{-1} + omega_d^{-1} - k^{-1} I, the factored form of the covariance.
Eigen::MatrixXd covariance_from_factors(const EdgePrecision& prec);

/// Max-norm residuals of the factorization identities, each already scaled:
/// sum by k, product and commutator by k^2, covariance by trace(Sigma)/|E|.
struct IdentityResiduals {
    double sum = 0.0;          // omega - (omega_d + omega_u - k I)
    double product = 0.0;      // k omega - omega_d omega_u
    double commutator = 0.0;   // omega_d omega_u - omega_u omega_d
    double covariance = 0.0;   // omega^{-1} - (omega_u^{-1} + omega_d^{-1} - k^{-1} I)
    double min_eigenvalue = 0.0;

    double worst() const;
};

IdentityResiduals check_identities(const EdgePrecision& prec);

/// Unordered pair of edge indices with first < second.
using Link = std::pair<std::size_t, std::size_t>;

/// Link-colored graph over the edge set. A pair may carry both colors.
class CmrfGraph {
public:
    CmrfGraph() = default;
    /// Links are normalized (ordered, deduplicated); self loops and
    /// out-of-range indices throw DimensionMismatch.
    CmrfGraph(std::size_t num_nodes, std::vector<Link> lower_links, std::vector<Link> upper_links);

    std::size_t num_nodes() const noexcept { return lower_adj_.size(); }
    const std::vector<Link>& lower_links() const noexcept { return lower_; }
    const std::vector<Link>& upper_links() const noexcept { return upper_; }

    const std::vector<std::size_t>& lower_neighbors(std::size_t i) const { return lower_adj_.at(i); }
    const std::vector<std::size_t>& upper_neighbors(std::size_t i) const { return upper_adj_.at(i); }

    bool has_lower(std::size_t i, std::size_t j) const;
    bool has_upper(std::size_t i, std::size_t j) const;
    bool has_link(std::size_t i, std::size_t j) const { return has_lower(i, j) || has_upper(i, j); }

private:
    std::vector<Link> lower_, upper_;
    std::vector<std::vector<std::size_t>> lower_adj_, upper_adj_;
};

/// Builds the CMRF from the symbolic support of the lower and upper terms:
/// the incidence pattern combined with the zero pattern of d_v and d_t.
CmrfGraph build_cmrf(const IncidencePair& inc, const SgmParams& params);

/// Off-diagonal links of the plain GMRF of omega, |omega_ij| > tol * k.
std::vector<Link> gmrf_links(const EdgePrecision& prec, double tol = 1e-12);

/// CMRF links whose precision entry cancels numerically (|omega_ij| <= tol * k).
std::vector<Link> cancelled_links(const EdgePrecision& prec, const CmrfGraph& graph,
                                  double tol = 1e-12);

using Rng = std::mt19937_64;

/// Draws zero-mean Gaussian edge signals with covariance omega^{-1} using the
/// Cholesky factor of the covariance.
class EdgeSignalSampler {
public:
    explicit EdgeSignalSampler(const EdgePrecision& prec);

    Eigen::VectorXd draw(Rng& rng) const;
    /// Writes one draw into out (resized if needed).
    void draw_into(Rng& rng, Eigen::VectorXd& out) const;

    const Eigen::MatrixXd& factor() const noexcept { return factor_; }

private:
    Eigen::MatrixXd factor_;
};

/// n i.i.d. draws, one per column. Deterministic given the seed.
Eigen::MatrixXd sample(const EdgePrecision& prec, std::size_t n, std::uint64_t seed);

}  // namespace cmrf
