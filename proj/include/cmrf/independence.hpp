#pragma once

#include "cmrf/cmrf_model.hpp"

#include <cstddef>
#include <vector>

namespace cmrf {

using EdgeSet = std::vector<std::size_t>;

/// Edge-index sets A, B and the conditioning set S (empty for color queries).
struct SeparationQuery {
    EdgeSet set_a;
    EdgeSet set_b;
    EdgeSet conditioning_set;
};

/// Throws OverlappingSets if the sets intersect, DimensionMismatch if an index
/// is out of range.
void validate_query(const SeparationQuery& q, std::size_t num_nodes);

/// True iff every path from A to B in the uncolored graph meets S.
/// Vacuously true when A or B is empty.
bool is_graph_separated(const CmrfGraph& g, const SeparationQuery& q);

/// True iff there is no monochromatic path from A to B: no connected component
/// of the lower-only graph, nor of the upper-only graph, touches both sets.
bool is_color_separated(const CmrfGraph& g, const EdgeSet& set_a, const EdgeSet& set_b);

struct IndependenceReport {
    double max_abs = 0.0;    // largest absolute (conditional) cross-covariance
    double tolerance = 0.0;  // pass threshold, already scaled by trace(Sigma)/|E|
    bool passed = false;
    bool vacuous = false;    // A or B was empty

    double margin() const noexcept { return tolerance - max_abs; }
};

/// Marginal independence implied by color separation.
/// Throws NotColorSeparated when the premise does not hold.
IndependenceReport verify_marginal_independence(const EdgePrecision& prec, const CmrfGraph& g,
                                                const EdgeSet& set_a, const EdgeSet& set_b);

/// Overload that reuses a precomputed covariance.
IndependenceReport verify_marginal_independence(const Eigen::MatrixXd& sigma, const CmrfGraph& g,
                                                const EdgeSet& set_a, const EdgeSet& set_b);

/// Conditional independence implied by graph separation, checked through the
/// Schur complement Sigma_AB - Sigma_AS Sigma_SS^{-1} Sigma_SB.
/// Throws NotSeparated when the premise does not hold.
IndependenceReport verify_conditional_independence(const EdgePrecision& prec, const CmrfGraph& g,
                                                   const SeparationQuery& q);

IndependenceReport verify_conditional_independence(const Eigen::MatrixXd& sigma,
                                                   const CmrfGraph& g, const SeparationQuery& q);

inline constexpr double kMarginalTolerance = 1e-9;
inline constexpr double kConditionalTolerance = 1e-8;

}  // namespace cmrf
