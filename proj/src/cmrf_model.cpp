#include "cmrf/cmrf_model.hpp"

#include "cmrf/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cmrf {

namespace {

void check_coefficients(const IncidencePair& inc, const Eigen::VectorXd& d_v,
                        const Eigen::VectorXd& d_t)
{
    if (static_cast<std::size_t>(d_v.size()) != inc.num_vertices()) {
        throw DimensionMismatch("d_v has " + std::to_string(d_v.size()) + " entries, complex has " +
                                std::to_string(inc.num_vertices()) + " vertices");
    }
    if (static_cast<std::size_t>(d_t.size()) != inc.num_triangles()) {
        throw DimensionMismatch("d_t has " + std::to_string(d_t.size()) + " entries, complex has " +
                                std::to_string(inc.num_triangles()) + " triangles");
    }
    auto admissible = [](double x) { return std::isfinite(x) && x >= 0.0; };
    for (Eigen::Index i = 0; i < d_v.size(); ++i) {
        if (!admissible(d_v(i))) {
            throw std::invalid_argument("d_v[" + std::to_string(i) + "] must be finite and >= 0");
        }
    }
    for (Eigen::Index i = 0; i < d_t.size(); ++i) {
        if (!admissible(d_t(i))) {
            throw std::invalid_argument("d_t[" + std::to_string(i) + "] must be finite and >= 0");
        }
    }
}

Eigen::MatrixXd lower_term(const IncidencePair& inc, const Eigen::VectorXd& d_v)
{
    const Eigen::MatrixXd b1 = inc.b1.cast<double>();
    return b1.transpose() * d_v.asDiagonal() * b1;
}

Eigen::MatrixXd upper_term(const IncidencePair& inc, const Eigen::VectorXd& d_t)
{
    const Eigen::MatrixXd b2 = inc.b2.cast<double>();
    return b2 * d_t.asDiagonal() * b2.transpose();
}

double largest_eigenvalue(const Eigen::MatrixXd& sym)
{
    if (sym.rows() == 0) {
        return 0.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff();
}

double smallest_eigenvalue(const Eigen::MatrixXd& sym)
{
    if (sym.rows() == 0) {
        return 0.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m)
{
    const auto n = m.rows();
    Eigen::MatrixXd inv = m.llt().solve(Eigen::MatrixXd::Identity(n, n));
    return 0.5 * (inv + inv.transpose());
}

double max_abs(const Eigen::MatrixXd& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

std::vector<Link> normalize(std::vector<Link> links, std::size_t n)
{
    for (auto& l : links) {
        if (l.first == l.second) {
            throw DimensionMismatch("self loop on node " + std::to_string(l.first));
        }
        if (l.first >= n || l.second >= n) {
            throw DimensionMismatch("link (" + std::to_string(l.first) + ", " +
                                    std::to_string(l.second) + ") outside " + std::to_string(n) +
                                    " nodes");
        }
        if (l.first > l.second) {
            std::swap(l.first, l.second);
        }
    }
    std::sort(links.begin(), links.end());
    links.erase(std::unique(links.begin(), links.end()), links.end());
    return links;
}

std::vector<std::vector<std::size_t>> adjacency(const std::vector<Link>& links, std::size_t n)
{
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& [a, b] : links) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& row : adj) {
        std::sort(row.begin(), row.end());
    }
    return adj;
}

void link_clique(const std::vector<std::size_t>& members, std::vector<Link>& out)
{
    for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
            out.emplace_back(members[a], members[b]);
        }
    }
}

}  // namespace

EdgePrecision build_precision(const IncidencePair& inc, const SgmParams& params)
{
    check_coefficients(inc, params.d_v, params.d_t);
    if (!(std::isfinite(params.k) && params.k > 0.0)) {
        throw std::invalid_argument("k must be a positive finite number");
    }

    const auto ne = static_cast<Eigen::Index>(inc.num_edges());
    const Eigen::MatrixXd k_identity = params.k * Eigen::MatrixXd::Identity(ne, ne);

    EdgePrecision prec;
    prec.k_ = params.k;
    prec.lower_ = lower_term(inc, params.d_v);
    prec.upper_ = upper_term(inc, params.d_t);
    prec.omega_d_ = k_identity - prec.lower_;
    prec.omega_u_ = k_identity - prec.upper_;
    prec.omega_ = k_identity - prec.lower_ - prec.upper_;

    const double lambda_min = smallest_eigenvalue(prec.omega_);
    if (ne > 0 && !(lambda_min > 1e-9 * params.k)) {
        const double suggested = min_valid_k(inc, params.d_v, params.d_t);
        std::ostringstream os;
        os << "precision is not positive definite (k = " << params.k
           << ", smallest eigenvalue " << lambda_min << "); use k >= " << suggested;
        throw NotPositiveDefinite(os.str(), suggested);
    }
    return prec;
}

double min_valid_k(const IncidencePair& inc, const Eigen::VectorXd& d_v, const Eigen::VectorXd& d_t,
                   double margin)
{
    check_coefficients(inc, d_v, d_t);
    return largest_eigenvalue(lower_term(inc, d_v) + upper_term(inc, d_t)) + margin;
}

Eigen::MatrixXd covariance(const EdgePrecision& prec)
{
    return spd_inverse(prec.omega());
}

Eigen::MatrixXd covariance_from_factors(const EdgePrecision& prec)
{
    const auto n = static_cast<Eigen::Index>(prec.num_edges());
    return spd_inverse(prec.omega_u()) + spd_inverse(prec.omega_d()) -
           Eigen::MatrixXd::Identity(n, n) / prec.k();
}

double IdentityResiduals::worst() const
{
    return std::max({sum, product, commutator, covariance});
}

IdentityResiduals check_identities(const EdgePrecision& prec)
{
    IdentityResiduals r;
    const auto n = static_cast<Eigen::Index>(prec.num_edges());
    if (n == 0) {
        return r;
    }
    const double k = prec.k();
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd du = prec.omega_d() * prec.omega_u();
    const Eigen::MatrixXd ud = prec.omega_u() * prec.omega_d();

    r.sum = max_abs(prec.omega() - (prec.omega_d() + prec.omega_u() - k * identity)) / k;
    r.product = max_abs(k * prec.omega() - du) / (k * k);
    r.commutator = max_abs(du - ud) / (k * k);

    const Eigen::MatrixXd sigma = covariance(prec);
    const double scale = sigma.trace() / static_cast<double>(n);
    r.covariance = max_abs(sigma - covariance_from_factors(prec)) / scale;
    r.min_eigenvalue = smallest_eigenvalue(prec.omega());
    return r;
}

CmrfGraph::CmrfGraph(std::size_t num_nodes, std::vector<Link> lower_links,
                     std::vector<Link> upper_links)
    : lower_(normalize(std::move(lower_links), num_nodes)),
      upper_(normalize(std::move(upper_links), num_nodes)),
      lower_adj_(adjacency(lower_, num_nodes)),
      upper_adj_(adjacency(upper_, num_nodes))
{
}

bool CmrfGraph::has_lower(std::size_t i, std::size_t j) const
{
    const auto& n = lower_adj_.at(i);
    return std::binary_search(n.begin(), n.end(), j);
}

bool CmrfGraph::has_upper(std::size_t i, std::size_t j) const
{
    const auto& n = upper_adj_.at(i);
    return std::binary_search(n.begin(), n.end(), j);
}

CmrfGraph build_cmrf(const IncidencePair& inc, const SgmParams& params)
{
    check_coefficients(inc, params.d_v, params.d_t);

    std::vector<Link> lower, upper;
    for (Eigen::Index v = 0; v < inc.b1.rows(); ++v) {
        if (params.d_v(v) == 0.0) {
            continue;
        }
        std::vector<std::size_t> star;
        for (Eigen::Index e = 0; e < inc.b1.cols(); ++e) {
            if (inc.b1(v, e) != 0) {
                star.push_back(static_cast<std::size_t>(e));
            }
        }
        link_clique(star, lower);
    }
    for (Eigen::Index t = 0; t < inc.b2.cols(); ++t) {
        if (params.d_t(t) == 0.0) {
            continue;
        }
        std::vector<std::size_t> boundary;
        for (Eigen::Index e = 0; e < inc.b2.rows(); ++e) {
            if (inc.b2(e, t) != 0) {
                boundary.push_back(static_cast<std::size_t>(e));
            }
        }
        link_clique(boundary, upper);
    }
    return CmrfGraph(inc.num_edges(), std::move(lower), std::move(upper));
}

std::vector<Link> gmrf_links(const EdgePrecision& prec, double tol)
{
    std::vector<Link> out;
    const auto& omega = prec.omega();
    for (Eigen::Index i = 0; i < omega.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < omega.cols(); ++j) {
            if (std::abs(omega(i, j)) > tol * prec.k()) {
                out.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            }
        }
    }
    return out;
}

std::vector<Link> cancelled_links(const EdgePrecision& prec, const CmrfGraph& graph, double tol)
{
    std::vector<Link> all = graph.lower_links();
    all.insert(all.end(), graph.upper_links().begin(), graph.upper_links().end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());

    std::vector<Link> out;
    for (const auto& [i, j] : all) {
        const double entry = prec.omega()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (std::abs(entry) <= tol * prec.k()) {
            out.emplace_back(i, j);
        }
    }
    return out;
}

EdgeSignalSampler::EdgeSignalSampler(const EdgePrecision& prec)
{
    Eigen::LLT<Eigen::MatrixXd> llt(covariance(prec));
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("covariance factorization failed", prec.k());
    }
    factor_ = llt.matrixL();
}

void EdgeSignalSampler::draw_into(Rng& rng, Eigen::VectorXd& out) const
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd z(factor_.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        z(i) = gauss(rng);
    }
    out.noalias() = factor_.triangularView<Eigen::Lower>() * z;
}

Eigen::VectorXd EdgeSignalSampler::draw(Rng& rng) const
{
    Eigen::VectorXd out(factor_.rows());
    draw_into(rng, out);
    return out;
}

Eigen::MatrixXd sample(const EdgePrecision& prec, std::size_t n, std::uint64_t seed)
{
    if (n == 0) {
        throw std::invalid_argument("sample count must be at least 1");
    }
    const EdgeSignalSampler sampler(prec);
    Rng rng(seed);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(prec.num_edges()), static_cast<Eigen::Index>(n));
    Eigen::VectorXd draw;
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        sampler.draw_into(rng, draw);
        out.col(c) = draw;
    }
    return out;
}

}  // namespace cmrf
