#include "cmrf/independence.hpp"

#include "cmrf/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cmrf {

namespace {

void check_range(const EdgeSet& s, std::size_t n, const char* name)
{
    for (std::size_t i : s) {
        if (i >= n) {
            throw DimensionMismatch(std::string(name) + " contains index " + std::to_string(i) +
                                    " but the graph has " + std::to_string(n) + " nodes");
        }
    }
}

// 0 = unassigned, otherwise 1-based set tag.
std::vector<int> tag_sets(std::size_t n, std::initializer_list<const EdgeSet*> sets)
{
    std::vector<int> tag(n, 0);
    int id = 0;
    for (const EdgeSet* s : sets) {
        ++id;
        for (std::size_t i : *s) {
            if (tag[i] != 0 && tag[i] != id) {
                throw OverlappingSets("edge " + std::to_string(i) + " appears in more than one set");
            }
            tag[i] = id;
        }
    }
    return tag;
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x)
    {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

bool components_touch_both(const std::vector<Link>& links, std::size_t n, const EdgeSet& a,
                           const EdgeSet& b)
{
    DisjointSets ds(n);
    for (const auto& [i, j] : links) {
        ds.unite(i, j);
    }
    std::vector<char> reaches_a(n, 0);
    for (std::size_t i : a) {
        reaches_a[ds.find(i)] = 1;
    }
    return std::any_of(b.begin(), b.end(), [&](std::size_t j) { return reaches_a[ds.find(j)] != 0; });
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& m, const EdgeSet& rows, const EdgeSet& cols)
{
    Eigen::MatrixXd out(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                m(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(cols[c]));
        }
    }
    return out;
}

EdgeSet distinct(EdgeSet s)
{
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

double scaled(double factor, const Eigen::MatrixXd& sigma)
{
    return factor * sigma.trace() / static_cast<double>(sigma.rows());
}

}  // namespace

void validate_query(const SeparationQuery& q, std::size_t num_nodes)
{
    check_range(q.set_a, num_nodes, "set A");
    check_range(q.set_b, num_nodes, "set B");
    check_range(q.conditioning_set, num_nodes, "conditioning set");
    tag_sets(num_nodes, {&q.set_a, &q.set_b, &q.conditioning_set});
}

bool is_graph_separated(const CmrfGraph& g, const SeparationQuery& q)
{
    validate_query(q, g.num_nodes());
    if (q.set_a.empty() || q.set_b.empty()) {
        return true;
    }
    const auto tag = tag_sets(g.num_nodes(), {&q.set_a, &q.set_b, &q.conditioning_set});
    constexpr int kB = 2;
    constexpr int kS = 3;

    std::vector<char> seen(g.num_nodes(), 0);
    std::vector<std::size_t> frontier(q.set_a.begin(), q.set_a.end());
    for (std::size_t i : frontier) {
        seen[i] = 1;
    }
    while (!frontier.empty()) {
        const std::size_t node = frontier.back();
        frontier.pop_back();
        if (tag[node] == kB) {
            return false;
        }
        auto visit = [&](const std::vector<std::size_t>& nbrs) {
            for (std::size_t next : nbrs) {
                if (!seen[next] && tag[next] != kS) {
                    seen[next] = 1;
                    frontier.push_back(next);
                }
            }
        };
        visit(g.lower_neighbors(node));
        visit(g.upper_neighbors(node));
    }
    return true;
}

bool is_color_separated(const CmrfGraph& g, const EdgeSet& set_a, const EdgeSet& set_b)
{
    validate_query({set_a, set_b, {}}, g.num_nodes());
    if (set_a.empty() || set_b.empty()) {
        return true;
    }
    const std::size_t n = g.num_nodes();
    return !components_touch_both(g.lower_links(), n, set_a, set_b) &&
           !components_touch_both(g.upper_links(), n, set_a, set_b);
}

IndependenceReport verify_marginal_independence(const Eigen::MatrixXd& sigma, const CmrfGraph& g,
                                                const EdgeSet& set_a, const EdgeSet& set_b)
{
    if (static_cast<std::size_t>(sigma.rows()) != g.num_nodes()) {
        throw DimensionMismatch("covariance size does not match the graph");
    }
    if (!is_color_separated(g, set_a, set_b)) {
        throw NotColorSeparated("the sets are joined by a monochromatic path");
    }
    IndependenceReport report;
    report.vacuous = set_a.empty() || set_b.empty();
    report.tolerance = scaled(kMarginalTolerance, sigma);
    if (!report.vacuous) {
        report.max_abs = gather(sigma, set_a, set_b).cwiseAbs().maxCoeff();
    }
    report.passed = report.max_abs <= report.tolerance;
    return report;
}

IndependenceReport verify_marginal_independence(const EdgePrecision& prec, const CmrfGraph& g,
                                                const EdgeSet& set_a, const EdgeSet& set_b)
{
    return verify_marginal_independence(covariance(prec), g, set_a, set_b);
}

IndependenceReport verify_conditional_independence(const Eigen::MatrixXd& sigma,
                                                   const CmrfGraph& g, const SeparationQuery& q)
{
    if (static_cast<std::size_t>(sigma.rows()) != g.num_nodes()) {
        throw DimensionMismatch("covariance size does not match the graph");
    }
    if (!is_graph_separated(g, q)) {
        throw NotSeparated("a path from A to B avoids the conditioning set");
    }
    IndependenceReport report;
    report.vacuous = q.set_a.empty() || q.set_b.empty();
    report.tolerance = scaled(kConditionalTolerance, sigma);
    if (!report.vacuous) {
        Eigen::MatrixXd cross = gather(sigma, q.set_a, q.set_b);
        if (!q.conditioning_set.empty()) {
            // A repeated index would make Sigma_SS singular.
            const EdgeSet s = distinct(q.conditioning_set);
            const Eigen::MatrixXd sigma_ss = gather(sigma, s, s);
            const Eigen::MatrixXd sigma_sb = gather(sigma, s, q.set_b);
            cross -= gather(sigma, q.set_a, s) * sigma_ss.llt().solve(sigma_sb);
        }
        report.max_abs = cross.cwiseAbs().maxCoeff();
    }
    report.passed = report.max_abs <= report.tolerance;
    return report;
}

IndependenceReport verify_conditional_independence(const EdgePrecision& prec, const CmrfGraph& g,
                                                   const SeparationQuery& q)
{
    return verify_conditional_independence(covariance(prec), g, q);
}

}  // namespace cmrf
