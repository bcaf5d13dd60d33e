#include "commands.hpp"

#include "cli_config.hpp"

#include "cmrf/cmrf_model.hpp"
#include "cmrf/documents.hpp"
#include "cmrf/error.hpp"
#include "cmrf/experiment.hpp"
#include "cmrf/independence.hpp"
#include "cmrf/simplicial_complex.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cmrf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Thrown for bad flag combinations detected after parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Residual threshold applied by `model check`.
constexpr double kIdentityThreshold = 1e-10;

std::string join(const EdgeSet& s)
{
    std::string out = "{";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += (i ? "," : "") + std::to_string(s[i]);
    }
    return out + "}";
}

CoefficientRange parse_range(const std::string& text, const std::string& flag)
{
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size() || !std::isfinite(x)) {
            throw UsageError(flag + ": expected a number or low:high, got '" + text + "'");
        }
        return x;
    };
    CoefficientRange r;
    if (const auto colon = text.find(':'); colon != std::string::npos) {
        r.low = number(text.substr(0, colon));
        r.high = number(text.substr(colon + 1));
    } else {
        r.low = r.high = number(text);
    }
    if (r.low < 0.0 || r.low > r.high) {
        throw UsageError(flag + ": expected 0 <= low <= high");
    }
    return r;
}

struct Spectrum {
    std::size_t size = 0;
    double min = 0.0;
    double max = 0.0;
    std::optional<double> smallest_nonzero;
    std::size_t zeros = 0;
};

Spectrum spectrum(const Eigen::MatrixXd& m)
{
    Spectrum s;
    s.size = static_cast<std::size_t>(m.rows());
    if (s.size == 0) {
        return s;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = es.eigenvalues();
    s.min = ev.minCoeff();
    s.max = ev.maxCoeff();
    const double cutoff = 1e-9 * std::max(s.max, 1.0);
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (std::abs(ev(i)) <= cutoff) {
            ++s.zeros;
        } else if (!s.smallest_nonzero || ev(i) < *s.smallest_nonzero) {
            s.smallest_nonzero = ev(i);
        }
    }
    return s;
}

json spectrum_json(const Spectrum& s)
{
    json j{{"size", s.size}, {"min", s.min}, {"max", s.max}, {"zeros", s.zeros}};
    j["smallest_nonzero"] = s.smallest_nonzero ? json(*s.smallest_nonzero) : json(nullptr);
    return j;
}

std::uint64_t choose(std::uint64_t n, std::uint64_t k)
{
    if (k > n) {
        return 0;
    }
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

/// Path to `target` as seen from the directory holding `document`.
std::string reference_from(const fs::path& document, const fs::path& target)
{
    const fs::path dir = fs::absolute(document).parent_path().lexically_normal();
    const fs::path abs = fs::absolute(target).lexically_normal();
    const fs::path rel = abs.lexically_relative(dir);
    return (rel.empty() ? abs : rel).generic_string();
}

// ---------------------------------------------------------------- complex

struct GenerateFlags {
    std::size_t vertices = 0, edges = 0, triangles = 0, max_attempts = 0;
    double p = 0.0;
    std::uint64_t seed = 0;
    bool allow_nontrivial = false;
    bool json = false;
    std::string output, config;
    CLI::Option *o_vertices, *o_edges, *o_triangles, *o_p, *o_seed, *o_attempts, *o_allow;
};

int cmd_generate(const GenerateFlags& f, std::ostream& out, std::ostream& err)
{
    GenerateArgs g;
    if (!f.config.empty()) {
        ConfigFile::load(f.config).apply(g);
    }
    if (f.o_vertices->count()) g.vertices = f.vertices;
    if (f.o_edges->count()) g.edges = f.edges;
    if (f.o_triangles->count()) g.triangles = f.triangles;
    if (f.o_p->count()) g.p = f.p;
    if (f.o_seed->count()) g.seed = f.seed;
    if (f.o_attempts->count()) g.max_attempts = f.max_attempts;
    if (f.o_allow->count()) g.require_trivial_homology = false;

    if (!g.vertices) {
        throw UsageError("--vertices is required");
    }
    const std::size_t n = *g.vertices;
    const std::uint64_t pairs = choose(n, 2);
    double p = 0.0;
    if (g.p) {
        p = *g.p;
    } else if (g.edges) {
        p = pairs == 0 ? 0.0 : std::min(1.0, static_cast<double>(*g.edges) / static_cast<double>(pairs));
    } else {
        throw UsageError("give --p or --edges");
    }

    RandomComplexOptions options;
    options.num_vertices = n;
    options.edge_probability = p;
    options.triangle_budget = g.triangles;
    options.target_edges = g.edges;
    options.require_trivial_homology = g.require_trivial_homology;
    options.max_graph_attempts = g.max_attempts;

    const bool fixed_graph = p == 0.0 || p == 1.0;
    const bool fixed_triangles = p == 0.0 || g.triangles == 0 || g.triangles >= choose(n, 3);
    if (!g.seed && !(fixed_graph && fixed_triangles)) {
        throw UsageError("--seed is required: this generation is randomized");
    }

    const SimplicialComplex2 complex = random_2sc(options, g.seed.value_or(0));
    const HomologySummary h = homology(incidence(complex));

    if (!f.output.empty()) {
        save_complex(f.output, complex);
    } else {
        out << complex_to_json(complex).dump(2) << '\n';
    }
    std::ostream& report = f.output.empty() ? err : out;
    if (f.json) {
        json j{{"vertices", complex.num_vertices()},
               {"edges", complex.num_edges()},
               {"triangles", complex.num_triangles()},
               {"betti1", h.betti1},
               {"trivial_first_homology", h.trivial_first_homology()}};
        j["seed"] = g.seed ? json(*g.seed) : json(nullptr);
        j["output"] = f.output.empty() ? json(nullptr) : json(f.output);
        report << j.dump(2) << '\n';
    } else {
        report << "vertices: " << complex.num_vertices() << '\n'
               << "edges: " << complex.num_edges() << '\n'
               << "triangles: " << complex.num_triangles() << '\n'
               << "trivial first homology: " << (h.trivial_first_homology() ? "yes" : "no") << '\n';
        if (!f.output.empty()) {
            report << "written: " << f.output << '\n';
        }
    }
    return kExitOk;
}

int cmd_inspect(const std::string& path, bool as_json, std::ostream& out)
{
    const SimplicialComplex2 complex = load_complex(path);
    const IncidencePair inc = incidence(complex);
    const HomologySummary h = homology(inc);
    const HodgeLaplacians lap = hodge_laplacians(inc);
    const Spectrum s0 = spectrum(lap.l0);
    const Spectrum s1 = spectrum(lap.l1());
    const Spectrum s2 = spectrum(lap.l2);

    if (as_json) {
        json j{{"vertices", complex.num_vertices()},
               {"edges", complex.num_edges()},
               {"triangles", complex.num_triangles()},
               {"rank_b1", h.rank_b1},
               {"rank_b2", h.rank_b2},
               {"betti", {h.betti0, h.betti1, h.betti2}},
               {"ker_l1_dimension", s1.zeros},
               {"spectra", {{"l0", spectrum_json(s0)}, {"l1", spectrum_json(s1)}, {"l2", spectrum_json(s2)}}}};
        out << j.dump(2) << '\n';
        return kExitOk;
    }

    auto line = [&](const char* name, const Spectrum& s) {
        out << name << " spectrum: ";
        if (s.size == 0) {
            out << "empty\n";
            return;
        }
        out << "min " << s.min << ", max " << s.max << ", smallest nonzero ";
        if (s.smallest_nonzero) {
            out << *s.smallest_nonzero;
        } else {
            out << "none";
        }
        out << ", zero eigenvalues " << s.zeros << '\n';
    };
    const auto precision = out.precision(6);
    out << "vertices: " << complex.num_vertices() << '\n'
        << "edges: " << complex.num_edges() << '\n'
        << "triangles: " << complex.num_triangles() << '\n'
        << "rank B1: " << h.rank_b1 << '\n'
        << "rank B2: " << h.rank_b2 << '\n'
        << "betti numbers: " << h.betti0 << ' ' << h.betti1 << ' ' << h.betti2 << '\n'
        << "dim ker L1: " << s1.zeros << '\n';
    line("L0", s0);
    line("L1", s1);
    line("L2", s2);
    out.precision(precision);
    return kExitOk;
}

// ------------------------------------------------------------------ model

struct BuildFlags {
    std::string complex, output, config, dv, dt;
    std::uint64_t seed = 0;
    double margin = 0.0, k = 0.0;
    bool inline_complex = false;
    bool json = false;
    CLI::Option *o_seed, *o_dv, *o_dt, *o_margin, *o_k;
};

int cmd_build(const BuildFlags& f, std::ostream& out, std::ostream& err)
{
    ModelBuildArgs m;
    if (!f.config.empty()) {
        ConfigFile::load(f.config).apply(m);
    }
    if (f.o_dv->count()) m.dv = parse_range(f.dv, "--dv");
    if (f.o_dt->count()) m.dt = parse_range(f.dt, "--dt");
    if (f.o_margin->count()) m.margin = f.margin;
    if (f.o_k->count()) m.k = f.k;
    if (f.o_seed->count()) m.seed = f.seed;
    if (!(m.margin > 0.0)) {
        throw UsageError("--margin must be positive");
    }
    const bool randomized = m.dv.low != m.dv.high || m.dt.low != m.dt.high;
    if (randomized && !m.seed) {
        throw UsageError("--seed is required when --dv or --dt is a range");
    }

    ModelDocument doc;
    doc.complex = load_complex(f.complex);
    const IncidencePair inc = incidence(doc.complex);

    std::seed_seq seq{static_cast<std::uint32_t>(m.seed.value_or(0)),
                      static_cast<std::uint32_t>(m.seed.value_or(0) >> 32)};
    Rng rng(seq);
    auto draw = [&](std::size_t n, const CoefficientRange& r) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        if (r.low == r.high) {
            v.setConstant(r.low);
            return v;
        }
        std::uniform_real_distribution<double> dist(r.low, r.high);
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            v(i) = dist(rng);
        }
        return v;
    };
    doc.params.d_v = draw(doc.complex.num_vertices(), m.dv);
    doc.params.d_t = draw(doc.complex.num_triangles(), m.dt);

    const double suggested = min_valid_k(inc, doc.params.d_v, doc.params.d_t, m.margin);
    doc.params.k = m.k.value_or(suggested);
    const EdgePrecision prec = build_precision(inc, doc.params);
    const Eigen::Index ne = static_cast<Eigen::Index>(prec.num_edges());
    const bool scaled_identity =
        (prec.omega() - prec.k() * Eigen::MatrixXd::Identity(ne, ne)).cwiseAbs().maxCoeff() == 0.0;

    const bool inline_doc = f.inline_complex || f.output.empty();
    if (!inline_doc) {
        doc.complex_ref = reference_from(f.output, f.complex);
    }
    if (!f.output.empty()) {
        save_model(f.output, doc);
    } else {
        out << model_to_json(doc).dump(2) << '\n';
    }

    std::ostream& report = f.output.empty() ? err : out;
    const double lambda_max = suggested - m.margin;
    if (f.json) {
        json j{{"edges", prec.num_edges()},
               {"k", prec.k()},
               {"lambda_max", lambda_max},
               {"margin", m.margin},
               {"omega_is_k_identity", scaled_identity}};
        j["output"] = f.output.empty() ? json(nullptr) : json(f.output);
        report << j.dump(2) << '\n';
    } else {
        const auto precision = report.precision(12);
        report << "edges: " << prec.num_edges() << '\n'
               << "k: " << prec.k();
        if (m.k) {
            report << " (given; smallest valid k " << suggested << ")\n";
        } else {
            report << " (lambda_max " << lambda_max << " + margin " << m.margin << ")\n";
        }
        if (scaled_identity) {
            report << "omega = k I\n";
        }
        if (!f.output.empty()) {
            report << "written: " << f.output << '\n';
        }
        report.precision(precision);
    }
    return kExitOk;
}

int cmd_check(const std::string& path, bool as_json, std::ostream& out)
{
    const ModelDocument doc = load_model(path);
    const IncidencePair inc = incidence(doc.complex);

    std::optional<EdgePrecision> prec;
    try {
        prec = build_precision(inc, doc.params);
    } catch (const NotPositiveDefinite& e) {
        if (as_json) {
            out << json{{"passed", false},
                        {"positive_definite", false},
                        {"k", doc.params.k},
                        {"suggested_k", e.suggested_k()}}
                       .dump(2)
                << '\n';
        } else {
            out << "FAIL: precision is not positive definite at k = " << doc.params.k
                << "; use k >= " << std::setprecision(12) << e.suggested_k() << '\n';
        }
        return kExitCheckFailed;
    }

    const IdentityResiduals r = check_identities(*prec);
    const std::vector<Link> cancelled = cancelled_links(*prec, build_cmrf(inc, doc.params));
    const bool passed = r.sum < kIdentityThreshold && r.product < kIdentityThreshold &&
                        r.commutator < kIdentityThreshold && r.covariance < kIdentityThreshold &&
                        r.min_eigenvalue > 0.0;
    if (as_json) {
        out << json{{"passed", passed},
                    {"positive_definite", true},
                    {"k", prec->k()},
                    {"threshold", kIdentityThreshold},
                    {"residuals",
                     {{"sum", r.sum},
                      {"product", r.product},
                      {"commutator", r.commutator},
                      {"covariance", r.covariance}}},
                    {"min_eigenvalue", r.min_eigenvalue},
                    {"cancelled_links", cancelled}}
                   .dump(2)
            << '\n';
    } else {
        const auto flags = out.flags();
        const auto precision = out.precision();
        out << std::scientific << std::setprecision(3)
            << "sum residual:        " << r.sum << '\n'
            << "product residual:    " << r.product << '\n'
            << "commutator residual: " << r.commutator << '\n'
            << "covariance residual: " << r.covariance << '\n'
            << "min eigenvalue:      " << r.min_eigenvalue << '\n';
        out << "cancelled links:     " << cancelled.size();
        for (const auto& [i, j] : cancelled) {
            out << ' ' << i << '-' << j;
        }
        out << '\n';
        out.flags(flags);
        out.precision(precision);
        out << (passed ? "PASS" : "FAIL") << '\n';
    }
    return passed ? kExitOk : kExitCheckFailed;
}

// ----------------------------------------------------------------- verify

struct VerifyFlags {
    std::string model;
    EdgeSet a, b, s;
    bool scan = false;
    bool json = false;
};

struct Verdict {
    SeparationQuery query;
    bool separated = false;
    IndependenceReport report;
};

Verdict decide(const Eigen::MatrixXd& sigma, const CmrfGraph& g, const SeparationQuery& q)
{
    Verdict v{q, false, {}};
    if (q.conditioning_set.empty()) {
        v.separated = is_color_separated(g, q.set_a, q.set_b);
        if (v.separated) {
            v.report = verify_marginal_independence(sigma, g, q.set_a, q.set_b);
        }
    } else {
        v.separated = is_graph_separated(g, q);
        if (v.separated) {
            v.report = verify_conditional_independence(sigma, g, q);
        }
    }
    return v;
}

const char* verdict_name(const Verdict& v)
{
    if (!v.separated) {
        return "NOT SEPARATED";
    }
    return v.report.passed ? "PASS" : "FAIL";
}

int cmd_verify(const VerifyFlags& f, std::ostream& out)
{
    if (f.scan && (!f.a.empty() || !f.b.empty())) {
        throw UsageError("--scan-singletons cannot be combined with --a or --b");
    }
    if (!f.scan && (f.a.empty() || f.b.empty())) {
        throw UsageError("--a and --b are required unless --scan-singletons is given");
    }

    const ModelDocument doc = load_model(f.model);
    const IncidencePair inc = incidence(doc.complex);
    const EdgePrecision prec = build_precision(inc, doc.params);
    const CmrfGraph graph = build_cmrf(inc, doc.params);
    const Eigen::MatrixXd sigma = covariance(prec);
    const std::size_t n = prec.num_edges();

    std::vector<Verdict> verdicts;
    if (f.scan) {
        validate_query({{}, {}, f.s}, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (std::find(f.s.begin(), f.s.end(), i) != f.s.end() ||
                    std::find(f.s.begin(), f.s.end(), j) != f.s.end()) {
                    continue;
                }
                Verdict v = decide(sigma, graph, {{i}, {j}, f.s});
                if (v.separated) {
                    verdicts.push_back(std::move(v));
                }
            }
        }
    } else {
        const SeparationQuery q{f.a, f.b, f.s};
        validate_query(q, n);
        verdicts.push_back(decide(sigma, graph, q));
    }

    const bool passed = std::all_of(verdicts.begin(), verdicts.end(),
                                    [](const Verdict& v) { return !v.separated || v.report.passed; });

    if (f.json) {
        json list = json::array();
        for (const auto& v : verdicts) {
            json j{{"a", v.query.set_a},
                   {"b", v.query.set_b},
                   {"s", v.query.conditioning_set},
                   {"kind", v.query.conditioning_set.empty() ? "marginal" : "conditional"},
                   {"verdict", verdict_name(v)}};
            if (v.separated) {
                j["max_abs"] = v.report.max_abs;
                j["tolerance"] = v.report.tolerance;
                j["margin"] = v.report.margin();
            }
            list.push_back(std::move(j));
        }
        json doc_out{{"passed", passed}, {"results", std::move(list)}};
        if (f.scan) {
            doc_out["scanned_pairs"] = verdicts.size();
        }
        out << doc_out.dump(2) << '\n';
        return passed ? kExitOk : kExitCheckFailed;
    }

    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::scientific << std::setprecision(3);
    for (const auto& v : verdicts) {
        out << verdict_name(v) << "  A=" << join(v.query.set_a) << " B=" << join(v.query.set_b);
        if (!v.query.conditioning_set.empty()) {
            out << " S=" << join(v.query.conditioning_set);
        }
        if (v.separated) {
            out << "  max|cov| " << v.report.max_abs << "  tol " << v.report.tolerance
                << "  margin " << v.report.margin();
        }
        out << '\n';
    }
    if (f.scan) {
        const auto failures = std::count_if(verdicts.begin(), verdicts.end(),
                                            [](const Verdict& v) { return !v.report.passed; });
        out << "scanned " << verdicts.size() << " separated singleton pairs, " << failures
            << " failed\n";
    }
    out.flags(flags);
    out.precision(precision);
    return passed ? kExitOk : kExitCheckFailed;
}

// --------------------------------------------------------------- simulate

struct SimulateFlags {
    std::string config, complex, output, summary, combination, step_scaling;
    std::uint64_t seed = 0;
    std::size_t runs = 0, iterations = 0, threads = 0;
    double mu = 0.0;
    std::vector<std::string> variants;
    bool json = false;
    CLI::Option *o_seed, *o_runs, *o_iterations, *o_threads, *o_mu, *o_variants, *o_combination,
        *o_scaling;
};

int cmd_simulate(const SimulateFlags& f, std::ostream& out, std::ostream& err)
{
    SimulateArgs args;
    if (!f.config.empty()) {
        ConfigFile::load(f.config).apply(args);
    }
    ExperimentConfig& ex = args.experiment;
    if (f.o_seed->count()) args.seed = f.seed;
    if (f.o_runs->count()) ex.num_runs = f.runs;
    if (f.o_iterations->count()) ex.num_iterations = f.iterations;
    if (f.o_threads->count()) ex.threads = f.threads;
    if (f.o_mu->count()) ex.step_size = f.mu;
    if (f.o_variants->count()) {
        ex.variants.clear();
        for (const auto& name : f.variants) {
            ex.variants.push_back(parse_variant(name));
        }
    }
    if (f.o_combination->count()) {
        ex.combination = f.combination == "metropolis" ? CombinationRule::metropolis
                                                       : CombinationRule::uniform;
    }
    if (f.o_scaling->count()) {
        ex.step_scaling = f.step_scaling == "none" ? StepScaling::none : StepScaling::matched_rate;
    }
    if (!f.complex.empty()) {
        args.complex_file = f.complex;
    }
    if (!args.seed) {
        throw UsageError("--seed is required");
    }
    ex.seed = *args.seed;
    if (args.complex_file) {
        ex.fixed_complex = load_complex(*args.complex_file);
    }
    ex.validate();

    const ExperimentResult result = run_experiment(ex);

    std::ostringstream csv;
    write_csv(csv, result);
    if (!f.output.empty()) {
        write_text_file(f.output, csv.str());
    } else {
        out << csv.str();
    }

    std::ostringstream summary;
    if (f.json) {
        std::vector<const VariantCurve*> order;
        json curves = json::array();
        for (const auto& c : result.curves) {
            order.push_back(&c);
            curves.push_back({{"variant", variant_name(c.variant)},
                              {"steady_state_msd", c.steady_state_msd},
                              {"steady_state_db", c.steady_state_db()}});
        }
        std::stable_sort(order.begin(), order.end(), [](const auto* x, const auto* y) {
            return x->steady_state_msd < y->steady_state_msd;
        });
        json ordering = json::array();
        for (const auto* c : order) {
            ordering.push_back(variant_name(c->variant));
        }
        summary << json{{"runs", result.num_runs},
                        {"iterations", result.num_iterations},
                        {"seed", ex.seed},
                        {"curves", std::move(curves)},
                        {"ordering", std::move(ordering)}}
                       .dump(2)
                << '\n';
    } else {
        write_summary(summary, result);
    }
    if (!f.summary.empty()) {
        write_text_file(f.summary, summary.str());
    }
    (f.output.empty() ? err : out) << summary.str();
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Colored Markov random fields for edge signals on simplicial complexes", "cmrf"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    // complex
    auto* complex_cmd = app.add_subcommand("complex", "Generate or inspect simplicial complexes");
    complex_cmd->require_subcommand(1);

    GenerateFlags gen;
    auto* generate = complex_cmd->add_subcommand("generate", "Random 2-complex on an Erdos-Renyi graph");
    gen.o_vertices = generate->add_option("--vertices", gen.vertices, "Number of vertices");
    gen.o_edges = generate->add_option("--edges", gen.edges, "Exact number of edges");
    gen.o_p = generate->add_option("--p", gen.p, "Edge probability (default edges / C(n,2))")
                  ->check(CLI::Range(0.0, 1.0));
    gen.o_triangles = generate->add_option("--triangles", gen.triangles, "Number of filled triangles");
    gen.o_seed = generate->add_option("--seed", gen.seed, "Random seed");
    gen.o_attempts = generate->add_option("--max-attempts", gen.max_attempts, "Graph resampling budget");
    gen.o_allow = generate->add_flag("--allow-nontrivial-homology", gen.allow_nontrivial,
                                     "Accept complexes with harmonic edge flows");
    generate->add_option("-o,--output", gen.output, "Complex document to write (stdout if absent)");
    generate->add_option("--config", gen.config, "Configuration file")->check(CLI::ExistingFile);
    generate->add_flag("--json", gen.json, "Machine-readable summary");

    std::string inspect_path;
    bool inspect_json = false;
    auto* inspect = complex_cmd->add_subcommand("inspect", "Incidence ranks and Laplacian spectra");
    inspect->add_option("complex", inspect_path, "Complex document")->required()->check(CLI::ExistingFile);
    inspect->add_flag("--json", inspect_json, "Machine-readable output");

    // model
    auto* model_cmd = app.add_subcommand("model", "Build or check edge precision models");
    model_cmd->require_subcommand(1);

    BuildFlags build;
    auto* build_cmd = model_cmd->add_subcommand("build", "Draw coefficients and choose k");
    build_cmd->add_option("--complex", build.complex, "Complex document")->required()->check(CLI::ExistingFile);
    build.o_seed = build_cmd->add_option("--seed", build.seed, "Random seed");
    build.o_dv = build_cmd->add_option("--dv", build.dv, "Vertex coefficients: value or low:high");
    build.o_dt = build_cmd->add_option("--dt", build.dt, "Triangle coefficients: value or low:high");
    build.o_margin = build_cmd->add_option("--margin", build.margin, "Added to lambda_max when choosing k");
    build.o_k = build_cmd->add_option("--k", build.k, "Use this k instead");
    build_cmd->add_option("-o,--output", build.output, "Model document to write (stdout if absent)");
    build_cmd->add_flag("--inline", build.inline_complex, "Embed the complex instead of referencing it");
    build_cmd->add_option("--config", build.config, "Configuration file")->check(CLI::ExistingFile);
    build_cmd->add_flag("--json", build.json, "Machine-readable summary");

    std::string check_path;
    bool check_json = false;
    auto* check_cmd = model_cmd->add_subcommand("check", "Verify the factorization identities");
    check_cmd->add_option("model", check_path, "Model document")->required()->check(CLI::ExistingFile);
    check_cmd->add_flag("--json", check_json, "Machine-readable output");

    // verify
    VerifyFlags verify;
    auto* verify_cmd = app.add_subcommand("verify", "Check independence statements implied by separation");
    verify_cmd->add_option("model", verify.model, "Model document")->required()->check(CLI::ExistingFile);
    verify_cmd->add_option("--a", verify.a, "Edge indices of A")->delimiter(',');
    verify_cmd->add_option("--b", verify.b, "Edge indices of B")->delimiter(',');
    verify_cmd->add_option("--s", verify.s, "Edge indices of the conditioning set")->delimiter(',');
    verify_cmd->add_flag("--scan-singletons", verify.scan, "Check every separated pair of single edges");
    verify_cmd->add_flag("--json", verify.json, "Machine-readable output");

    // simulate
    SimulateFlags sim;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo MSD experiment");
    sim_cmd->add_option("--config", sim.config, "Configuration file")->check(CLI::ExistingFile);
    sim.o_seed = sim_cmd->add_option("--seed", sim.seed, "Master seed");
    sim.o_runs = sim_cmd->add_option("--runs", sim.runs, "Monte Carlo runs");
    sim.o_iterations = sim_cmd->add_option("--iterations", sim.iterations, "Iterations per run");
    sim.o_mu = sim_cmd->add_option("--mu", sim.mu, "Step size");
    sim.o_variants = sim_cmd->add_option("--variants", sim.variants, "Comma-separated variant names")
                         ->delimiter(',');
    sim.o_threads = sim_cmd->add_option("--threads", sim.threads, "Worker threads");
    sim_cmd->add_option("--complex", sim.complex, "Use this complex in every run")->check(CLI::ExistingFile);
    sim.o_combination = sim_cmd->add_option("--combination", sim.combination, "uniform or metropolis")
                            ->check(CLI::IsMember({"uniform", "metropolis"}));
    sim.o_scaling = sim_cmd->add_option("--step-scaling", sim.step_scaling, "matched_rate or none")
                        ->check(CLI::IsMember({"matched_rate", "none"}));
    sim_cmd->add_option("-o,--output", sim.output, "CSV file (stdout if absent)");
    sim_cmd->add_option("--summary", sim.summary, "Also write the summary here");
    sim_cmd->add_flag("--json", sim.json, "Machine-readable summary");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (generate->parsed()) return cmd_generate(gen, out, err);
        if (inspect->parsed()) return cmd_inspect(inspect_path, inspect_json, out);
        if (build_cmd->parsed()) return cmd_build(build, out, err);
        if (check_cmd->parsed()) return cmd_check(check_path, check_json, out);
        if (verify_cmd->parsed()) return cmd_verify(verify, out);
        if (sim_cmd->parsed()) return cmd_simulate(sim, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const OverlappingSets& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DimensionMismatch& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NotPositiveDefinite& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitUsage;
}

}  // namespace cmrf::cli
