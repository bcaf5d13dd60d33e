#include "cli_config.hpp"

#include "cmrf/documents.hpp"
#include "cmrf/error.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <set>
#include <string>
#include <vector>

namespace cmrf::cli {

struct ConfigFile::Impl {
    YAML::Node root;
    std::string origin;
    std::filesystem::path base_dir;
};

namespace {

using Impl = ConfigFile::Impl;

std::string location(const Impl& cfg, const YAML::Node& node)
{
    const auto mark = node.Mark();
    if (mark.line < 0) {
        return cfg.origin;
    }
    return cfg.origin + ":" + std::to_string(mark.line + 1);
}

[[noreturn]] void fail(const Impl& cfg, const YAML::Node& node, const std::string& key,
                       const std::string& message)
{
    throw ConfigError(location(cfg, node) + ": " + key + ": " + message);
}

/// Returns the section map, or an undefined node if absent. Rejects unknown keys.
YAML::Node section(const Impl& cfg, const char* name, const std::set<std::string>& allowed)
{
    YAML::Node node = cfg.root[name];
    if (!node) {
        return node;
    }
    if (!node.IsMap()) {
        fail(cfg, node, name, "expected a mapping");
    }
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) {
            fail(cfg, kv.first, std::string(name) + "." + key, "unknown key");
        }
    }
    return node;
}

double real(const Impl& cfg, const YAML::Node& node, const std::string& key)
{
    try {
        const double x = node.as<double>();
        if (!std::isfinite(x)) {
            fail(cfg, node, key, "expected a finite number");
        }
        return x;
    } catch (const YAML::Exception&) {
        fail(cfg, node, key, "expected a number");
    }
}

std::uint64_t count(const Impl& cfg, const YAML::Node& node, const std::string& key)
{
    try {
        if (!node.IsScalar() || node.Scalar().empty() || node.Scalar()[0] == '-') {
            fail(cfg, node, key, "expected a non-negative integer");
        }
        return node.as<std::uint64_t>();
    } catch (const YAML::Exception&) {
        fail(cfg, node, key, "expected a non-negative integer");
    }
}

bool flag(const Impl& cfg, const YAML::Node& node, const std::string& key)
{
    try {
        return node.as<bool>();
    } catch (const YAML::Exception&) {
        fail(cfg, node, key, "expected true or false");
    }
}

std::string text(const Impl& cfg, const YAML::Node& node, const std::string& key)
{
    if (!node.IsScalar()) {
        fail(cfg, node, key, "expected a string");
    }
    return node.Scalar();
}

CoefficientRange range(const Impl& cfg, const YAML::Node& node, const std::string& key)
{
    CoefficientRange r;
    if (node.IsSequence()) {
        if (node.size() != 2) {
            fail(cfg, node, key, "expected [low, high]");
        }
        r.low = real(cfg, node[0], key);
        r.high = real(cfg, node[1], key);
    } else {
        r.low = r.high = real(cfg, node, key);
    }
    if (r.low < 0.0 || r.low > r.high) {
        fail(cfg, node, key, "expected 0 <= low <= high");
    }
    return r;
}

std::filesystem::path resolve(const Impl& cfg, const std::string& p)
{
    std::filesystem::path path(p);
    return path.is_absolute() ? path : cfg.base_dir / path;
}

}  // namespace

ConfigFile::ConfigFile(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
ConfigFile::ConfigFile(ConfigFile&&) noexcept = default;
ConfigFile& ConfigFile::operator=(ConfigFile&&) noexcept = default;
ConfigFile::~ConfigFile() = default;

ConfigFile ConfigFile::parse(const std::string& contents, const std::string& origin)
{
    auto impl = std::make_unique<Impl>();
    impl->origin = origin;
    try {
        impl->root = YAML::Load(contents);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (impl->root.IsNull()) {
        impl->root = YAML::Node(YAML::NodeType::Map);
    }
    if (!impl->root.IsMap()) {
        throw ConfigError(origin + ": the top level must be a mapping of sections");
    }
    static const std::set<std::string> sections{"complex", "model", "simulate"};
    for (const auto& kv : impl->root) {
        const auto key = kv.first.as<std::string>();
        if (!sections.count(key)) {
            fail(*impl, kv.first, key, "unknown section (expected complex, model or simulate)");
        }
    }
    return ConfigFile(std::move(impl));
}

ConfigFile ConfigFile::load(const std::filesystem::path& path)
{
    ConfigFile cfg = parse(read_text_file(path), path.string());
    cfg.impl_->base_dir = path.parent_path();
    return cfg;
}

void ConfigFile::apply(GenerateArgs& args) const
{
    const Impl& cfg = *impl_;
    const YAML::Node s = section(cfg, "complex",
                                 {"vertices", "edges", "p", "triangles", "seed",
                                  "require_trivial_homology", "max_attempts"});
    if (!s) {
        return;
    }
    if (s["vertices"]) args.vertices = count(cfg, s["vertices"], "complex.vertices");
    if (s["edges"]) args.edges = count(cfg, s["edges"], "complex.edges");
    if (s["p"]) {
        const double p = real(cfg, s["p"], "complex.p");
        if (p < 0.0 || p > 1.0) {
            fail(cfg, s["p"], "complex.p", "expected a probability in [0, 1]");
        }
        args.p = p;
    }
    if (s["triangles"]) args.triangles = count(cfg, s["triangles"], "complex.triangles");
    if (s["seed"]) args.seed = count(cfg, s["seed"], "complex.seed");
    if (s["require_trivial_homology"]) {
        args.require_trivial_homology =
            flag(cfg, s["require_trivial_homology"], "complex.require_trivial_homology");
    }
    if (s["max_attempts"]) args.max_attempts = count(cfg, s["max_attempts"], "complex.max_attempts");
}

void ConfigFile::apply(ModelBuildArgs& args) const
{
    const Impl& cfg = *impl_;
    const YAML::Node s = section(cfg, "model", {"dv", "dt", "margin", "k", "seed"});
    if (!s) {
        return;
    }
    if (s["dv"]) args.dv = range(cfg, s["dv"], "model.dv");
    if (s["dt"]) args.dt = range(cfg, s["dt"], "model.dt");
    if (s["margin"]) {
        args.margin = real(cfg, s["margin"], "model.margin");
        if (args.margin <= 0.0) {
            fail(cfg, s["margin"], "model.margin", "expected a positive number");
        }
    }
    if (s["k"]) args.k = real(cfg, s["k"], "model.k");
    if (s["seed"]) args.seed = count(cfg, s["seed"], "model.seed");
}

void ConfigFile::apply(SimulateArgs& args) const
{
    const Impl& cfg = *impl_;
    ExperimentConfig& ex = args.experiment;

    GenerateArgs gen;
    gen.vertices = ex.complex_options.num_vertices;
    gen.edges = ex.complex_options.target_edges;
    gen.triangles = ex.complex_options.triangle_budget;
    gen.max_attempts = ex.complex_options.max_graph_attempts;
    apply(gen);
    ex.complex_options.num_vertices = *gen.vertices;
    ex.complex_options.target_edges = gen.edges;
    ex.complex_options.triangle_budget = gen.triangles;
    ex.complex_options.require_trivial_homology = gen.require_trivial_homology;
    ex.complex_options.max_graph_attempts = gen.max_attempts;
    if (gen.p) {
        ex.complex_options.edge_probability = *gen.p;
    } else if (gen.edges && *gen.vertices >= 2) {
        const double pairs = static_cast<double>(*gen.vertices * (*gen.vertices - 1) / 2);
        ex.complex_options.edge_probability = std::min(1.0, static_cast<double>(*gen.edges) / pairs);
    }

    ModelBuildArgs model;
    model.dv = ex.vertex_coefficients;
    model.dt = ex.triangle_coefficients;
    model.margin = ex.k_margin;
    apply(model);
    ex.vertex_coefficients = model.dv;
    ex.triangle_coefficients = model.dt;
    ex.k_margin = model.margin;

    const YAML::Node s = section(cfg, "simulate",
                                 {"runs", "iterations", "mu", "step_scaling", "step_overrides",
                                  "variants", "dimension", "regressor_variance", "combination",
                                  "steady_state_window", "threads", "seed", "complex_file"});
    if (!s) {
        return;
    }
    if (s["runs"]) ex.num_runs = count(cfg, s["runs"], "simulate.runs");
    if (s["iterations"]) ex.num_iterations = count(cfg, s["iterations"], "simulate.iterations");
    if (s["mu"]) ex.step_size = real(cfg, s["mu"], "simulate.mu");
    if (s["step_scaling"]) {
        const auto v = text(cfg, s["step_scaling"], "simulate.step_scaling");
        if (v == "matched_rate") {
            ex.step_scaling = StepScaling::matched_rate;
        } else if (v == "none") {
            ex.step_scaling = StepScaling::none;
        } else {
            fail(cfg, s["step_scaling"], "simulate.step_scaling", "expected matched_rate or none");
        }
    }
    if (s["step_overrides"]) {
        const YAML::Node o = s["step_overrides"];
        if (!o.IsMap()) {
            fail(cfg, o, "simulate.step_overrides", "expected a mapping from variant to step size");
        }
        for (const auto& kv : o) {
            const auto name = kv.first.as<std::string>();
            try {
                ex.step_overrides[parse_variant(name)] =
                    real(cfg, kv.second, "simulate.step_overrides." + name);
            } catch (const ConfigError& e) {
                if (std::string(e.what()).rfind(cfg.origin, 0) == 0) {
                    throw;
                }
                fail(cfg, kv.first, "simulate.step_overrides", e.what());
            }
        }
    }
    if (s["variants"]) {
        const YAML::Node list = s["variants"];
        if (!list.IsSequence()) {
            fail(cfg, list, "simulate.variants", "expected a list of variant names");
        }
        ex.variants.clear();
        for (const auto& item : list) {
            try {
                ex.variants.push_back(parse_variant(text(cfg, item, "simulate.variants")));
            } catch (const ConfigError& e) {
                if (std::string(e.what()).rfind(cfg.origin, 0) == 0) {
                    throw;
                }
                fail(cfg, item, "simulate.variants", e.what());
            }
        }
    }
    if (s["dimension"]) ex.dimension = count(cfg, s["dimension"], "simulate.dimension");
    if (s["regressor_variance"]) {
        ex.regressor_variance = real(cfg, s["regressor_variance"], "simulate.regressor_variance");
    }
    if (s["combination"]) {
        const auto v = text(cfg, s["combination"], "simulate.combination");
        if (v == "uniform") {
            ex.combination = CombinationRule::uniform;
        } else if (v == "metropolis") {
            ex.combination = CombinationRule::metropolis;
        } else {
            fail(cfg, s["combination"], "simulate.combination", "expected uniform or metropolis");
        }
    }
    if (s["steady_state_window"]) {
        ex.steady_state_window = count(cfg, s["steady_state_window"], "simulate.steady_state_window");
    }
    if (s["threads"]) ex.threads = count(cfg, s["threads"], "simulate.threads");
    if (s["seed"]) args.seed = count(cfg, s["seed"], "simulate.seed");
    if (s["complex_file"]) {
        args.complex_file = resolve(cfg, text(cfg, s["complex_file"], "simulate.complex_file"));
    }

    // Semantic checks that can be pinned to a line.
    auto positive = [&](const char* key, double value) {
        if (s[key] && !(value > 0.0)) {
            fail(cfg, s[key], std::string("simulate.") + key, "must be positive");
        }
    };
    positive("runs", static_cast<double>(ex.num_runs));
    positive("iterations", static_cast<double>(ex.num_iterations));
    positive("dimension", static_cast<double>(ex.dimension));
    positive("regressor_variance", ex.regressor_variance);
    positive("steady_state_window", static_cast<double>(ex.steady_state_window));
    positive("threads", static_cast<double>(ex.threads));
    if (s["mu"] && ex.step_size < 0.0) {
        fail(cfg, s["mu"], "simulate.mu", "must be non-negative");
    }
}

}  // namespace cmrf::cli
