#pragma once

#include "cmrf/experiment.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace cmrf::cli {

/// Parameters of `complex generate`.
struct GenerateArgs {
    std::optional<std::size_t> vertices;
    std::optional<std::size_t> edges;
    std::optional<double> p;
    std::size_t triangles = 0;
    std::optional<std::uint64_t> seed;
    bool require_trivial_homology = true;
    std::size_t max_attempts = 20000;
};

/// Parameters of `model build`.
struct ModelBuildArgs {
    CoefficientRange dv{0.2, 5.0};
    CoefficientRange dt{0.2, 5.0};
    double margin = kDefaultMargin;
    std::optional<double> k;
    std::optional<std::uint64_t> seed;
};

/// Parameters of `simulate`.
struct SimulateArgs {
    ExperimentConfig experiment;
    std::optional<std::filesystem::path> complex_file;
    std::optional<std::uint64_t> seed;
};

/// Sections of a configuration file:
///
///   complex:  {vertices, edges, p, triangles, seed, require_trivial_homology, max_attempts}
///   model:    {dv: x | [lo, hi], dt: x | [lo, hi], margin, k, seed}
///   simulate: {runs, iterations, mu, step_scaling, step_overrides: {variant: mu},
///              variants: [...], dimension, regressor_variance, combination,
///              steady_state_window, threads, seed, complex_file}
///
/// `simulate` also reads the `complex` and `model` sections for random
/// complexes and coefficient ranges. YAML and JSON syntax are both accepted.
/// Every error throws ConfigError naming the file and line.
class ConfigFile {
public:
    static ConfigFile load(const std::filesystem::path& path);
    static ConfigFile parse(const std::string& text, const std::string& origin);

    void apply(GenerateArgs& args) const;
    void apply(ModelBuildArgs& args) const;
    void apply(SimulateArgs& args) const;

    ConfigFile(ConfigFile&&) noexcept;
    ConfigFile& operator=(ConfigFile&&) noexcept;
    ~ConfigFile();

    struct Impl;

private:
    explicit ConfigFile(std::unique_ptr<Impl> impl);
    std::unique_ptr<Impl> impl_;
};

}  // namespace cmrf::cli
