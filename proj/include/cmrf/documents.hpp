#pragma once

#include "cmrf/cmrf_model.hpp"
#include "cmrf/simplicial_complex.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace cmrf {

// Complex document:
//   {"vertices": [0, 1, 2], "edges": [[0, 1], ...], "triangles": [[0, 1, 2], ...]}
nlohmann::json complex_to_json(const SimplicialComplex2& complex);
/// Throws ConfigError on schema problems; construction errors propagate.
SimplicialComplex2 complex_from_json(const nlohmann::json& doc);

void save_complex(const std::filesystem::path& path, const SimplicialComplex2& complex);
SimplicialComplex2 load_complex(const std::filesystem::path& path);

// Model document:
//   {"complex": "relative/or/absolute/path.json" | {inline complex},
//    "k": 12.3, "d_v": [...], "d_t": [...]}
// A string reference is resolved against the directory of the model file.
struct ModelDocument {
    SimplicialComplex2 complex;
    SgmParams params;
    /// The reference as written in the document, empty when inline.
    std::optional<std::string> complex_ref;
};

nlohmann::json model_to_json(const ModelDocument& model);
ModelDocument model_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

void save_model(const std::filesystem::path& path, const ModelDocument& model);
ModelDocument load_model(const std::filesystem::path& path);

/// Reads a whole file; throws ConfigError when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
/// Throws ConfigError when the file cannot be written.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace cmrf
