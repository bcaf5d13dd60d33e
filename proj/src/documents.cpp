#include "cmrf/documents.hpp"

#include "cmrf/error.hpp"

#include <fstream>
#include <sstream>

namespace cmrf {

using nlohmann::json;

namespace {

const json& field(const json& doc, const char* key)
{
    if (!doc.is_object() || !doc.contains(key)) {
        throw ConfigError(std::string("missing field '") + key + "'");
    }
    return doc.at(key);
}

template <std::size_t N>
std::vector<std::array<VertexId, N>> tuples(const json& arr, const char* key)
{
    if (!arr.is_array()) {
        throw ConfigError(std::string("'") + key + "' must be an array");
    }
    std::vector<std::array<VertexId, N>> out;
    for (const auto& item : arr) {
        if (!item.is_array() || item.size() != N) {
            throw ConfigError(std::string("every entry of '") + key + "' must have " +
                              std::to_string(N) + " vertex ids");
        }
        std::array<VertexId, N> t{};
        for (std::size_t i = 0; i < N; ++i) {
            if (!item[i].is_number_integer()) {
                throw ConfigError(std::string("'") + key + "' holds a non-integer vertex id");
            }
            t[i] = item[i].get<VertexId>();
        }
        out.push_back(t);
    }
    return out;
}

Eigen::VectorXd real_vector(const json& arr, const char* key)
{
    if (!arr.is_array()) {
        throw ConfigError(std::string("'") + key + "' must be an array of numbers");
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) {
            throw ConfigError(std::string("'") + key + "' holds a non-numeric entry");
        }
        out(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    }
    return out;
}

json parse(const std::string& text, const std::filesystem::path& origin)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin.string() + ": " + e.what());
    }
}

}  // namespace

json complex_to_json(const SimplicialComplex2& complex)
{
    json doc;
    doc["vertices"] = complex.vertices();
    doc["edges"] = complex.edges();
    doc["triangles"] = complex.triangles();
    return doc;
}

SimplicialComplex2 complex_from_json(const json& doc)
{
    const json& vs = field(doc, "vertices");
    if (!vs.is_array()) {
        throw ConfigError("'vertices' must be an array");
    }
    std::vector<VertexId> vertices;
    for (const auto& v : vs) {
        if (!v.is_number_integer()) {
            throw ConfigError("'vertices' holds a non-integer id");
        }
        vertices.push_back(v.get<VertexId>());
    }
    auto edges = tuples<2>(field(doc, "edges"), "edges");
    auto triangles = doc.contains("triangles") ? tuples<3>(doc.at("triangles"), "triangles")
                                               : std::vector<Triangle>{};
    return build_complex(std::move(vertices), std::move(edges), std::move(triangles));
}

void save_complex(const std::filesystem::path& path, const SimplicialComplex2& complex)
{
    write_text_file(path, complex_to_json(complex).dump(2) + "\n");
}

SimplicialComplex2 load_complex(const std::filesystem::path& path)
{
    return complex_from_json(parse(read_text_file(path), path));
}

json model_to_json(const ModelDocument& model)
{
    json doc;
    if (model.complex_ref) {
        doc["complex"] = *model.complex_ref;
    } else {
        doc["complex"] = complex_to_json(model.complex);
    }
    doc["k"] = model.params.k;
    doc["d_v"] = std::vector<double>(model.params.d_v.begin(), model.params.d_v.end());
    doc["d_t"] = std::vector<double>(model.params.d_t.begin(), model.params.d_t.end());
    return doc;
}

ModelDocument model_from_json(const json& doc, const std::filesystem::path& base_dir)
{
    ModelDocument model;
    const json& ref = field(doc, "complex");
    if (ref.is_string()) {
        model.complex_ref = ref.get<std::string>();
        std::filesystem::path p(*model.complex_ref);
        model.complex = load_complex(p.is_absolute() ? p : base_dir / p);
    } else {
        model.complex = complex_from_json(ref);
    }
    const json& k = field(doc, "k");
    if (!k.is_number()) {
        throw ConfigError("'k' must be a number");
    }
    model.params.k = k.get<double>();
    model.params.d_v = real_vector(field(doc, "d_v"), "d_v");
    model.params.d_t = real_vector(field(doc, "d_t"), "d_t");
    return model;
}

void save_model(const std::filesystem::path& path, const ModelDocument& model)
{
    write_text_file(path, model_to_json(model).dump(2) + "\n");
}

ModelDocument load_model(const std::filesystem::path& path)
{
    return model_from_json(parse(read_text_file(path), path), path.parent_path());
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw ConfigError("cannot write " + path.string());
    }
}

}  // namespace cmrf
