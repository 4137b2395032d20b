#include "mixmad/schema.hpp"

#include <fstream>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace mixmad {

const char* to_string(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::Binary: return "binary";
        case ColumnKind::Gaussian: return "gaussian";
        case ColumnKind::Nominal: return "nominal";
        case ColumnKind::Poisson: return "poisson";
    }
    return "?";
}

ColumnKind column_kind_from_string(const std::string& name) {
    if (name == "binary") return ColumnKind::Binary;
    if (name == "gaussian") return ColumnKind::Gaussian;
    if (name == "nominal") return ColumnKind::Nominal;
    if (name == "poisson") return ColumnKind::Poisson;
    throw std::invalid_argument("unknown column kind '" + name +
                                "' (expected binary, gaussian, nominal or poisson)");
}

void ColumnSpec::validate() const {
    if (name.empty()) throw std::invalid_argument("column with empty name");
    if (kind == ColumnKind::Nominal) {
        if (cardinality < 2)
            throw std::invalid_argument("nominal column '" + name +
                                        "' needs cardinality >= 2, got " +
                                        std::to_string(cardinality));
    } else if (cardinality != 0) {
        throw std::invalid_argument("column '" + name + "' is not nominal but has cardinality " +
                                    std::to_string(cardinality));
    }
    if (std::isfinite(norm_min) != std::isfinite(norm_max))
        throw std::invalid_argument("column '" + name + "' has only one normalization bound");
    if (has_norm_bounds() && !(norm_min < norm_max))
        throw std::invalid_argument("column '" + name + "' has norm_min >= norm_max");
}

int Schema::find(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i].name == name) return static_cast<int>(i);
    return -1;
}

int Schema::encoded_width() const {
    int w = 0;
    for (const auto& c : columns) w += c.width();
    return w;
}

std::vector<int> Schema::encoded_offsets() const {
    std::vector<int> offsets(columns.size() + 1, 0);
    for (std::size_t i = 0; i < columns.size(); ++i) offsets[i + 1] = offsets[i] + columns[i].width();
    return offsets;
}

void Schema::validate() const {
    if (columns.empty()) throw std::invalid_argument("schema has no columns");
    std::unordered_set<std::string> seen;
    for (const auto& c : columns) {
        c.validate();
        if (!seen.insert(c.name).second)
            throw std::invalid_argument("duplicate column name '" + c.name + "'");
    }
}

bool Schema::compatible_with(const Schema& other, std::string* mismatch) const {
    auto fail = [&](const std::string& what) {
        if (mismatch) *mismatch = what;
        return false;
    };
    if (columns.size() != other.columns.size())
        return fail("column count " + std::to_string(other.columns.size()) + " (expected " +
                    std::to_string(columns.size()) + ")");
    for (std::size_t i = 0; i < columns.size(); ++i) {
        const auto& a = columns[i];
        const auto& b = other.columns[i];
        if (a.name != b.name) return fail("column '" + b.name + "' (expected '" + a.name + "')");
        if (a.kind != b.kind)
            return fail("column '" + a.name + "' kind " + to_string(b.kind) + " (expected " +
                        to_string(a.kind) + ")");
        if (a.cardinality != b.cardinality)
            return fail("column '" + a.name + "' cardinality " + std::to_string(b.cardinality) +
                        " (expected " + std::to_string(a.cardinality) + ")");
    }
    return true;
}

Schema binary_schema(int num_units) {
    if (num_units < 1) throw std::invalid_argument("binary_schema: need at least one unit");
    Schema schema;
    schema.columns.reserve(static_cast<std::size_t>(num_units));
    for (int i = 0; i < num_units; ++i)
        schema.columns.push_back({"u" + std::to_string(i), ColumnKind::Binary, 0,
                                  std::nan(""), std::nan("")});
    return schema;
}

nlohmann::json schema_to_json(const Schema& schema) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : schema.columns) {
        nlohmann::json obj;
        obj["name"] = c.name;
        obj["kind"] = to_string(c.kind);
        if (c.kind == ColumnKind::Nominal) obj["cardinality"] = c.cardinality;
        if (c.has_norm_bounds()) {
            obj["norm_min"] = c.norm_min;
            obj["norm_max"] = c.norm_max;
        }
        arr.push_back(std::move(obj));
    }
    return arr;
}

Schema schema_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw std::invalid_argument("schema JSON must be an array of columns");
    Schema schema;
    for (const auto& obj : j) {
        ColumnSpec spec;
        spec.name = obj.at("name").get<std::string>();
        spec.kind = column_kind_from_string(obj.at("kind").get<std::string>());
        if (obj.contains("cardinality")) spec.cardinality = obj.at("cardinality").get<int>();
        if (obj.contains("norm_min")) spec.norm_min = obj.at("norm_min").get<double>();
        if (obj.contains("norm_max")) spec.norm_max = obj.at("norm_max").get<double>();
        schema.columns.push_back(std::move(spec));
    }
    schema.validate();
    return schema;
}

void save_schema(const std::string& path, const Schema& schema) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << schema_to_json(schema).dump(2) << "\n";
    if (!out) throw std::runtime_error("failed writing schema to '" + path + "'");
}

Schema load_schema(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open schema file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("invalid JSON in schema file '" + path + "': " + e.what());
    }
    return schema_from_json(j);
}

}  // namespace mixmad
