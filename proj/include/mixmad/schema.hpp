#ifndef MIXMAD_SCHEMA_HPP
#define MIXMAD_SCHEMA_HPP

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace mixmad {

enum class ColumnKind { Binary, Gaussian, Nominal, Poisson };

const char* to_string(ColumnKind kind);
ColumnKind column_kind_from_string(const std::string& name);

/// Declares one column of a mixed-type table: its visible-unit type plus the
/// metadata that type needs (category count for nominal, min/max bounds
/// learned by fit_normalizer for gaussian).
struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::Binary;
    int cardinality = 0;  // nominal only, >= 2
    double norm_min = std::nan("");
    double norm_max = std::nan("");

    bool has_norm_bounds() const { return std::isfinite(norm_min) && std::isfinite(norm_max); }

    /// Number of encoded dimensions this column occupies (cardinality for
    /// nominal, 1 otherwise).
    int width() const { return kind == ColumnKind::Nominal ? cardinality : 1; }

    void validate() const;  // throws std::invalid_argument
};

/// Ordered list of column specs. Columns are addressed by position; names
/// must be unique (used to match CSV headers).
struct Schema {
    std::vector<ColumnSpec> columns;

    std::size_t size() const { return columns.size(); }
    bool empty() const { return columns.empty(); }
    const ColumnSpec& operator[](std::size_t i) const { return columns[i]; }
    ColumnSpec& operator[](std::size_t i) { return columns[i]; }

    /// Index of the named column, or -1.
    int find(const std::string& name) const;

    /// Total encoded width (one-hot nominal expansion).
    int encoded_width() const;

    /// Start offset of each column in the encoded vector; size() + 1 entries.
    std::vector<int> encoded_offsets() const;

    void validate() const;

    /// Same names, kinds and cardinalities (norm bounds ignored).
    bool compatible_with(const Schema& other, std::string* mismatch = nullptr) const;
};

/// All-binary schema with K unit columns named u0..u{K-1}; the visible layout
/// of every RBM above level 1.
Schema binary_schema(int num_units);

nlohmann::json schema_to_json(const Schema& schema);
Schema schema_from_json(const nlohmann::json& j);
void save_schema(const std::string& path, const Schema& schema);
Schema load_schema(const std::string& path);

}  // namespace mixmad

#endif
