#ifndef MIXMAD_CSV_HPP
#define MIXMAD_CSV_HPP

#include <span>
#include <string>
#include <vector>

#include "mixmad/dataset.hpp"
#include "mixmad/ensemble.hpp"
#include "mixmad/schema.hpp"

namespace mixmad {

/// RFC-4180 cell grid (header row included). Quoted fields and embedded
/// separators/newlines are handled; unknown columns are preserved.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int find(const std::string& column) const;
};

CsvTable read_csv_table(const std::string& path);

/// Parses a data CSV against the schema. The header must contain every
/// schema column (extras are ignored); an optional `label` column with 0/1
/// values populates labels. Parse errors carry row and column coordinates.
Dataset load_csv(const std::string& path, const Schema& schema);
Dataset load_csv(const std::string& csv_path, const std::string& schema_path);

/// Writes the dataset (plus a `label` column when labels are present).
/// Doubles render with 17 significant digits so load_csv round-trips values
/// exactly.
void save_csv(const std::string& path, const Dataset& data);

/// Scores CSV: row_index, F_1..F_L, rank_1..rank_L, then aggregate and flag
/// columns per requested p (infinity spelled `inf`).
void write_scores_csv(const std::string& path, const ScoreReport& report,
                      std::span<const double> p_values, double contamination);

/// %.17g rendering used across CSV output.
std::string format_double(double value);

/// p rendered for headers/flags: "0.5", "1", "2", "inf".
std::string format_p(double p);
double parse_p(const std::string& text);

}  // namespace mixmad

#endif
