#ifndef MIXMAD_DATASET_HPP
#define MIXMAD_DATASET_HPP

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mixmad/schema.hpp"

namespace mixmad {

/// Column-major table of typed mixed records. Cells are stored as doubles;
/// binary cells are 0/1, nominal cells are category indices, poisson cells
/// are non-negative integers. Immutable by convention once built.
struct Dataset {
    Schema schema;
    std::vector<std::vector<double>> columns;  // schema.size() columns, each num_rows long
    std::vector<std::uint8_t> labels;          // empty, or num_rows entries (1 = anomaly)

    std::size_t num_rows() const { return columns.empty() ? 0 : columns.front().size(); }
    std::size_t num_columns() const { return columns.size(); }
    bool has_labels() const { return !labels.empty(); }

    double cell(std::size_t row, std::size_t col) const { return columns[col][row]; }
    std::vector<double> row(std::size_t i) const;

    /// Checks every cell against its column kind; throws with row/column
    /// coordinates on the first violation.
    void validate() const;
};

Dataset dataset_from_rows(Schema schema, const std::vector<std::vector<double>>& rows,
                          std::vector<std::uint8_t> labels = {});

/// Throws std::invalid_argument naming the row (1-based) and column if the
/// cell is invalid for the kind.
void validate_cell(const ColumnSpec& spec, double value, std::size_t row_index);

/// One-hot encoding of a typed record into the schema's flat layout.
Eigen::VectorXd encode_record(const Schema& schema, std::span<const double> record);
void encode_record_into(const Schema& schema, std::span<const double> record,
                        Eigen::Ref<Eigen::VectorXd> out);

/// Encoded dataset, one record per column (encoded_width x num_rows).
Eigen::MatrixXd encode_dataset(const Dataset& data);

/// Learns norm_min/norm_max for every gaussian column from the training
/// data; other kinds pass through. Throws on a constant gaussian column.
Schema fit_normalizer(const Dataset& train);

/// Maps gaussian cells x -> (x - norm_min) / (norm_max - norm_min) using the
/// fitted schema; returns a dataset carrying that schema. Test values may
/// fall outside [0,1].
Dataset apply_normalizer(const Dataset& data, const Schema& fitted);

}  // namespace mixmad

#endif
