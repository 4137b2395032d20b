#include "mixmad/dataset.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mixmad {

std::vector<double> Dataset::row(std::size_t i) const {
    std::vector<double> out(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) out[c] = columns[c][i];
    return out;
}

void validate_cell(const ColumnSpec& spec, double value, std::size_t row_index) {
    auto fail = [&](const std::string& what) {
        throw std::invalid_argument("row " + std::to_string(row_index) + ", column '" + spec.name +
                                    "': " + what);
    };
    if (!std::isfinite(value)) fail("non-finite value");
    switch (spec.kind) {
        case ColumnKind::Binary:
            if (value != 0.0 && value != 1.0) fail("binary cell must be 0 or 1");
            break;
        case ColumnKind::Gaussian:
            break;
        case ColumnKind::Nominal:
            if (value != std::floor(value) || value < 0.0 ||
                value >= static_cast<double>(spec.cardinality))
                fail("nominal cell must be an integer in [0, " +
                     std::to_string(spec.cardinality - 1) + "]");
            break;
        case ColumnKind::Poisson:
            if (value != std::floor(value) || value < 0.0)
                fail("poisson cell must be a non-negative integer");
            break;
    }
}

void Dataset::validate() const {
    schema.validate();
    if (columns.size() != schema.size())
        throw std::invalid_argument("dataset has " + std::to_string(columns.size()) +
                                    " columns but schema declares " + std::to_string(schema.size()));
    const std::size_t rows = num_rows();
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c].size() != rows)
            throw std::invalid_argument("column '" + schema[c].name + "' has " +
                                        std::to_string(columns[c].size()) + " rows, expected " +
                                        std::to_string(rows));
        for (std::size_t r = 0; r < rows; ++r) validate_cell(schema[c], columns[c][r], r + 1);
    }
    if (!labels.empty() && labels.size() != rows)
        throw std::invalid_argument("label count does not match row count");
}

Dataset dataset_from_rows(Schema schema, const std::vector<std::vector<double>>& rows,
                          std::vector<std::uint8_t> labels) {
    Dataset data;
    data.schema = std::move(schema);
    data.columns.assign(data.schema.size(), {});
    for (auto& col : data.columns) col.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != data.schema.size())
            throw std::invalid_argument("row " + std::to_string(r + 1) + " has " +
                                        std::to_string(rows[r].size()) + " cells, expected " +
                                        std::to_string(data.schema.size()));
        for (std::size_t c = 0; c < rows[r].size(); ++c) data.columns[c].push_back(rows[r][c]);
    }
    data.labels = std::move(labels);
    data.validate();
    return data;
}

void encode_record_into(const Schema& schema, std::span<const double> record,
                        Eigen::Ref<Eigen::VectorXd> out) {
    if (record.size() != schema.size())
        throw std::invalid_argument("record has " + std::to_string(record.size()) +
                                    " cells, expected " + std::to_string(schema.size()));
    out.setZero();
    int offset = 0;
    for (std::size_t c = 0; c < schema.size(); ++c) {
        const ColumnSpec& spec = schema[c];
        if (spec.kind == ColumnKind::Nominal) {
            const int category = static_cast<int>(record[c]);
            if (category < 0 || category >= spec.cardinality)
                throw std::invalid_argument("column '" + spec.name + "': nominal value " +
                                            std::to_string(record[c]) + " out of range");
            out[offset + category] = 1.0;
        } else {
            out[offset] = record[c];
        }
        offset += spec.width();
    }
}

Eigen::VectorXd encode_record(const Schema& schema, std::span<const double> record) {
    Eigen::VectorXd out(schema.encoded_width());
    encode_record_into(schema, record, out);
    return out;
}

Eigen::MatrixXd encode_dataset(const Dataset& data) {
    const std::size_t rows = data.num_rows();
    Eigen::MatrixXd out(data.schema.encoded_width(), static_cast<Eigen::Index>(rows));
    std::vector<double> record(data.schema.size());
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < data.schema.size(); ++c) record[c] = data.columns[c][r];
        encode_record_into(data.schema, record, out.col(static_cast<Eigen::Index>(r)));
    }
    return out;
}

Schema fit_normalizer(const Dataset& train) {
    if (train.num_rows() == 0) throw std::invalid_argument("fit_normalizer: empty training data");
    Schema fitted = train.schema;
    for (std::size_t c = 0; c < fitted.size(); ++c) {
        if (fitted[c].kind != ColumnKind::Gaussian) continue;
        double lo = train.columns[c].front();
        double hi = lo;
        for (double v : train.columns[c]) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (lo == hi)
            throw std::invalid_argument("gaussian column '" + fitted[c].name +
                                        "' is constant (value " + std::to_string(lo) +
                                        "); cannot normalize");
        fitted[c].norm_min = lo;
        fitted[c].norm_max = hi;
    }
    return fitted;
}

Dataset apply_normalizer(const Dataset& data, const Schema& fitted) {
    std::string mismatch;
    if (!data.schema.compatible_with(fitted, &mismatch))
        throw std::invalid_argument("apply_normalizer: schema mismatch at " + mismatch);
    Dataset out = data;
    out.schema = fitted;
    for (std::size_t c = 0; c < fitted.size(); ++c) {
        if (fitted[c].kind != ColumnKind::Gaussian) continue;
        if (!fitted[c].has_norm_bounds())
            throw std::invalid_argument("apply_normalizer: gaussian column '" + fitted[c].name +
                                        "' has no fitted bounds");
        const double lo = fitted[c].norm_min;
        const double span = fitted[c].norm_max - fitted[c].norm_min;
        for (double& v : out.columns[c]) v = (v - lo) / span;
    }
    return out;
}

}  // namespace mixmad
