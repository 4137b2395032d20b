#include "mixmad/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mixmad {

namespace {

// RFC-4180 grid parse: quoted fields may hold commas, doubled quotes and
// newlines; records end at CRLF or LF.
std::vector<std::vector<std::string>> parse_csv_text(const std::string& text,
                                                     const std::string& origin) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
            case '"':
                if (field_started && !field.empty())
                    throw std::runtime_error(origin + ":" + std::to_string(line) +
                                             ": quote inside unquoted field");
                in_quotes = true;
                field_started = true;
                break;
            case ',': end_field(); break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') break;  // handled at '\n'
                end_record();
                ++line;
                break;
            case '\n':
                end_record();
                ++line;
                break;
            default:
                field.push_back(ch);
                field_started = true;
                break;
        }
    }
    if (in_quotes)
        throw std::runtime_error(origin + ": unterminated quoted field at end of file");
    if (field_started || !record.empty()) end_record();
    return records;
}

bool needs_quoting(const std::string& field) {
    return field.find_first_of(",\"\r\n") != std::string::npos;
}

std::string csv_quote(const std::string& field) {
    if (!needs_quoting(field)) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += "\"\"";
        else out.push_back(ch);
    }
    out += "\"";
    return out;
}

double parse_double_cell(const std::string& text, std::size_t line, const std::string& column) {
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || errno == ERANGE)
        throw std::runtime_error("row " + std::to_string(line) + ", column '" + column +
                                 "': cannot parse '" + text + "' as a number");
    return value;
}

}  // namespace

int CsvTable::find(const std::string& column) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == column) return static_cast<int>(i);
    return -1;
}

CsvTable read_csv_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open CSV file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    auto records = parse_csv_text(buffer.str(), path);
    if (records.empty()) throw std::runtime_error("CSV file '" + path + "' has no header row");
    CsvTable table;
    table.header = std::move(records.front());
    table.rows.assign(std::make_move_iterator(records.begin() + 1),
                      std::make_move_iterator(records.end()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r].size() != table.header.size())
            throw std::runtime_error(path + ": row " + std::to_string(r + 2) + " has " +
                                     std::to_string(table.rows[r].size()) + " fields, expected " +
                                     std::to_string(table.header.size()));
    }
    return table;
}

Dataset load_csv(const std::string& path, const Schema& schema) {
    schema.validate();
    const CsvTable table = read_csv_table(path);

    std::vector<int> column_index(schema.size(), -1);
    for (std::size_t c = 0; c < schema.size(); ++c) {
        column_index[c] = table.find(schema[c].name);
        if (column_index[c] < 0)
            throw std::runtime_error(path + ": missing column '" + schema[c].name + "'");
    }
    const int label_index = table.find("label");

    Dataset data;
    data.schema = schema;
    data.columns.assign(schema.size(), {});
    for (auto& col : data.columns) col.reserve(table.rows.size());
    if (label_index >= 0) data.labels.reserve(table.rows.size());

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::size_t line = r + 2;  // 1-based, header on line 1
        for (std::size_t c = 0; c < schema.size(); ++c) {
            const std::string& cell = table.rows[r][static_cast<std::size_t>(column_index[c])];
            const double value = parse_double_cell(cell, line, schema[c].name);
            try {
                validate_cell(schema[c], value, line);
            } catch (const std::invalid_argument& e) {
                throw std::runtime_error(path + ": " + e.what());
            }
            data.columns[c].push_back(value);
        }
        if (label_index >= 0) {
            const std::string& cell = table.rows[r][static_cast<std::size_t>(label_index)];
            if (cell != "0" && cell != "1")
                throw std::runtime_error(path + ": row " + std::to_string(line) +
                                         ", column 'label': expected 0 or 1, got '" + cell + "'");
            data.labels.push_back(cell == "1" ? 1 : 0);
        }
    }
    return data;
}

Dataset load_csv(const std::string& csv_path, const std::string& schema_path) {
    return load_csv(csv_path, load_schema(schema_path));
}

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

namespace {

std::string format_cell(const ColumnSpec& spec, double value) {
    if (spec.kind == ColumnKind::Gaussian) return format_double(value);
    return std::to_string(static_cast<long long>(value));
}

}  // namespace

void save_csv(const std::string& path, const Dataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    for (std::size_t c = 0; c < data.schema.size(); ++c) {
        if (c) out << ',';
        out << csv_quote(data.schema[c].name);
    }
    if (data.has_labels()) out << ",label";
    out << '\n';
    for (std::size_t r = 0; r < data.num_rows(); ++r) {
        for (std::size_t c = 0; c < data.schema.size(); ++c) {
            if (c) out << ',';
            out << format_cell(data.schema[c], data.columns[c][r]);
        }
        if (data.has_labels()) out << ',' << (data.labels[r] ? '1' : '0');
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing CSV to '" + path + "'");
}

std::string format_p(double p) {
    if (std::isinf(p)) return "inf";
    std::string s = format_double(p);
    return s;
}

double parse_p(const std::string& text) {
    if (text == "inf" || text == "Inf" || text == "INF") return kPInf;
    errno = 0;
    char* end = nullptr;
    const double p = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || errno == ERANGE || !(p > 0.0))
        throw std::runtime_error("invalid p value '" + text + "' (need a positive real or inf)");
    return p;
}

void write_scores_csv(const std::string& path, const ScoreReport& report,
                      std::span<const double> p_values, double contamination) {
    const std::size_t rows = report.num_instances();
    const int depth = report.depth();

    std::vector<std::vector<double>> aggregates;
    std::vector<std::vector<std::uint8_t>> flags;
    for (double p : p_values) {
        ScoreReport view = report;
        view.p = p;
        view.aggregate = aggregate_report(report, p);
        flag_anomalies(view, contamination);
        aggregates.push_back(std::move(view.aggregate));
        flags.push_back(std::move(view.flags));
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "row_index";
    for (int l = 1; l <= depth; ++l) out << ",F_" << l;
    for (int l = 1; l <= depth; ++l) out << ",rank_" << l;
    for (double p : p_values) out << ",agg_p" << format_p(p);
    for (double p : p_values) out << ",flag_p" << format_p(p);
    out << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        out << r;
        for (int l = 0; l < depth; ++l)
            out << ',' << format_double(report.energies(static_cast<Eigen::Index>(r), l));
        for (int l = 0; l < depth; ++l)
            out << ',' << format_double(report.ranks(static_cast<Eigen::Index>(r), l));
        for (std::size_t pi = 0; pi < p_values.size(); ++pi)
            out << ',' << format_double(aggregates[pi][r]);
        for (std::size_t pi = 0; pi < p_values.size(); ++pi)
            out << ',' << (flags[pi][r] ? '1' : '0');
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing scores to '" + path + "'");
}

}  // namespace mixmad
