#include "mixmad/synthetic.hpp"

#include <random>
#include <stdexcept>

#include "mixmad/rng.hpp"

namespace mixmad {

namespace {

constexpr double kFlipNoise = 0.05;
constexpr double kPoissonRate = 3.0;
constexpr int kPoissonOutlierMax = 12;  // ~4x the inlier rate
constexpr double kSharedFactorWeight = 1.1;
constexpr double kPrivateNoiseWeight = 0.55;

double squash(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

Dataset generate_synthetic(const SynthConfig& config, std::uint64_t seed) {
    if (config.num_inliers <= 0)
        throw std::invalid_argument("generate_synthetic: need at least one inlier");
    if (config.num_outliers < 0)
        throw std::invalid_argument("generate_synthetic: negative outlier count");
    if (config.num_nominal > 0 && config.nominal_cardinality < 2)
        throw std::invalid_argument("generate_synthetic: nominal cardinality must be >= 2");
    const int total_columns =
        config.num_binary + config.num_gaussian + config.num_nominal + config.num_poisson;
    if (total_columns == 0) throw std::invalid_argument("generate_synthetic: no columns configured");

    Schema schema;
    for (int j = 0; j < config.num_binary; ++j)
        schema.columns.push_back({"b" + std::to_string(j), ColumnKind::Binary, 0, std::nan(""), std::nan("")});
    for (int j = 0; j < config.num_gaussian; ++j)
        schema.columns.push_back({"g" + std::to_string(j), ColumnKind::Gaussian, 0, std::nan(""), std::nan("")});
    for (int j = 0; j < config.num_nominal; ++j)
        schema.columns.push_back({"n" + std::to_string(j), ColumnKind::Nominal,
                                  config.nominal_cardinality, std::nan(""), std::nan("")});
    for (int j = 0; j < config.num_poisson; ++j)
        schema.columns.push_back({"p" + std::to_string(j), ColumnKind::Poisson, 0, std::nan(""), std::nan("")});

    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::poisson_distribution<int> poisson(kPoissonRate);
    std::uniform_int_distribution<int> nominal_uniform(0, config.nominal_cardinality - 1);
    std::uniform_int_distribution<int> poisson_uniform(0, kPoissonOutlierMax);

    const std::size_t total_rows =
        static_cast<std::size_t>(config.num_inliers) + static_cast<std::size_t>(config.num_outliers);
    std::vector<std::vector<double>> rows;
    rows.reserve(total_rows);
    std::vector<std::uint8_t> labels;
    labels.reserve(total_rows);

    for (int r = 0; r < config.num_inliers; ++r) {
        std::vector<double> row;
        row.reserve(static_cast<std::size_t>(total_columns));
        for (int j = 0; j < config.num_binary; ++j) {
            int bit = j % 2;
            if (uniform(rng) < kFlipNoise) bit = 1 - bit;
            row.push_back(bit);
        }
        const double shared = normal(rng);  // one regime factor per record
        for (int j = 0; j < config.num_gaussian; ++j)
            row.push_back(squash(kSharedFactorWeight * shared + kPrivateNoiseWeight * normal(rng)));
        for (int j = 0; j < config.num_nominal; ++j) {
            int category = j % config.nominal_cardinality;
            if (uniform(rng) < kFlipNoise) category = nominal_uniform(rng);
            row.push_back(category);
        }
        for (int j = 0; j < config.num_poisson; ++j) row.push_back(poisson(rng));
        rows.push_back(std::move(row));
        labels.push_back(0);
    }

    for (int r = 0; r < config.num_outliers; ++r) {
        std::vector<double> row;
        row.reserve(static_cast<std::size_t>(total_columns));
        for (int j = 0; j < config.num_binary; ++j) row.push_back(uniform(rng) < 0.5 ? 1.0 : 0.0);
        for (int j = 0; j < config.num_gaussian; ++j) row.push_back(uniform(rng));
        for (int j = 0; j < config.num_nominal; ++j) row.push_back(nominal_uniform(rng));
        for (int j = 0; j < config.num_poisson; ++j) row.push_back(poisson_uniform(rng));
        rows.push_back(std::move(row));
        labels.push_back(1);
    }

    return dataset_from_rows(std::move(schema), rows, std::move(labels));
}

}  // namespace mixmad
