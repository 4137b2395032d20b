#include "mixmad/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "mixmad/rng.hpp"

namespace mixmad {

namespace {

// Seed-stream salts; keyed by (role, level) only, so level l's detector sees
// the same stream no matter the total depth.
constexpr std::uint64_t kDetectorSalt = 1;
constexpr std::uint64_t kAbstractionSalt = 2;
constexpr std::uint64_t kSamplingSalt = 3;

std::uint64_t level_seed(std::uint64_t base, std::uint64_t role, int level) {
    return derive_seed(derive_seed(base, role), static_cast<std::uint64_t>(level));
}

Dataset dataset_from_bits(const std::vector<Eigen::VectorXd>& bits, int units) {
    Dataset data;
    data.schema = binary_schema(units);
    data.columns.assign(static_cast<std::size_t>(units), {});
    for (auto& col : data.columns) col.reserve(bits.size());
    for (const auto& h : bits)
        for (int u = 0; u < units; ++u) data.columns[static_cast<std::size_t>(u)].push_back(h[u]);
    return data;
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && values[idx[j]] == values[idx[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of positions i+1..j
        for (std::size_t t = i; t < j; ++t) ranks[idx[t]] = rank;
        i = j;
    }
    return ranks;
}

double aggregate_pnorm(std::span<const double> ranks, double p) {
    for (double r : ranks)
        if (!(r >= 0.0)) throw std::invalid_argument("aggregate_pnorm: negative rank");
    if (std::isinf(p)) {
        double best = 0.0;
        for (double r : ranks) best = std::max(best, r);
        return best;
    }
    if (!(p > 0.0)) throw std::invalid_argument("aggregate_pnorm: p must be positive or inf");
    if (p == 1.0) {
        double total = 0.0;
        for (double r : ranks) total += r;  // Borda count, kept exact
        return total;
    }
    double peak = 0.0;
    for (double r : ranks) peak = std::max(peak, r);
    if (peak == 0.0) return 0.0;
    double total = 0.0;
    for (double r : ranks) total += std::pow(r / peak, p);
    return peak * std::pow(total, 1.0 / p);
}

std::vector<double> aggregate_report(const ScoreReport& report, double p) {
    const std::size_t rows = report.num_instances();
    const int depth = report.depth();
    std::vector<double> out(rows);
    std::vector<double> level_ranks(static_cast<std::size_t>(depth));
    for (std::size_t r = 0; r < rows; ++r) {
        for (int l = 0; l < depth; ++l)
            level_ranks[static_cast<std::size_t>(l)] = report.ranks(static_cast<Eigen::Index>(r), l);
        out[r] = aggregate_pnorm(level_ranks, p);
    }
    return out;
}

std::vector<std::uint8_t> top_fraction_flags(std::span<const double> scores, double contamination) {
    if (!(contamination > 0.0) || !(contamination < 1.0))
        throw std::invalid_argument("contamination must lie in (0, 1)");
    const std::size_t rows = scores.size();
    if (rows == 0) return {};
    // guard against the product landing one ulp above an exact integer
    std::size_t count = static_cast<std::size_t>(
        std::ceil(contamination * static_cast<double>(rows) - 1e-9));
    count = std::clamp<std::size_t>(count, 1, rows);

    std::vector<std::size_t> idx(rows);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<std::uint8_t> flags(rows, 0);
    for (std::size_t i = 0; i < count; ++i) flags[idx[i]] = 1;
    return flags;
}

void flag_anomalies(ScoreReport& report, double contamination) {
    if (report.aggregate.size() != report.num_instances())
        throw std::invalid_argument("flag_anomalies: report has no aggregate scores");
    report.flags = top_fraction_flags(report.aggregate, contamination);
    report.contamination = contamination;
}

EnsembleModel EnsembleModel::fit(const Dataset& data, int depth,
                                 std::span<const int> abstraction_sizes,
                                 std::span<const int> detector_sizes, const TrainConfig& cfg,
                                 double p, const FitObserver& observer) {
    if (depth < 1) throw std::invalid_argument("ensemble depth must be >= 1");
    if (detector_sizes.size() != static_cast<std::size_t>(depth))
        throw std::invalid_argument("need one detector size per level (" + std::to_string(depth) +
                                    "), got " + std::to_string(detector_sizes.size()));
    if (abstraction_sizes.size() != static_cast<std::size_t>(depth - 1))
        throw std::invalid_argument("need one abstraction size per level below the top (" +
                                    std::to_string(depth - 1) + "), got " +
                                    std::to_string(abstraction_sizes.size()));
    if (!(p > 0.0)) throw std::invalid_argument("aggregation p must be positive or inf");
    cfg.validate();

    EnsembleModel model;
    model.schema_ = data.schema;
    model.p_ = p;

    const Dataset* current = &data;
    Dataset next;  // sampled representation feeding the level above
    for (int level = 1; level <= depth; ++level) {
        const int kd = detector_sizes[static_cast<std::size_t>(level - 1)];
        TrainConfig detector_cfg = cfg;
        detector_cfg.seed = level_seed(cfg.seed, kDetectorSalt, level);
        auto report = [&](RbmRole role, int units) {
            return [&, role, units, level](int epoch, const EpochStats& stats) {
                if (observer) observer({level, role, units, epoch, stats});
            };
        };
        model.detectors_.push_back(train_rbm(current->schema, *current, kd, detector_cfg,
                                             report(RbmRole::Detection, kd)));

        if (level == depth) break;
        const int ka = abstraction_sizes[static_cast<std::size_t>(level - 1)];
        TrainConfig abstraction_cfg = cfg;
        abstraction_cfg.seed = level_seed(cfg.seed, kAbstractionSalt, level);
        MvRbm abstraction = train_rbm(current->schema, *current, ka, abstraction_cfg,
                                      report(RbmRole::Abstraction, ka));

        // One fixed sampled dataset per layer: h ~ P(h | v) drawn once.
        Rng sampler(level_seed(cfg.seed, kSamplingSalt, level));
        std::vector<Eigen::VectorXd> bits;
        bits.reserve(current->num_rows());
        for (std::size_t r = 0; r < current->num_rows(); ++r)
            bits.push_back(abstraction.sample_hidden(current->row(r), sampler));
        model.chain_.append(std::move(abstraction));
        next = dataset_from_bits(bits, ka);
        current = &next;
    }
    return model;
}

const MvRbm& EnsembleModel::detector(int level) const {
    if (level < 1 || level > depth())
        throw std::out_of_range("detector level " + std::to_string(level) + " out of range [1, " +
                                std::to_string(depth()) + "]");
    return detectors_[static_cast<std::size_t>(level - 1)];
}

EnsembleModel EnsembleModel::from_parts(Schema schema, std::vector<MvRbm> detectors,
                                        std::vector<MvRbm> abstractions, double p) {
    if (detectors.empty()) throw std::invalid_argument("ensemble needs at least one detector");
    if (abstractions.size() != detectors.size() - 1)
        throw std::invalid_argument("ensemble needs exactly depth-1 abstraction RBMs");
    if (!(p > 0.0)) throw std::invalid_argument("aggregation p must be positive or inf");
    schema.validate();
    std::string mismatch;
    if (!detectors.front().visible().compatible_with(schema, &mismatch))
        throw std::invalid_argument("level-1 detector does not match the data schema: " + mismatch);

    EnsembleModel model;
    model.schema_ = std::move(schema);
    model.p_ = p;
    for (std::size_t l = 0; l < abstractions.size(); ++l) {
        if (l == 0) {
            if (!abstractions[0].visible().compatible_with(model.schema_, &mismatch))
                throw std::invalid_argument("level-1 abstraction RBM does not match the schema: " +
                                            mismatch);
        }
        const int produced = abstractions[l].num_hidden();
        model.chain_.append(std::move(abstractions[l]));
        const MvRbm& upper = detectors[l + 1];
        if (!upper.all_binary() || upper.encoded_dim() != produced)
            throw std::invalid_argument("detector " + std::to_string(l + 2) +
                                        " must be all-binary over " + std::to_string(produced) +
                                        " units");
    }
    model.detectors_ = std::move(detectors);
    return model;
}

ScoreReport EnsembleModel::score(const Dataset& data, int threads) const {
    std::string mismatch;
    if (!schema_.compatible_with(data.schema, &mismatch))
        throw std::invalid_argument("score: schema mismatch at " + mismatch);
    const std::size_t rows = data.num_rows();
    const int levels = depth();

    ScoreReport report;
    report.p = p_;
    report.energies.resize(static_cast<Eigen::Index>(rows), levels);
    report.ranks.resize(static_cast<Eigen::Index>(rows), levels);

    auto score_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            const std::vector<double> record = data.row(r);
            const auto row = static_cast<Eigen::Index>(r);
            report.energies(row, 0) = detectors_.front().free_energy(record);
            if (levels == 1) continue;
            Eigen::VectorXd h = chain_.layer(0).hidden_preactivation(record);
            h = h.unaryExpr([](double z) { return sigmoid(z); });
            report.energies(row, 1) = abstracted_free_energy(detectors_[1], h);
            for (int l = 2; l < levels; ++l) {
                h = chain_.layer(l - 1).hidden_preactivation_encoded(h);
                h = h.unaryExpr([](double z) { return sigmoid(z); });
                report.energies(row, l) =
                    abstracted_free_energy(detectors_[static_cast<std::size_t>(l)], h);
            }
        }
    };

    threads = std::max(1, threads);
    if (threads == 1 || rows < 2) {
        score_range(0, rows);
    } else {
        const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), rows);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        const std::size_t chunk = (rows + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(rows, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(score_range, begin, end);
        }
        for (auto& t : pool) t.join();
    }

    std::vector<double> column(rows);
    for (int l = 0; l < levels; ++l) {
        for (std::size_t r = 0; r < rows; ++r) column[r] = report.energies(static_cast<Eigen::Index>(r), l);
        const std::vector<double> ranks = average_ranks(column);
        for (std::size_t r = 0; r < rows; ++r) report.ranks(static_cast<Eigen::Index>(r), l) = ranks[r];
    }
    report.aggregate = aggregate_report(report, p_);
    return report;
}

}  // namespace mixmad
