#include "mixmad/mvrbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace mixmad {

namespace {

constexpr double kPoissonMeanClamp = 30.0;  // rate capped at e^30

double lfactorial(double n) { return std::lgamma(n + 1.0); }

// Samples an encoded visible vector from the per-dim conditional means
// m = a - W h, one column group at a time.
void sample_visible_from_means(const Schema& schema, const std::vector<int>& offsets,
                               const Eigen::VectorXd& means, Eigen::Ref<Eigen::VectorXd> out,
                               Rng& rng, int* clamp_events) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t c = 0; c < schema.size(); ++c) {
        const int off = offsets[c];
        switch (schema[c].kind) {
            case ColumnKind::Binary:
                out[off] = uniform(rng) < sigmoid(means[off]) ? 1.0 : 0.0;
                break;
            case ColumnKind::Gaussian:
                out[off] = means[off] + normal(rng);
                break;
            case ColumnKind::Poisson: {
                double m = means[off];
                if (m > kPoissonMeanClamp) {
                    m = kPoissonMeanClamp;
                    if (clamp_events) ++*clamp_events;
                }
                std::poisson_distribution<long long> poisson(std::exp(m));
                out[off] = static_cast<double>(poisson(rng));
                break;
            }
            case ColumnKind::Nominal: {
                const int width = schema[c].cardinality;
                double max_logit = means[off];
                for (int d = 1; d < width; ++d) max_logit = std::max(max_logit, means[off + d]);
                double total = 0.0;
                for (int d = 0; d < width; ++d) total += std::exp(means[off + d] - max_logit);
                const double u = uniform(rng) * total;
                double cumulative = 0.0;
                int picked = width - 1;
                for (int d = 0; d < width; ++d) {
                    cumulative += std::exp(means[off + d] - max_logit);
                    if (u < cumulative) {
                        picked = d;
                        break;
                    }
                }
                for (int d = 0; d < width; ++d) out[off + d] = d == picked ? 1.0 : 0.0;
                break;
            }
        }
    }
}

// Visible sub-energy of an encoded vector, accumulated dim by dim in layout
// order (keeps column-wise and whole-record routes bit-identical).
double visible_energy_encoded(const Schema& schema, const std::vector<int>& offsets,
                              const Eigen::VectorXd& a, const Eigen::VectorXd& v) {
    double energy = 0.0;
    for (std::size_t c = 0; c < schema.size(); ++c) {
        const int off = offsets[c];
        const int width = schema[c].width();
        switch (schema[c].kind) {
            case ColumnKind::Binary:
            case ColumnKind::Nominal:
                for (int d = off; d < off + width; ++d) energy += -a[d] * v[d];
                break;
            case ColumnKind::Gaussian:
                energy += 0.5 * v[off] * v[off] - a[off] * v[off];
                break;
            case ColumnKind::Poisson:
                energy += lfactorial(v[off]) - a[off] * v[off];
                break;
        }
    }
    return energy;
}

}  // namespace

double softplus(double z) {
    // log(1 + e^z) = max(z, 0) + log1p(e^{-|z|})
    return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double sub_energy(const ColumnSpec& spec, double cell, std::span<const double> bias) {
    if (bias.size() != static_cast<std::size_t>(spec.width()))
        throw std::invalid_argument("sub_energy: bias span has " + std::to_string(bias.size()) +
                                    " entries, column '" + spec.name + "' needs " +
                                    std::to_string(spec.width()));
    switch (spec.kind) {
        case ColumnKind::Binary: return -bias[0] * cell;
        case ColumnKind::Gaussian: return 0.5 * cell * cell - bias[0] * cell;
        case ColumnKind::Poisson: return lfactorial(cell) - bias[0] * cell;
        case ColumnKind::Nominal: {
            const int category = static_cast<int>(cell);
            if (category < 0 || category >= spec.cardinality)
                throw std::invalid_argument("sub_energy: nominal value out of range for column '" +
                                            spec.name + "'");
            return -bias[static_cast<std::size_t>(category)];
        }
    }
    throw std::logic_error("sub_energy: unreachable");
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw std::invalid_argument("learning_rate must be positive");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (!(weight_init_scale >= 0.0)) throw std::invalid_argument("weight_init_scale must be >= 0");
}

MvRbm::MvRbm(Schema visible, int num_hidden) : visible_(std::move(visible)) {
    visible_.validate();
    if (num_hidden < 1) throw std::invalid_argument("MvRbm: need at least one hidden unit");
    offsets_ = visible_.encoded_offsets();
    all_binary_ = std::all_of(visible_.columns.begin(), visible_.columns.end(),
                              [](const ColumnSpec& c) { return c.kind == ColumnKind::Binary; });
    a_ = Eigen::VectorXd::Zero(visible_.encoded_width());
    b_ = Eigen::VectorXd::Zero(num_hidden);
    W_ = Eigen::MatrixXd::Zero(visible_.encoded_width(), num_hidden);
}

MvRbm MvRbm::init_random(Schema visible, int num_hidden, double weight_scale, Rng& rng) {
    MvRbm model(std::move(visible), num_hidden);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index k = 0; k < model.W_.cols(); ++k)
        for (Eigen::Index d = 0; d < model.W_.rows(); ++d) model.W_(d, k) = weight_scale * normal(rng);
    return model;
}

Eigen::VectorXd MvRbm::hidden_preactivation_encoded(const Eigen::VectorXd& v) const {
    if (v.size() != a_.size())
        throw std::invalid_argument("hidden_preactivation: encoded input has " +
                                    std::to_string(v.size()) + " dims, model expects " +
                                    std::to_string(a_.size()));
    return b_ - W_.transpose() * v;
}

Eigen::VectorXd MvRbm::hidden_preactivation(std::span<const double> record) const {
    return hidden_preactivation_encoded(encode_record(visible_, record));
}

double MvRbm::free_energy_encoded(const Eigen::VectorXd& v) const {
    const Eigen::VectorXd z = hidden_preactivation_encoded(v);
    double f = visible_energy_encoded(visible_, offsets_, a_, v);
    for (Eigen::Index k = 0; k < z.size(); ++k) f -= softplus(z[k]);
    return f;
}

double MvRbm::free_energy(std::span<const double> record) const {
    return free_energy_encoded(encode_record(visible_, record));
}

Eigen::VectorXd MvRbm::sample_hidden_encoded(const Eigen::VectorXd& v, Rng& rng) const {
    const Eigen::VectorXd z = hidden_preactivation_encoded(v);
    Eigen::VectorXd h(z.size());
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (Eigen::Index k = 0; k < z.size(); ++k) h[k] = uniform(rng) < sigmoid(z[k]) ? 1.0 : 0.0;
    return h;
}

Eigen::VectorXd MvRbm::sample_hidden(std::span<const double> record, Rng& rng) const {
    return sample_hidden_encoded(encode_record(visible_, record), rng);
}

std::vector<double> MvRbm::sample_visible(const Eigen::VectorXd& hidden, Rng& rng,
                                          int* clamp_events) const {
    if (hidden.size() != b_.size())
        throw std::invalid_argument("sample_visible: hidden vector has " +
                                    std::to_string(hidden.size()) + " entries, model has " +
                                    std::to_string(b_.size()));
    const Eigen::VectorXd means = a_ - W_ * hidden;
    Eigen::VectorXd encoded(a_.size());
    sample_visible_from_means(visible_, offsets_, means, encoded, rng, clamp_events);

    std::vector<double> record(visible_.size());
    for (std::size_t c = 0; c < visible_.size(); ++c) {
        const int off = offsets_[c];
        if (visible_[c].kind == ColumnKind::Nominal) {
            int category = 0;
            for (int d = 0; d < visible_[c].cardinality; ++d)
                if (encoded[off + d] == 1.0) category = d;
            record[c] = category;
        } else {
            record[c] = encoded[off];
        }
    }
    return record;
}

EpochStats cd1_epoch_encoded(MvRbm& model, const Eigen::MatrixXd& encoded, const TrainConfig& cfg,
                             Rng& rng) {
    if (encoded.rows() != model.encoded_dim())
        throw std::invalid_argument("cd1_epoch: data has " + std::to_string(encoded.rows()) +
                                    " encoded dims, model expects " +
                                    std::to_string(model.encoded_dim()));
    const Eigen::Index num_records = encoded.cols();
    if (num_records == 0) throw std::invalid_argument("cd1_epoch: empty data");
    if (cfg.batch_size < 1) throw std::invalid_argument("cd1_epoch: batch_size must be >= 1");
    if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate))
        throw std::invalid_argument("cd1_epoch: learning_rate must be finite and >= 0");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(num_records));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    const Schema& schema = model.visible();
    const std::vector<int>& offsets = model.offsets();
    Eigen::VectorXd& a = model.visible_bias();
    Eigen::VectorXd& b = model.hidden_bias();
    Eigen::MatrixXd& W = model.weights();
    const Eigen::Index dim = a.size();
    const Eigen::Index hidden = b.size();

    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    EpochStats stats;
    double sum_f_data = 0.0;
    double sum_f_recon = 0.0;

    for (Eigen::Index start = 0; start < num_records; start += cfg.batch_size) {
        const Eigen::Index batch = std::min<Eigen::Index>(cfg.batch_size, num_records - start);

        Eigen::MatrixXd v(dim, batch);
        for (Eigen::Index m = 0; m < batch; ++m)
            v.col(m) = encoded.col(order[static_cast<std::size_t>(start + m)]);

        // positive phase: hidden probabilities for the gradient, samples for
        // the reconstruction
        Eigen::MatrixXd z_pos = ((-(W.transpose() * v)).colwise() + b).eval();
        Eigen::MatrixXd p_pos = z_pos.unaryExpr([](double x) { return sigmoid(x); });
        Eigen::MatrixXd h(hidden, batch);
        for (Eigen::Index m = 0; m < batch; ++m)
            for (Eigen::Index k = 0; k < hidden; ++k)
                h(k, m) = uniform(rng) < p_pos(k, m) ? 1.0 : 0.0;

        // one Gibbs step down
        Eigen::MatrixXd means = ((-(W * h)).colwise() + a).eval();
        Eigen::MatrixXd v_recon(dim, batch);
        for (Eigen::Index m = 0; m < batch; ++m)
            sample_visible_from_means(schema, offsets, means.col(m), v_recon.col(m), rng,
                                      &stats.poisson_clamp_events);

        Eigen::MatrixXd z_neg = ((-(W.transpose() * v_recon)).colwise() + b).eval();
        Eigen::MatrixXd p_neg = z_neg.unaryExpr([](double x) { return sigmoid(x); });

        const double scale = cfg.learning_rate / static_cast<double>(batch);
        a += scale * (v - v_recon).rowwise().sum();
        b += scale * (p_pos - p_neg).rowwise().sum();
        // Eq. (2) couples W with +v h in the energy, so the likelihood
        // gradient carries the opposite sign of the textbook RBM update.
        W += scale * (v_recon * p_neg.transpose() - v * p_pos.transpose());

        if (!a.allFinite() || !b.allFinite() || !W.allFinite())
            throw std::runtime_error(
                "cd1_epoch: non-finite parameter after update (batch starting at record " +
                std::to_string(start) + ", learning_rate " + std::to_string(cfg.learning_rate) +
                ")");

        for (Eigen::Index m = 0; m < batch; ++m) {
            double f_data = visible_energy_encoded(schema, offsets, a, v.col(m));
            double f_recon = visible_energy_encoded(schema, offsets, a, v_recon.col(m));
            // preactivations recomputed under the updated parameters
            const Eigen::VectorXd z_d = b - W.transpose() * v.col(m);
            const Eigen::VectorXd z_r = b - W.transpose() * v_recon.col(m);
            for (Eigen::Index k = 0; k < hidden; ++k) {
                f_data -= softplus(z_d[k]);
                f_recon -= softplus(z_r[k]);
            }
            sum_f_data += f_data;
            sum_f_recon += f_recon;
        }
    }

    stats.mean_free_energy = sum_f_data / static_cast<double>(num_records);
    stats.mean_recon_free_energy = sum_f_recon / static_cast<double>(num_records);
    return stats;
}

EpochStats cd1_epoch(MvRbm& model, const Dataset& data, const TrainConfig& cfg, Rng& rng) {
    std::string mismatch;
    if (!model.visible().compatible_with(data.schema, &mismatch))
        throw std::invalid_argument("cd1_epoch: schema mismatch at " + mismatch);
    const Eigen::MatrixXd encoded = encode_dataset(data);
    return cd1_epoch_encoded(model, encoded, cfg, rng);
}

MvRbm train_rbm(const Schema& schema, const Dataset& data, int num_hidden, const TrainConfig& cfg,
                const EpochCallback& on_epoch) {
    cfg.validate();
    std::string mismatch;
    if (!schema.compatible_with(data.schema, &mismatch))
        throw std::invalid_argument("train_rbm: schema mismatch at " + mismatch);
    if (data.num_rows() == 0) throw std::invalid_argument("train_rbm: empty training data");

    Rng rng(cfg.seed);
    MvRbm model = MvRbm::init_random(schema, num_hidden, cfg.weight_init_scale, rng);
    const Eigen::MatrixXd encoded = encode_dataset(data);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const EpochStats stats = cd1_epoch_encoded(model, encoded, cfg, rng);
        if (on_epoch) on_epoch(epoch, stats);
    }
    return model;
}

}  // namespace mixmad
