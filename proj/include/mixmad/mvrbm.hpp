#ifndef MIXMAD_MVRBM_HPP
#define MIXMAD_MVRBM_HPP

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mixmad/dataset.hpp"
#include "mixmad/rng.hpp"
#include "mixmad/schema.hpp"

namespace mixmad {

struct TrainConfig {
    double learning_rate = 0.3;
    int batch_size = 64;
    int epochs = 50;
    std::uint64_t seed = 0;
    double weight_init_scale = 0.01;

    void validate() const;
};

struct EpochStats {
    double mean_free_energy = 0.0;        // over the training data
    double mean_recon_free_energy = 0.0;  // over the CD-1 reconstructions
    int poisson_clamp_events = 0;

    /// Reconstruction free-energy gap; grows as the data is pulled below the
    /// model's one-step fantasies.
    double gap() const { return mean_recon_free_energy - mean_free_energy; }
};

/// Mixed-variate RBM over typed visible units and K binary hidden units.
///
/// The energy is E(x,h) = sum_i E_i(x_i) + sum_k (-b_k + sum_i G_ik(x_i)) h_k
/// with type-specific sub-energies E_i and couplings G_ik. Parameters live in
/// the one-hot encoded layout: visible bias a (one entry per encoded dim),
/// hidden bias b, weights W (encoded_dim x K). The all-binary case is the
/// standard RBM used above level 1.
class MvRbm {
  public:
    MvRbm(Schema visible, int num_hidden);  // all parameters zero

    /// W ~ Normal(0, weight_scale^2), biases zero.
    static MvRbm init_random(Schema visible, int num_hidden, double weight_scale, Rng& rng);

    const Schema& visible() const { return visible_; }
    int num_hidden() const { return static_cast<int>(b_.size()); }
    int num_columns() const { return static_cast<int>(visible_.size()); }
    int encoded_dim() const { return static_cast<int>(a_.size()); }
    bool all_binary() const { return all_binary_; }

    const Eigen::VectorXd& visible_bias() const { return a_; }
    const Eigen::VectorXd& hidden_bias() const { return b_; }
    const Eigen::MatrixXd& weights() const { return W_; }
    Eigen::VectorXd& visible_bias() { return a_; }
    Eigen::VectorXd& hidden_bias() { return b_; }
    Eigen::MatrixXd& weights() { return W_; }

    /// z_k = b_k - sum_i G_ik(x_i). Accepts mean-field (real-valued) inputs
    /// on binary columns; strict cell validation happens at dataset level.
    Eigen::VectorXd hidden_preactivation(std::span<const double> record) const;
    Eigen::VectorXd hidden_preactivation_encoded(const Eigen::VectorXd& v) const;

    /// F(x) = sum_i E_i(x_i) - sum_k softplus(z_k) = -log sum_h exp(-E(x,h)).
    double free_energy(std::span<const double> record) const;
    double free_energy_encoded(const Eigen::VectorXd& v) const;

    /// h_k ~ Bernoulli(sigmoid(z_k)), independently. Returns 0/1 entries.
    Eigen::VectorXd sample_hidden(std::span<const double> record, Rng& rng) const;
    Eigen::VectorXd sample_hidden_encoded(const Eigen::VectorXd& v, Rng& rng) const;

    /// One Gibbs step down: per column, with m_i = a_i - sum_k W_ik h_k,
    /// binary ~ Bernoulli(sigmoid(m)), gaussian ~ Normal(m, 1), poisson ~
    /// Poisson(e^m) (m clamped at 30, counted in *clamp_events), nominal ~
    /// Categorical(softmax(m_c)). Returns a typed record.
    std::vector<double> sample_visible(const Eigen::VectorXd& hidden, Rng& rng,
                                       int* clamp_events = nullptr) const;

    const std::vector<int>& offsets() const { return offsets_; }

  private:
    Schema visible_;
    std::vector<int> offsets_;  // size N+1
    bool all_binary_ = false;
    Eigen::VectorXd a_;  // encoded_dim
    Eigen::VectorXd b_;  // K
    Eigen::MatrixXd W_;  // encoded_dim x K
};

/// Type-specific visible sub-energy E_i(x_i). `bias` spans the column's
/// encoded slice (length 1, or cardinality for nominal).
double sub_energy(const ColumnSpec& spec, double cell, std::span<const double> bias);

/// Numerically stable log(1 + e^z).
double softplus(double z);
double sigmoid(double z);

/// One CD-1 epoch over shuffled mini-batches: positive phase uses hidden
/// probabilities, a sampled h drives the reconstruction, and parameters move
/// by learning_rate * (positive - negative statistics) averaged per batch.
/// Throws if any parameter goes non-finite.
EpochStats cd1_epoch(MvRbm& model, const Dataset& data, const TrainConfig& cfg, Rng& rng);
EpochStats cd1_epoch_encoded(MvRbm& model, const Eigen::MatrixXd& encoded,
                             const TrainConfig& cfg, Rng& rng);

using EpochCallback = std::function<void(int epoch, const EpochStats&)>;

/// Trains a fresh MvRbm on the data: seeded Normal(0, weight_init_scale^2)
/// weights, zero biases, cfg.epochs CD-1 epochs.
MvRbm train_rbm(const Schema& schema, const Dataset& data, int num_hidden,
                const TrainConfig& cfg, const EpochCallback& on_epoch = nullptr);

}  // namespace mixmad

#endif
