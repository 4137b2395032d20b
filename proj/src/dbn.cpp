#include "mixmad/dbn.hpp"

#include <stdexcept>
#include <string>

namespace mixmad {

void AbstractionChain::append(MvRbm layer) {
    if (!layers_.empty()) {
        if (!layer.all_binary())
            throw std::invalid_argument("abstraction layer " + std::to_string(layers_.size() + 1) +
                                        " must have all-binary visible units");
        if (layer.num_columns() != layers_.back().num_hidden())
            throw std::invalid_argument(
                "abstraction layer " + std::to_string(layers_.size() + 1) + " consumes " +
                std::to_string(layer.num_columns()) + " units but the layer below produces " +
                std::to_string(layers_.back().num_hidden()));
    }
    layers_.push_back(std::move(layer));
}

Eigen::VectorXd AbstractionChain::abstract_stochastic(std::span<const double> record, int depth,
                                                      Rng& rng) const {
    if (depth < 1 || depth > this->depth())
        throw std::invalid_argument("abstract_stochastic: depth " + std::to_string(depth) +
                                    " out of range [1, " + std::to_string(this->depth()) + "]");
    Eigen::VectorXd h = layers_.front().sample_hidden(record, rng);
    for (int l = 1; l < depth; ++l) h = layers_[static_cast<std::size_t>(l)].sample_hidden_encoded(h, rng);
    return h;
}

Eigen::VectorXd AbstractionChain::abstract_deterministic(std::span<const double> record,
                                                         int depth) const {
    if (depth < 1 || depth > this->depth())
        throw std::invalid_argument("abstract_deterministic: depth " + std::to_string(depth) +
                                    " out of range [1, " + std::to_string(this->depth()) + "]");
    Eigen::VectorXd h = layers_.front().hidden_preactivation(record);
    h = h.unaryExpr([](double z) { return sigmoid(z); });
    for (int l = 1; l < depth; ++l) {
        h = layers_[static_cast<std::size_t>(l)].hidden_preactivation_encoded(h);
        h = h.unaryExpr([](double z) { return sigmoid(z); });
    }
    return h;
}

double abstracted_free_energy(const MvRbm& detector, const Eigen::VectorXd& h) {
    if (!detector.all_binary())
        throw std::invalid_argument("abstracted_free_energy: detector must be all-binary");
    if (h.size() != detector.encoded_dim())
        throw std::invalid_argument("abstracted_free_energy: input has " +
                                    std::to_string(h.size()) + " dims, detector expects " +
                                    std::to_string(detector.encoded_dim()));
    const Eigen::VectorXd& a = detector.visible_bias();
    double f = 0.0;
    for (Eigen::Index d = 0; d < h.size(); ++d) f += -a[d] * h[d];
    const Eigen::VectorXd z = detector.hidden_bias() - detector.weights().transpose() * h;
    for (Eigen::Index k = 0; k < z.size(); ++k) f -= softplus(z[k]);
    return f;
}

}  // namespace mixmad
