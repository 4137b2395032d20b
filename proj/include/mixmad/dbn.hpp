#ifndef MIXMAD_DBN_HPP
#define MIXMAD_DBN_HPP

#include <span>
#include <vector>

#include <Eigen/Core>

#include "mixmad/mvrbm.hpp"
#include "mixmad/rng.hpp"

namespace mixmad {

/// Ordered stack of frozen abstraction RBMs. Layer 1 takes the mixed-type
/// record; every layer above is all-binary and consumes the previous layer's
/// hidden vector. Layers are immutable once appended.
class AbstractionChain {
  public:
    AbstractionChain() = default;

    /// Appends a trained layer; layers >= 2 must be all-binary with visible
    /// dimension equal to the previous layer's hidden dimension.
    void append(MvRbm layer);

    int depth() const { return static_cast<int>(layers_.size()); }
    const MvRbm& layer(int index) const { return layers_.at(static_cast<std::size_t>(index)); }
    const std::vector<MvRbm>& layers() const { return layers_; }

    /// Samples h_1 ~ B(sigmoid(z)) from the record, then each higher layer
    /// from the bits below it; returns the 0/1 vector at `depth` (1-based).
    Eigen::VectorXd abstract_stochastic(std::span<const double> record, int depth, Rng& rng) const;

    /// Mean-field recursion: probabilities replace samples at every layer.
    /// Deterministic; entries in (0,1). Used at scoring time.
    Eigen::VectorXd abstract_deterministic(std::span<const double> record, int depth) const;

  private:
    std::vector<MvRbm> layers_;
};

/// Free energy of the all-binary detector evaluated on an abstracted vector
/// h (0/1 or mean-field entries in [0,1]):
///   F(h) = -a.h - sum_k softplus(b_k - (W^T h)_k).
/// On 0/1 inputs this equals MvRbm::free_energy of the same parameters.
double abstracted_free_energy(const MvRbm& detector, const Eigen::VectorXd& h);

}  // namespace mixmad

#endif
