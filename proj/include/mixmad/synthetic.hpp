#ifndef MIXMAD_SYNTHETIC_HPP
#define MIXMAD_SYNTHETIC_HPP

#include <cstdint>

#include "mixmad/dataset.hpp"

namespace mixmad {

/// Mixed-type synthetic benchmark: inliers come from one coherent regime
/// (correlated gaussians squashed into [0,1], fixed binary/nominal patterns
/// with 5% flip noise, Poisson(3) counts); outliers are uniform over each
/// column's range and labeled as anomalies.
struct SynthConfig {
    int num_binary = 2;
    int num_gaussian = 3;
    int num_nominal = 2;
    int nominal_cardinality = 4;
    int num_poisson = 1;
    int num_inliers = 500;
    int num_outliers = 50;
};

Dataset generate_synthetic(const SynthConfig& config, std::uint64_t seed);

}  // namespace mixmad

#endif
