#ifndef MIXMAD_ENSEMBLE_HPP
#define MIXMAD_ENSEMBLE_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mixmad/dataset.hpp"
#include "mixmad/dbn.hpp"
#include "mixmad/mvrbm.hpp"

namespace mixmad {

inline constexpr double kPInf = std::numeric_limits<double>::infinity();

/// Per-instance scoring result: free energies and ranks per level, the
/// p-norm aggregate, and (after flag_anomalies) the binary flag.
struct ScoreReport {
    Eigen::MatrixXd energies;  // num_instances x depth
    Eigen::MatrixXd ranks;     // num_instances x depth; ties carry averaged ranks
    std::vector<double> aggregate;
    std::vector<std::uint8_t> flags;  // empty until flag_anomalies
    double p = 1.0;
    double contamination = std::nan("");

    std::size_t num_instances() const { return static_cast<std::size_t>(energies.rows()); }
    int depth() const { return static_cast<int>(energies.cols()); }
};

enum class RbmRole { Detection, Abstraction };

struct FitEvent {
    int level = 0;  // 1-based
    RbmRole role = RbmRole::Detection;
    int num_hidden = 0;
    int epoch = 0;
    EpochStats stats;
};
using FitObserver = std::function<void(const FitEvent&)>;

/// Depth-varying DBN ensemble: L detection RBMs (detector l scores the
/// level-l representation) plus L-1 abstraction RBMs producing those
/// representations.
class EnsembleModel {
  public:
    /// Grows the ensemble level by level: at level l train the detector on
    /// v_l, then (below the top) train the abstraction RBM on v_l and sample
    /// the next representation from its hidden posterior. Work is linear in
    /// depth; deterministic given cfg.seed. Expects normalized data.
    static EnsembleModel fit(const Dataset& data, int depth,
                             std::span<const int> abstraction_sizes,
                             std::span<const int> detector_sizes, const TrainConfig& cfg,
                             double p = 1.0, const FitObserver& observer = nullptr);

    /// F_1 from the mixed free energy on raw records, F_l (l >= 2) from the
    /// abstracted free energy of the mean-field recursion; per-level ranks
    /// ascend with energy; aggregate via the model's p. Pure; parallel over
    /// rows when threads > 1 with output independent of the thread count.
    ScoreReport score(const Dataset& data, int threads = 1) const;

    const Schema& schema() const { return schema_; }
    const AbstractionChain& chain() const { return chain_; }
    const MvRbm& detector(int level) const;  // 1-based
    int depth() const { return static_cast<int>(detectors_.size()); }
    double p() const { return p_; }

    /// Assembles a model from parts (deserialization path).
    static EnsembleModel from_parts(Schema schema, std::vector<MvRbm> detectors,
                                    std::vector<MvRbm> abstractions, double p);

  private:
    EnsembleModel() = default;
    Schema schema_;
    AbstractionChain chain_;
    std::vector<MvRbm> detectors_;
    double p_ = 1.0;
};

/// Ranks 1..M ascending in value; ties receive the mean of the positions
/// they span, so the ranks always sum to M(M+1)/2.
std::vector<double> average_ranks(std::span<const double> values);

/// (sum_l r_l^p)^(1/p); the max of the ranks at p = infinity. Borda count at
/// p = 1. Throws on a negative rank.
double aggregate_pnorm(std::span<const double> ranks, double p);

/// Flags the ceil(contamination * M) instances with the highest aggregate
/// scores; ties at the threshold break by instance index.
void flag_anomalies(ScoreReport& report, double contamination);

/// The flag vector alone, for score lists without a full report.
std::vector<std::uint8_t> top_fraction_flags(std::span<const double> scores, double contamination);

/// Aggregates the report's rank matrix at an arbitrary p (for CLI sweeps).
std::vector<double> aggregate_report(const ScoreReport& report, double p);

}  // namespace mixmad

#endif
