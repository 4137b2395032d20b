#ifndef MIXMAD_METRICS_HPP
#define MIXMAD_METRICS_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace mixmad {

/// Scores paired with ground truth; higher score = more anomalous.
struct LabeledScores {
    std::vector<double> scores;
    std::vector<std::uint8_t> labels;  // 1 = anomaly
};

/// Probability that a random positive outscores a random negative, ties at
/// 1/2 (Mann-Whitney rank-sum form). Throws if either class is absent.
double auc(const LabeledScores& ls);
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Binary-relevance NDCG over the top T of the score-descending order, with
/// gain rel_t and discount log2(t+1); 0 when no positives exist.
double ndcg_at_t(const LabeledScores& ls, int t);
double ndcg_at_t(std::span<const double> scores, std::span<const std::uint8_t> labels, int t);

/// F1 = 2 * precision * recall / (precision + recall); 0 when undefined.
double f_score(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> labels);

}  // namespace mixmad

#endif
