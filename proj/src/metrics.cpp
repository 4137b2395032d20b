#include "mixmad/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mixmad {

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("auc: scores and labels differ in length");
    std::size_t positives = 0;
    for (auto l : labels) positives += l ? 1 : 0;
    const std::size_t negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0)
        throw std::invalid_argument("auc: need at least one positive and one negative label");

    // Mann-Whitney via rank sums; tied scores share averaged ranks, which
    // counts cross-class ties as 1/2.
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double positive_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t)
            if (labels[idx[t]]) positive_rank_sum += rank;
        i = j;
    }
    const double p = static_cast<double>(positives);
    const double n = static_cast<double>(negatives);
    return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double auc(const LabeledScores& ls) { return auc(ls.scores, ls.labels); }

double ndcg_at_t(std::span<const double> scores, std::span<const std::uint8_t> labels, int t) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("ndcg_at_t: scores and labels differ in length");
    if (t < 1) throw std::invalid_argument("ndcg_at_t: T must be >= 1");
    std::size_t positives = 0;
    for (auto l : labels) positives += l ? 1 : 0;
    if (positives == 0) return 0.0;

    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    const std::size_t cut = std::min<std::size_t>(static_cast<std::size_t>(t), scores.size());
    double dcg = 0.0;
    for (std::size_t rank = 1; rank <= cut; ++rank) {
        const double rel = labels[idx[rank - 1]] ? 1.0 : 0.0;
        dcg += rel / std::log2(static_cast<double>(rank + 1));
    }
    const std::size_t ideal = std::min<std::size_t>(static_cast<std::size_t>(t), positives);
    double ideal_dcg = 0.0;
    for (std::size_t rank = 1; rank <= ideal; ++rank)
        ideal_dcg += 1.0 / std::log2(static_cast<double>(rank + 1));
    return dcg / ideal_dcg;
}

double ndcg_at_t(const LabeledScores& ls, int t) { return ndcg_at_t(ls.scores, ls.labels, t); }

double f_score(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> labels) {
    if (predicted.size() != labels.size())
        throw std::invalid_argument("f_score: predictions and labels differ in length");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] && labels[i]) ++tp;
        else if (predicted[i] && !labels[i]) ++fp;
        else if (!predicted[i] && labels[i]) ++fn;
    }
    const double precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace mixmad
