#include "mixmad/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

namespace mixmad {

Eigen::MatrixXd to_numeric_matrix(const Dataset& data) {
    return encode_dataset(data).transpose();
}

std::vector<double> knn_score(const Eigen::MatrixXd& train, const Eigen::MatrixXd& query, int k,
                              bool exclude_self) {
    if (train.cols() != query.cols())
        throw std::invalid_argument("knn_score: train and query dimensions differ");
    const Eigen::Index available = train.rows() - (exclude_self ? 1 : 0);
    if (k < 1 || k > available)
        throw std::invalid_argument("knn_score: k = " + std::to_string(k) + " but only " +
                                    std::to_string(available) + " neighbors are available");
    if (exclude_self && train.rows() != query.rows())
        throw std::invalid_argument("knn_score: exclude_self requires query rows to index train rows");

    std::vector<double> scores(static_cast<std::size_t>(query.rows()));
    std::vector<double> distances;
    distances.reserve(static_cast<std::size_t>(train.rows()));
    for (Eigen::Index q = 0; q < query.rows(); ++q) {
        distances.clear();
        for (Eigen::Index t = 0; t < train.rows(); ++t) {
            if (exclude_self && t == q) continue;
            distances.push_back((train.row(t) - query.row(q)).norm());
        }
        std::partial_sort(distances.begin(), distances.begin() + k, distances.end());
        double mean = 0.0;
        for (int i = 0; i < k; ++i) mean += distances[static_cast<std::size_t>(i)];
        scores[static_cast<std::size_t>(q)] = mean / static_cast<double>(k);
    }
    return scores;
}

void jacobi_eigensolver(Eigen::MatrixXd matrix, Eigen::VectorXd& eigenvalues,
                        Eigen::MatrixXd& eigenvectors) {
    const Eigen::Index n = matrix.rows();
    if (matrix.cols() != n) throw std::invalid_argument("jacobi_eigensolver: matrix not square");
    eigenvectors = Eigen::MatrixXd::Identity(n, n);
    if (n == 1) {
        eigenvalues = matrix.diagonal();
        return;
    }

    const double frobenius = matrix.norm();
    const double tolerance = 1e-14 * std::max(frobenius, 1.0);
    constexpr int kMaxSweeps = 100;

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += matrix(p, q) * matrix(p, q);
        if (std::sqrt(2.0 * off) <= tolerance) break;

        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = matrix(p, q);
                if (std::abs(apq) <= tolerance / static_cast<double>(n * n)) continue;
                const double theta = (matrix(q, q) - matrix(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                // A <- J^T A J with the Givens rotation in the (p, q) plane
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double aip = matrix(i, p);
                    const double aiq = matrix(i, q);
                    matrix(i, p) = c * aip - s * aiq;
                    matrix(i, q) = s * aip + c * aiq;
                }
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double api = matrix(p, i);
                    const double aqi = matrix(q, i);
                    matrix(p, i) = c * api - s * aqi;
                    matrix(q, i) = s * api + c * aqi;
                }
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double vip = eigenvectors(i, p);
                    const double viq = eigenvectors(i, q);
                    eigenvectors(i, p) = c * vip - s * viq;
                    eigenvectors(i, q) = s * vip + c * viq;
                }
            }
        }
    }
    eigenvalues = matrix.diagonal();
}

std::vector<double> pca_score(const Eigen::MatrixXd& train, const Eigen::MatrixXd& query,
                              double discard_fraction) {
    if (train.cols() != query.cols())
        throw std::invalid_argument("pca_score: train and query dimensions differ");
    if (!(discard_fraction > 0.0) || !(discard_fraction < 1.0))
        throw std::invalid_argument("pca_score: discard fraction must lie in (0, 1)");
    if (train.rows() < 1) throw std::invalid_argument("pca_score: empty training data");

    const Eigen::RowVectorXd mean = train.colwise().mean();
    const Eigen::MatrixXd centered = train.rowwise() - mean;
    const double denom = train.rows() > 1 ? static_cast<double>(train.rows() - 1) : 1.0;
    const Eigen::MatrixXd covariance = centered.transpose() * centered / denom;

    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
    jacobi_eigensolver(covariance, eigenvalues, eigenvectors);

    const double total = eigenvalues.sum();
    if (!(total > 0.0)) {
        std::cerr << "pca_score: training data has zero variance; all scores are 0\n";
        return std::vector<double>(static_cast<std::size_t>(query.rows()), 0.0);
    }

    // components sorted by eigenvalue, descending; equal values break toward
    // the higher original index
    std::vector<Eigen::Index> order(static_cast<std::size_t>(eigenvalues.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (eigenvalues[a] != eigenvalues[b]) return eigenvalues[a] > eigenvalues[b];
        return a > b;
    });

    const double target = (1.0 - discard_fraction) * total;
    double mass = 0.0;
    Eigen::Index kept = 0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        mass += eigenvalues[order[static_cast<std::size_t>(i)]];
        kept = i + 1;
        if (mass >= target) break;
    }

    Eigen::MatrixXd basis(train.cols(), kept);
    for (Eigen::Index i = 0; i < kept; ++i)
        basis.col(i) = eigenvectors.col(order[static_cast<std::size_t>(i)]);

    std::vector<double> scores(static_cast<std::size_t>(query.rows()));
    for (Eigen::Index q = 0; q < query.rows(); ++q) {
        const Eigen::VectorXd centered_query = (query.row(q) - mean).transpose();
        const Eigen::VectorXd residual = centered_query - basis * (basis.transpose() * centered_query);
        scores[static_cast<std::size_t>(q)] = residual.squaredNorm();
    }
    return scores;
}

}  // namespace mixmad
