#ifndef MIXMAD_BASELINES_HPP
#define MIXMAD_BASELINES_HPP

#include <vector>

#include <Eigen/Core>

#include "mixmad/dataset.hpp"

namespace mixmad {

/// Numeric view of a dataset for the shallow baselines: binary 0/1, gaussian
/// as stored (normalized upstream), nominal one-hot, poisson raw counts.
/// One instance per row.
Eigen::MatrixXd to_numeric_matrix(const Dataset& data);

/// Mean Euclidean distance from each query row to its k nearest training
/// rows; higher = more anomalous. With exclude_self, query row i skips
/// training row i (use when scoring the training set against itself).
std::vector<double> knn_score(const Eigen::MatrixXd& train, const Eigen::MatrixXd& query, int k,
                              bool exclude_self = false);

/// Squared reconstruction error of the mean-centered query projected onto
/// the leading principal components of the training data; components are
/// kept until their cumulative eigenvalue mass first reaches
/// 1 - discard_fraction. Zero-variance training data yields all-zero scores
/// with a warning on stderr.
std::vector<double> pca_score(const Eigen::MatrixXd& train, const Eigen::MatrixXd& query,
                              double discard_fraction);

/// Cyclic Jacobi eigendecomposition of a symmetric matrix; eigenvalues
/// unsorted in `eigenvalues`, matching orthonormal columns in `eigenvectors`.
void jacobi_eigensolver(Eigen::MatrixXd matrix, Eigen::VectorXd& eigenvalues,
                        Eigen::MatrixXd& eigenvectors);

}  // namespace mixmad

#endif
