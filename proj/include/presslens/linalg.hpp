#pragma once

#include <vector>

#include <Eigen/Sparse>

namespace presslens {

/// A(rows, cols) for sorted index lists; entries outside the selection are dropped.
Eigen::SparseMatrix<double> extract_block(const Eigen::SparseMatrix<double>& a, const std::vector<int>& rows,
                                          const std::vector<int>& cols);

Eigen::VectorXd gather(const Eigen::VectorXd& x, const std::vector<int>& idx);
void scatter(const Eigen::VectorXd& values, const std::vector<int>& idx, Eigen::VectorXd& target);

}  // namespace presslens
