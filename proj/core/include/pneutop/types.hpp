#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace pneutop {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

} // namespace pneutop
