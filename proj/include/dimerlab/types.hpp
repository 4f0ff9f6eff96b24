#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>

namespace dimerlab {

using Complex = std::complex<double>;
using Dense = Eigen::MatrixXcd;
using Sparse = Eigen::SparseMatrix<Complex>;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace dimerlab
