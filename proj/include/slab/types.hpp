#pragma once

#include <complex>

#include <Eigen/Dense>

namespace slab {

using Complex = std::complex<double>;
/// Points of R^n are row vectors in the formulas; stored as column vectors.
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace slab
