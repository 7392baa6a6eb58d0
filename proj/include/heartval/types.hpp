#pragma once

#include <Eigen/Core>

namespace heartval {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace heartval
