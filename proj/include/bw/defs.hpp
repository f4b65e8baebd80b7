#pragma once

#include <Eigen/Dense>

namespace bw {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/* Margin used when testing membership in an open domain: points closer
   than this to the boundary are treated as outside. */
inline constexpr double kDomainMargin = 1e-12;

}  // namespace bw
