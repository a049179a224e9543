#pragma once

#include <Eigen/Dense>

namespace pllab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A point in ambient chart coordinates.
using Point = Vec;

/// A tangent vector anchored at a point.
struct TangentVector {
  Point at;
  Vec vec;
};

/// A dense linear map between coordinate spaces (rows = codomain).
struct LinearMap {
  Mat matrix;

  int domain_dim() const { return static_cast<int>(matrix.cols()); }
  int codomain_dim() const { return static_cast<int>(matrix.rows()); }
};

}  // namespace pllab
