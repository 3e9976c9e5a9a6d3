#pragma once

#include <Eigen/Core>

namespace shapegrasp {

// Width of the per-object latent code.
inline constexpr int kLatentDim = 32;

// Codes cross module boundaries as doubles; every value originates from a
// float table, so float <-> double conversions are exact.
using LatentCode = Eigen::VectorXd;

}  // namespace shapegrasp
