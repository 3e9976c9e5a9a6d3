#pragma once

#include <algorithm>
#include <span>

#include "shapegrasp/gripper/gripper.hpp"
#include "shapegrasp/sgdf/decoder.hpp"

namespace shapegrasp {

struct LossWeights {
  double sdf = 10.0;
  double grasp = 1.0;
  double code = 0.001;
};

struct LossBreakdown {
  double sdf = 0.0;
  double grasp = 0.0;
  double code = 0.0;
  double total = 0.0;
};

inline double clamp_sdf(double x, double c) { return std::min(std::max(x, -c), c); }

// Mean of |clamp(s_gt) - clamp(s_pred)|. Throws kEmptyBatch, kDimensionMismatch.
double loss_sdf(std::span<const double> s_pred, std::span<const double> s_gt, double c);

// Per grasp the smaller Frobenius distance between the predicted control
// points and the ground truth's plain or flipped control points; batch mean.
double loss_grasp(std::span<const Grasp> pred, std::span<const Grasp> gt, const GripperModel& gripper);

// min(1, epoch / 5); epochs count from 1.
double code_ramp(int epoch);

// Mean code norm times the ramp. Throws kEmptyTable.
double loss_code(const LatentTable& latents, int epoch);

LossBreakdown combine_losses(double sdf, double grasp, double code, const LossWeights& weights);

}  // namespace shapegrasp
