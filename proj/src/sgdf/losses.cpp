#include "shapegrasp/sgdf/losses.hpp"

#include <algorithm>
#include <cmath>

#include "shapegrasp/error.hpp"

namespace shapegrasp {

double loss_sdf(std::span<const double> s_pred, std::span<const double> s_gt, double c) {
  if (s_pred.size() != s_gt.size()) throw Error(ErrorCode::kDimensionMismatch, "loss_sdf: batch lengths differ");
  if (s_pred.empty()) throw Error(ErrorCode::kEmptyBatch, "loss_sdf: empty batch");
  double sum = 0.0;
  for (std::size_t i = 0; i < s_pred.size(); ++i) sum += std::abs(clamp_sdf(s_gt[i], c) - clamp_sdf(s_pred[i], c));
  return sum / static_cast<double>(s_pred.size());
}

double loss_grasp(std::span<const Grasp> pred, std::span<const Grasp> gt, const GripperModel& gripper) {
  if (pred.size() != gt.size()) throw Error(ErrorCode::kDimensionMismatch, "loss_grasp: batch lengths differ");
  if (pred.empty()) throw Error(ErrorCode::kEmptyBatch, "loss_grasp: empty batch");
  const auto [v, v_flipped] = control_point_sets(gripper);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].frame != gt[i].frame) throw Error(ErrorCode::kInvalidArgument, "loss_grasp: grasps in different frames");
    const ControlPoints p = pred[i].pose.matrix() * v;
    const double plain = (gt[i].pose.matrix() * v - p).norm();
    const double flipped = (gt[i].pose.matrix() * v_flipped - p).norm();
    sum += std::min(plain, flipped);
  }
  return sum / static_cast<double>(pred.size());
}

double code_ramp(int epoch) { return std::min(1.0, static_cast<double>(epoch) / 5.0); }

double loss_code(const LatentTable& latents, int epoch) {
  if (latents.empty()) throw Error(ErrorCode::kEmptyTable, "loss_code: empty latent table");
  double sum = 0.0;
  for (const auto& z : latents.codes) sum += z.norm();
  return sum / static_cast<double>(latents.size()) * code_ramp(epoch);
}

LossBreakdown combine_losses(double sdf, double grasp, double code, const LossWeights& weights) {
  return {sdf, grasp, code, weights.sdf * sdf + weights.grasp * grasp + weights.code * code};
}

}  // namespace shapegrasp
