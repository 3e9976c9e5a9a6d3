#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shapegrasp/geometry/bvh.hpp"
#include "shapegrasp/gripper/gripper.hpp"

namespace shapegrasp {

// Approach axis anti-aligned with the normal of each of n_points surface
// samples, origin set back by finger_depth along the normal, and n_rotations
// copies spun about the approach axis in 360/n_rotations degree steps.
// Grasp index = point_index * n_rotations + k.
std::vector<Grasp> generate_candidates(const TriMesh& mesh, const GripperModel& gripper, std::size_t n_points,
                                       std::size_t n_rotations, std::uint64_t seed);

struct GraspProvenance {
  std::size_t n_surface_points = 0;
  std::size_t n_rotations = 0;
  double mu = 0.5;
  double clearance = 0.003;
};

struct GraspSet {
  std::string object_id;
  std::vector<Grasp> grasps;  // object-canonical frame
  GraspProvenance provenance;
};

// Keeps candidates that are antipodal at `mu` and collision free at
// `clearance`, preserving order. Warns when nothing survives.
GraspSet label_valid_grasps(const IndexedMesh& mesh, const std::vector<Grasp>& candidates,
                            const GripperModel& gripper, const GraspProvenance& provenance,
                            const std::string& object_id = "");

struct SgdfSample {
  Vec3 x = Vec3::Zero();
  double s = 0.0;
  Vec3 delta_t = Vec3::Zero();  // x + delta_t reproduces the grasp translation exactly
  Mat3 rotation = Mat3::Identity();
};

struct SdfSamplingParams {
  double near_fraction = 0.8;
  double near_sigma = 0.025;
  double box_scale = 1.5;
};

// Near-surface and bounding-box samples with their signed distance and the
// grasp whose translation is nearest (ties to the lowest grasp index).
std::vector<SgdfSample> sample_sgdf(const IndexedMesh& mesh, const GraspSet& grasps, std::size_t n_samples,
                                    std::uint64_t seed, const SdfSamplingParams& params = {});

// Labels given points (snapped to the label lattice first).
std::vector<SgdfSample> label_points(const IndexedMesh& mesh, const GraspSet& grasps, std::span<const Vec3> points);

// Grasp translations and sample points live on a 2^-32 m lattice. For
// coordinates below 2^20 m the difference of two lattice points is exactly
// representable, so x + delta_t reproduces the grasp translation bit-for-bit.
Vec3 snap_to_label_lattice(const Vec3& p);

// delta with x + delta == target bit-exactly; nudges t - x by ulps when the
// plain difference rounds. Throws if no such delta is found.
Vec3 exact_offset(const Vec3& x, const Vec3& target);

}  // namespace shapegrasp
