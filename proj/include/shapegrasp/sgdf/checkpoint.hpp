#pragma once

#include <cstdint>
#include <string>

#include "shapegrasp/sgdf/decoder.hpp"

namespace shapegrasp {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint64_t seed = 0;
  SgdfDecoder decoder;
  LatentTable latents;
};

// "SGDF1", u32 version, u64 seed, architecture, per-layer float32 tensors
// (v row-major, g, b), then the code table (id string + latent_dim float32).
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace shapegrasp
