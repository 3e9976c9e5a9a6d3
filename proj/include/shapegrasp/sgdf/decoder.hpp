#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "shapegrasp/geometry/pose.hpp"
#include "shapegrasp/gripper/gripper.hpp"
#include "shapegrasp/latent.hpp"

namespace shapegrasp {

template <class T>
using MatX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <class T>
using Mat3X = Eigen::Matrix<T, 3, Eigen::Dynamic>;

// Output rows: s, delta_t (3), r1 (3), r2 (3).
inline constexpr int kOutputDim = 10;

struct DecoderArch {
  int latent_dim = kLatentDim;
  int hidden_layers = 6;
  int width = 256;
  int skip_layer = 3;          // hidden layer that re-reads z and x; out of range disables
  double dropout = 0.2;        // on hidden activations during training
  double coord_scale = 10.0;   // x enters the network multiplied by this

  int input_dim() const { return latent_dim + 3; }
  bool has_skip() const { return skip_layer > 0 && skip_layer < hidden_layers; }
  int layer_input_dim(int layer) const;
  int layer_output_dim(int layer) const { return layer == hidden_layers ? kOutputDim : width; }
  // Throws kConfig.
  void validate() const;
};

// Weight-normalised linear layer: row i of the weight is g_i * v_i / |v_i|.
template <class T>
struct WnLayer {
  MatX<T> v;
  VecX<T> g;
  VecX<T> b;

  MatX<T> weight() const;
};

// Hidden layers 0..hidden_layers-1 (ReLU) followed by a linear head.
template <class T>
struct Mlp {
  DecoderArch arch;
  std::vector<WnLayer<T>> layers;
};

using SgdfDecoder = Mlp<float>;

// Uniform(+-1/sqrt(fan_in)) directions and biases, gains set so the initial
// weight equals the direction.
template <class T>
Mlp<T> init_decoder(const DecoderArch& arch, std::uint64_t seed);

template <class To, class From>
Mlp<To> cast_decoder(const Mlp<From>& net) {
  Mlp<To> out;
  out.arch = net.arch;
  for (const auto& l : net.layers) out.layers.push_back({l.v.template cast<To>(), l.g.template cast<To>(), l.b.template cast<To>()});
  return out;
}

// Per hidden layer, width x batch entries of 0 or 1/(1-p).
template <class T>
using DropoutMasks = std::vector<MatX<T>>;

template <class T>
DropoutMasks<T> make_dropout_masks(const DecoderArch& arch, Eigen::Index batch, std::uint64_t seed);

// Raw outputs (kOutputDim x N) for points sharing one code. No masks means
// evaluation mode.
template <class T>
MatX<T> forward_batch(const Mlp<T>& net, const VecX<T>& z, const Mat3X<T>& x, const DropoutMasks<T>* masks = nullptr);

struct SgdfOutput {
  double s = 0.0;
  Vec3 delta_t = Vec3::Zero();
  Vec3 r1 = Vec3::UnitX();
  Vec3 r2 = Vec3::UnitY();
};

// Single-point evaluation. In train mode a dropout mask is drawn from
// dropout_seed.
SgdfOutput forward(const SgdfDecoder& net, const LatentCode& z, const Vec3& x, bool train_mode = false,
                   std::uint64_t dropout_seed = 0);

// Object-frame grasp T(x + delta_t, GS(r1, r2)).
Grasp decode_grasp(const Vec3& x, const Vec3& delta_t, const Vec3& r1, const Vec3& r2);

// Per-object latent codes, kept in insertion order.
struct LatentTable {
  std::vector<std::string> ids;
  std::vector<LatentCode> codes;

  std::size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }
  // Throws kInvalidArgument for unknown ids.
  const LatentCode& at(const std::string& id) const;
  void add(const std::string& id, const LatentCode& code);
};

}  // namespace shapegrasp
