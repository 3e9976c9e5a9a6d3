#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shapegrasp/datagen/labels.hpp"
#include "shapegrasp/sgdf/decoder.hpp"
#include "shapegrasp/sgdf/losses.hpp"

namespace shapegrasp {

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 1e-3;
  int batch_size = 512;
  double clamp = 0.1;
  LossWeights weights;
  DecoderArch arch;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double code_init_std = 0.01;
  std::uint64_t seed = 0;

  // Throws kConfig.
  void validate() const;
};

// Network weights plus the code table (latent_dim x n_objects). Gradients
// use the same shape.
template <class T>
struct SgdfParams {
  Mlp<T> net;
  MatX<T> codes;
};

template <class T>
SgdfParams<T> zeros_like(const SgdfParams<T>& p);

// Flat views over every tensor, in a fixed order.
template <class T>
std::vector<Eigen::Map<VecX<T>>> tensor_views(SgdfParams<T>& p);

// Samples of one object; every sample uses code column `object`.
template <class T>
struct SgdfBatch {
  int object = 0;
  Mat3X<T> x;
  VecX<T> s;
  Mat3X<T> t;                              // grasp translation x + delta_t
  Eigen::Matrix<T, 9, Eigen::Dynamic> r;   // grasp rotation, column-major

  Eigen::Index size() const { return x.cols(); }
};

template <class T>
SgdfBatch<T> make_batch(std::span<const SgdfSample> samples, std::span<const std::size_t> indices, int object);

// Weighted loss on one batch, with the code term over the whole table.
template <class T>
LossBreakdown decoder_loss(const SgdfParams<T>& params, const SgdfBatch<T>& batch, int epoch,
                           const TrainConfig& config, const GripperModel& gripper,
                           const DropoutMasks<T>* masks = nullptr);

// Exact reverse-mode gradient of decoder_loss. Throws kNonFiniteLoss.
template <class T>
LossBreakdown gradients(const SgdfParams<T>& params, const SgdfBatch<T>& batch, int epoch, const TrainConfig& config,
                        const GripperModel& gripper, const DropoutMasks<T>* masks, SgdfParams<T>& grad);

template <class T>
struct AdamState {
  SgdfParams<T> m;
  SgdfParams<T> v;
  std::int64_t step = 0;
};

template <class T>
AdamState<T> make_adam(const SgdfParams<T>& params);

template <class T>
void adam_step(SgdfParams<T>& params, const SgdfParams<T>& grad, AdamState<T>& state, const TrainConfig& config);

struct TrainObject {
  std::string id;
  std::vector<SgdfSample> samples;
};

struct EpochLoss {
  int epoch = 0;
  LossBreakdown loss;  // mean over the epoch's batches
};

struct TrainResult {
  SgdfDecoder decoder;
  LatentTable latents;
  std::vector<EpochLoss> log;
  bool aborted = false;   // non-finite loss; parameters are from the last good epoch
  std::string message;
};

using EpochCallback = std::function<void(const EpochLoss&)>;

// Adam over weights and codes jointly. Each batch draws one object
// uniformly, then batch_size of its samples (reshuffled when exhausted);
// an epoch has ceil(total samples / batch_size) batches.
TrainResult train(const std::vector<TrainObject>& objects, const TrainConfig& config, const GripperModel& gripper,
                  const EpochCallback& on_epoch = {});

// Initial parameters used by train().
SgdfParams<float> init_params(const TrainConfig& config, std::size_t n_objects);

std::string loss_log_csv(const std::vector<EpochLoss>& log);

}  // namespace shapegrasp
