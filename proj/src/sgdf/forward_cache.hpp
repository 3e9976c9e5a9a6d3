#pragma once

#include <vector>

#include "shapegrasp/sgdf/decoder.hpp"

namespace shapegrasp::detail {

// Activations kept for the backward pass.
template <class T>
struct ForwardCache {
  std::vector<MatX<T>> weights;  // effective weights per layer
  std::vector<MatX<T>> inputs;   // layer inputs
  std::vector<MatX<T>> pre;      // hidden pre-activations
  MatX<T> out;
};

template <class T>
void forward_cached(const Mlp<T>& net, const VecX<T>& z, const Mat3X<T>& x, const DropoutMasks<T>* masks,
                    ForwardCache<T>& cache);

}  // namespace shapegrasp::detail
