#include "shapegrasp/sgdf/decoder.hpp"

#include <cmath>

#include "forward_cache.hpp"
#include "shapegrasp/error.hpp"
#include "shapegrasp/random.hpp"

namespace shapegrasp {

int DecoderArch::layer_input_dim(int layer) const {
  if (layer == 0) return input_dim();
  if (has_skip() && layer == skip_layer) return width + input_dim();
  return width;
}

void DecoderArch::validate() const {
  if (latent_dim < 1) throw Error(ErrorCode::kConfig, "latent_dim must be positive");
  if (hidden_layers < 1) throw Error(ErrorCode::kConfig, "decoder needs at least one hidden layer");
  if (width < 1) throw Error(ErrorCode::kConfig, "decoder width must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(ErrorCode::kConfig, "dropout must be in [0, 1)");
  if (!(coord_scale > 0.0)) throw Error(ErrorCode::kConfig, "coord_scale must be positive");
}

template <class T>
MatX<T> WnLayer<T>::weight() const {
  const VecX<T> scale = g.array() / v.rowwise().norm().array();
  return scale.asDiagonal() * v;
}

template <class T>
Mlp<T> init_decoder(const DecoderArch& arch, std::uint64_t seed) {
  arch.validate();
  Mlp<T> net;
  net.arch = arch;
  Rng rng(derive_seed(seed, "decoder-init"));
  for (int l = 0; l <= arch.hidden_layers; ++l) {
    const int in = arch.layer_input_dim(l), out = arch.layer_output_dim(l);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    WnLayer<T> layer;
    layer.v.resize(out, in);
    layer.b.resize(out);
    for (int i = 0; i < out; ++i)
      for (int j = 0; j < in; ++j) layer.v(i, j) = static_cast<T>(u(rng));
    for (int i = 0; i < out; ++i) layer.b(i) = static_cast<T>(u(rng));
    layer.g = layer.v.rowwise().norm();
    net.layers.push_back(std::move(layer));
  }
  return net;
}

template <class T>
DropoutMasks<T> make_dropout_masks(const DecoderArch& arch, Eigen::Index batch, std::uint64_t seed) {
  DropoutMasks<T> masks;
  if (arch.dropout <= 0.0) {
    for (int l = 0; l < arch.hidden_layers; ++l) masks.push_back(MatX<T>::Ones(arch.width, batch));
    return masks;
  }
  // Counter-based stream: four 16-bit uniforms per 64-bit hash.
  const auto drop_below = static_cast<std::uint32_t>(std::llround(arch.dropout * 65536.0));
  const T keep = static_cast<T>(1.0 / (1.0 - arch.dropout));
  std::uint64_t counter = 0, bits = 0;
  int left = 0;
  for (int l = 0; l < arch.hidden_layers; ++l) {
    MatX<T> m(arch.width, batch);
    T* data = m.data();
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      if (left == 0) {
        bits = mix64(seed ^ mix64(counter++));
        left = 4;
      }
      const auto r = static_cast<std::uint32_t>(bits & 0xffff);
      bits >>= 16;
      --left;
      data[i] = r < drop_below ? T(0) : keep;
    }
    masks.push_back(std::move(m));
  }
  return masks;
}

namespace detail {

template <class T>
void forward_cached(const Mlp<T>& net, const VecX<T>& z, const Mat3X<T>& x, const DropoutMasks<T>* masks,
                    ForwardCache<T>& cache) {
  const DecoderArch& a = net.arch;
  if (z.size() != a.latent_dim)
    throw Error(ErrorCode::kDimensionMismatch, "latent code has " + std::to_string(z.size()) + " entries, expected " +
                                                   std::to_string(a.latent_dim));
  if (static_cast<int>(net.layers.size()) != a.hidden_layers + 1)
    throw Error(ErrorCode::kDimensionMismatch, "decoder layer count does not match its architecture");
  const Eigen::Index n = x.cols();
  if (masks && (static_cast<int>(masks->size()) != a.hidden_layers || (*masks)[0].cols() != n))
    throw Error(ErrorCode::kDimensionMismatch, "dropout masks do not match the batch");

  MatX<T> input(a.input_dim(), n);
  input.topRows(a.latent_dim) = z.replicate(1, n);
  input.bottomRows(3) = x * static_cast<T>(a.coord_scale);

  cache.weights.resize(a.hidden_layers + 1);
  cache.inputs.resize(a.hidden_layers + 1);
  cache.pre.resize(a.hidden_layers);
  MatX<T> h;
  for (int l = 0; l <= a.hidden_layers; ++l) {
    const WnLayer<T>& layer = net.layers[l];
    cache.weights[l] = layer.weight();
    MatX<T>& in = cache.inputs[l];
    if (l == 0) {
      in = input;
    } else if (a.has_skip() && l == a.skip_layer) {
      in.resize(a.width + a.input_dim(), n);
      in.topRows(a.width) = h;
      in.bottomRows(a.input_dim()) = input;
    } else {
      in = std::move(h);
    }
    MatX<T> zl = cache.weights[l] * in;
    zl.colwise() += layer.b;
    if (l == a.hidden_layers) {
      cache.out = std::move(zl);
      break;
    }
    h = zl.cwiseMax(T(0));
    if (masks) h.array() *= (*masks)[l].array();
    cache.pre[l] = std::move(zl);
  }
}

}  // namespace detail

template <class T>
MatX<T> forward_batch(const Mlp<T>& net, const VecX<T>& z, const Mat3X<T>& x, const DropoutMasks<T>* masks) {
  detail::ForwardCache<T> cache;
  detail::forward_cached(net, z, x, masks, cache);
  return std::move(cache.out);
}

SgdfOutput forward(const SgdfDecoder& net, const LatentCode& z, const Vec3& x, bool train_mode,
                   std::uint64_t dropout_seed) {
  DropoutMasks<float> masks;
  if (train_mode) masks = make_dropout_masks<float>(net.arch, 1, dropout_seed);
  const MatX<float> out = forward_batch<float>(net, z.cast<float>(), x.cast<float>(), train_mode ? &masks : nullptr);
  const Eigen::VectorXd o = out.col(0).cast<double>();
  return SgdfOutput{o(0), o.segment<3>(1), o.segment<3>(4), o.segment<3>(7)};
}

Grasp decode_grasp(const Vec3& x, const Vec3& delta_t, const Vec3& r1, const Vec3& r2) {
  Grasp g;
  g.frame = Frame::kObject;
  g.pose = make_transform(x + delta_t, gram_schmidt_rotation(r1, r2));
  return g;
}

const LatentCode& LatentTable::at(const std::string& id) const {
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] == id) return codes[i];
  throw Error(ErrorCode::kInvalidArgument, "no latent code for object '" + id + "'");
}

void LatentTable::add(const std::string& id, const LatentCode& code) {
  for (const auto& existing : ids)
    if (existing == id) throw Error(ErrorCode::kInvalidArgument, "duplicate latent code id '" + id + "'");
  if (!code.allFinite()) throw Error(ErrorCode::kInvalidArgument, "latent code for '" + id + "' is not finite");
  ids.push_back(id);
  codes.push_back(code);
}

template struct WnLayer<float>;
template struct WnLayer<double>;
template Mlp<float> init_decoder<float>(const DecoderArch&, std::uint64_t);
template Mlp<double> init_decoder<double>(const DecoderArch&, std::uint64_t);
template DropoutMasks<float> make_dropout_masks<float>(const DecoderArch&, Eigen::Index, std::uint64_t);
template DropoutMasks<double> make_dropout_masks<double>(const DecoderArch&, Eigen::Index, std::uint64_t);
template MatX<float> forward_batch<float>(const Mlp<float>&, const VecX<float>&, const Mat3X<float>&,
                                          const DropoutMasks<float>*);
template MatX<double> forward_batch<double>(const Mlp<double>&, const VecX<double>&, const Mat3X<double>&,
                                            const DropoutMasks<double>*);
template void detail::forward_cached<float>(const Mlp<float>&, const VecX<float>&, const Mat3X<float>&,
                                            const DropoutMasks<float>*, detail::ForwardCache<float>&);
template void detail::forward_cached<double>(const Mlp<double>&, const VecX<double>&, const Mat3X<double>&,
                                             const DropoutMasks<double>*, detail::ForwardCache<double>&);

}  // namespace shapegrasp
