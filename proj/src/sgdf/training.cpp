#include "shapegrasp/sgdf/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "forward_cache.hpp"
#include "shapegrasp/error.hpp"
#include "shapegrasp/random.hpp"

namespace shapegrasp {

namespace {

template <class T>
using Vec3T = Eigen::Matrix<T, 3, 1>;
template <class T>
using Mat3T = Eigen::Matrix<T, 3, 3>;

// Data terms of one batch and, on request, d(weighted data loss)/d(out).
struct DataTerms {
  double sdf = 0.0;
  double grasp = 0.0;
};

template <class T>
DataTerms data_terms(const MatX<T>& out, const SgdfBatch<T>& batch, const TrainConfig& config,
                        const GripperModel& gripper, MatX<T>* d_out) {
  const Eigen::Index n = batch.size();
  const T c = static_cast<T>(config.clamp);
  const T inv_n = T(1) / static_cast<T>(n);
  const T w_sdf = static_cast<T>(config.weights.sdf) * inv_n;
  const T w_grasp = static_cast<T>(config.weights.grasp) * inv_n;
  const auto [v_plain, v_flip] = control_point_sets(gripper);
  const Eigen::Matrix<T, 3, 5> cp = v_plain.topRows<3>().cast<T>();
  const Eigen::Matrix<T, 3, 5> cp_flip = v_flip.topRows<3>().cast<T>();
  if (d_out) d_out->setZero(kOutputDim, n);

  DataTerms terms;
  for (Eigen::Index j = 0; j < n; ++j) {
    const T s = out(0, j);
    const T diff = std::clamp(batch.s(j), -c, c) - std::clamp(s, -c, c);
    terms.sdf += std::abs(static_cast<double>(diff));

    const Vec3T<T> t = batch.x.col(j) + out.template block<3, 1>(1, j);
    const Vec3T<T> r1 = out.template block<3, 1>(4, j);
    const Vec3T<T> r2 = out.template block<3, 1>(7, j);
    const T n1 = r1.norm();
    const Vec3T<T> e1 = r1 / n1;
    const Vec3T<T> u = r2 - e1.dot(r2) * e1;
    const T nu = u.norm();
    const Vec3T<T> e2 = u / nu;
    const Vec3T<T> e3 = e1.cross(e2);
    Mat3T<T> rot;
    rot << e1, e2, e3;

    const Mat3T<T> rot_gt = Eigen::Map<const Mat3T<T>>(batch.r.col(j).data());
    const Eigen::Matrix<T, 3, 5> p = (rot * cp).colwise() + t;
    const Eigen::Matrix<T, 3, 5> q = (rot_gt * cp).colwise() + batch.t.col(j);
    const Eigen::Matrix<T, 3, 5> q_flip = (rot_gt * cp_flip).colwise() + batch.t.col(j);
    const T d_plain = (q - p).norm();
    const T d_flip = (q_flip - p).norm();
    const bool use_flip = d_flip < d_plain;
    const T d = use_flip ? d_flip : d_plain;
    terms.grasp += static_cast<double>(d);

    if (!d_out) continue;
    if (std::abs(s) < c && diff != T(0)) (*d_out)(0, j) = diff > T(0) ? -w_sdf : w_sdf;
    if (d <= T(0)) continue;
    const Eigen::Matrix<T, 3, 5> dp = (p - (use_flip ? q_flip : q)) * (w_grasp / d);
    const Vec3T<T> g_t = dp.rowwise().sum();
    const Mat3T<T> g_rot = dp * cp.transpose();
    // Back through e3 = e1 x e2, e2 = u / |u|, u = r2 - (e1.r2) e1, e1 = r1 / |r1|.
    Vec3T<T> g_e1 = g_rot.col(0) + e2.cross(g_rot.col(2));
    const Vec3T<T> g_e2 = g_rot.col(1) + g_rot.col(2).cross(e1);
    const Vec3T<T> g_u = (g_e2 - e2 * e2.dot(g_e2)) / nu;
    const Vec3T<T> g_r2 = g_u - e1 * e1.dot(g_u);
    g_e1 -= e1.dot(r2) * g_u + e1.dot(g_u) * r2;
    const Vec3T<T> g_r1 = (g_e1 - e1 * e1.dot(g_e1)) / n1;
    d_out->template block<3, 1>(1, j) = g_t;
    d_out->template block<3, 1>(4, j) = g_r1;
    d_out->template block<3, 1>(7, j) = g_r2;
  }
  terms.sdf /= static_cast<double>(n);
  terms.grasp /= static_cast<double>(n);
  return terms;
}

template <class T>
double code_term(const MatX<T>& codes, int epoch) {
  if (codes.cols() == 0) throw Error(ErrorCode::kEmptyTable, "loss_code: empty latent table");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < codes.cols(); ++i) sum += static_cast<double>(codes.col(i).norm());
  return sum / static_cast<double>(codes.cols()) * code_ramp(epoch);
}

template <class T>
void check_batch(const SgdfParams<T>& params, const SgdfBatch<T>& batch) {
  if (batch.size() == 0) throw Error(ErrorCode::kEmptyBatch, "empty training batch");
  if (batch.object < 0 || batch.object >= params.codes.cols())
    throw Error(ErrorCode::kDimensionMismatch, "batch object has no code column");
  if (batch.s.size() != batch.size() || batch.t.cols() != batch.size() || batch.r.cols() != batch.size())
    throw Error(ErrorCode::kDimensionMismatch, "batch fields differ in length");
}

void check_finite(const LossBreakdown& loss) {
  if (!std::isfinite(loss.total)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "non-finite loss (sdf %g, grasp %g, code %g)", loss.sdf, loss.grasp, loss.code);
    throw Error(ErrorCode::kNonFiniteLoss, buf);
  }
}

template <class T>
bool all_finite(SgdfParams<T>& p) {
  for (auto& view : tensor_views(p))
    if (!view.allFinite()) return false;
  return true;
}

}  // namespace

void TrainConfig::validate() const {
  arch.validate();
  if (epochs < 0) throw Error(ErrorCode::kConfig, "epochs must be non-negative");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kConfig, "learning rate must be positive");
  if (batch_size < 1) throw Error(ErrorCode::kConfig, "batch size must be positive");
  if (!(clamp > 0.0)) throw Error(ErrorCode::kConfig, "clamp must be positive");
  if (weights.sdf < 0.0 || weights.grasp < 0.0 || weights.code < 0.0)
    throw Error(ErrorCode::kConfig, "loss weights must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(adam_eps > 0.0))
    throw Error(ErrorCode::kConfig, "invalid Adam parameters");
  if (!(code_init_std >= 0.0)) throw Error(ErrorCode::kConfig, "code init std must be non-negative");
}

template <class T>
SgdfParams<T> zeros_like(const SgdfParams<T>& p) {
  SgdfParams<T> z = p;
  for (auto& view : tensor_views(z)) view.setZero();
  return z;
}

template <class T>
std::vector<Eigen::Map<VecX<T>>> tensor_views(SgdfParams<T>& p) {
  std::vector<Eigen::Map<VecX<T>>> out;
  for (auto& l : p.net.layers) {
    out.emplace_back(l.v.data(), l.v.size());
    out.emplace_back(l.g.data(), l.g.size());
    out.emplace_back(l.b.data(), l.b.size());
  }
  out.emplace_back(p.codes.data(), p.codes.size());
  return out;
}

template <class T>
SgdfBatch<T> make_batch(std::span<const SgdfSample> samples, std::span<const std::size_t> indices, int object) {
  SgdfBatch<T> b;
  b.object = object;
  const auto n = static_cast<Eigen::Index>(indices.size());
  b.x.resize(3, n);
  b.s.resize(n);
  b.t.resize(3, n);
  b.r.resize(9, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const SgdfSample& s = samples[indices[j]];
    b.x.col(j) = s.x.cast<T>();
    b.s(j) = static_cast<T>(s.s);
    b.t.col(j) = (s.x + s.delta_t).cast<T>();
    b.r.col(j) = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(s.rotation.data()).cast<T>();
  }
  return b;
}

template <class T>
LossBreakdown decoder_loss(const SgdfParams<T>& params, const SgdfBatch<T>& batch, int epoch,
                           const TrainConfig& config, const GripperModel& gripper, const DropoutMasks<T>* masks) {
  check_batch(params, batch);
  const MatX<T> out = forward_batch(params.net, VecX<T>(params.codes.col(batch.object)), batch.x, masks);
  const DataTerms terms = data_terms<T>(out, batch, config, gripper, nullptr);
  return combine_losses(terms.sdf, terms.grasp, code_term(params.codes, epoch), config.weights);
}

template <class T>
LossBreakdown gradients(const SgdfParams<T>& params, const SgdfBatch<T>& batch, int epoch, const TrainConfig& config,
                        const GripperModel& gripper, const DropoutMasks<T>* masks, SgdfParams<T>& grad) {
  check_batch(params, batch);
  const Mlp<T>& net = params.net;
  const DecoderArch& a = net.arch;
  detail::ForwardCache<T> cache;
  detail::forward_cached(net, VecX<T>(params.codes.col(batch.object)), batch.x, masks, cache);
  MatX<T> d_out;
  const DataTerms terms = data_terms<T>(cache.out, batch, config, gripper, &d_out);
  const LossBreakdown loss = combine_losses(terms.sdf, terms.grasp, code_term(params.codes, epoch), config.weights);
  check_finite(loss);

  grad = zeros_like(params);
  MatX<T> d_input = MatX<T>::Zero(a.input_dim(), batch.size());
  MatX<T> dz = std::move(d_out);
  for (int l = a.hidden_layers; l >= 0; --l) {
    const WnLayer<T>& layer = net.layers[l];
    WnLayer<T>& gl = grad.net.layers[l];
    const MatX<T> g_w = dz * cache.inputs[l].transpose();
    gl.b = dz.rowwise().sum();
    const VecX<T> norms = layer.v.rowwise().norm();
    for (Eigen::Index i = 0; i < layer.v.rows(); ++i) {
      const auto v_hat = layer.v.row(i) / norms(i);
      const T g_gain = g_w.row(i).dot(v_hat);
      gl.g(i) = g_gain;
      gl.v.row(i) = (layer.g(i) / norms(i)) * (g_w.row(i) - g_gain * v_hat);
    }
    MatX<T> d_in = cache.weights[l].transpose() * dz;
    if (l == 0) {
      d_input += d_in;
      break;
    }
    MatX<T> dh;
    if (a.has_skip() && l == a.skip_layer) {
      d_input += d_in.bottomRows(a.input_dim());
      dh = d_in.topRows(a.width);
    } else {
      dh = std::move(d_in);
    }
    if (masks) dh.array() *= (*masks)[l - 1].array();
    dz = (cache.pre[l - 1].array() > T(0)).select(dh, T(0));
  }
  grad.codes.col(batch.object) += d_input.topRows(a.latent_dim).rowwise().sum();

  const T code_scale =
      static_cast<T>(config.weights.code * code_ramp(epoch) / static_cast<double>(params.codes.cols()));
  for (Eigen::Index i = 0; i < params.codes.cols(); ++i) {
    const T norm = params.codes.col(i).norm();
    if (norm > T(0)) grad.codes.col(i) += params.codes.col(i) * (code_scale / norm);
  }
  return loss;
}

template <class T>
AdamState<T> make_adam(const SgdfParams<T>& params) {
  return AdamState<T>{zeros_like(params), zeros_like(params), 0};
}

template <class T>
void adam_step(SgdfParams<T>& params, const SgdfParams<T>& grad, AdamState<T>& state, const TrainConfig& config) {
  ++state.step;
  const auto t = static_cast<double>(state.step);
  const T lr_hat = static_cast<T>(config.learning_rate / (1.0 - std::pow(config.beta1, t)));
  const T v_corr = static_cast<T>(1.0 / (1.0 - std::pow(config.beta2, t)));
  const T b1 = static_cast<T>(config.beta1), b2 = static_cast<T>(config.beta2);
  const T eps = static_cast<T>(config.adam_eps);
  auto p = tensor_views(params);
  auto g = tensor_views(const_cast<SgdfParams<T>&>(grad));
  auto m = tensor_views(state.m);
  auto v = tensor_views(state.v);
  for (std::size_t k = 0; k < p.size(); ++k) {
    m[k] = b1 * m[k] + (T(1) - b1) * g[k];
    v[k] = b2 * v[k] + (T(1) - b2) * g[k].cwiseAbs2();
    p[k].array() -= lr_hat * m[k].array() / ((v[k].array() * v_corr).sqrt() + eps);
  }
}

SgdfParams<float> init_params(const TrainConfig& config, std::size_t n_objects) {
  SgdfParams<float> p;
  p.net = init_decoder<float>(config.arch, config.seed);
  p.codes.resize(config.arch.latent_dim, static_cast<Eigen::Index>(n_objects));
  Rng rng(derive_seed(config.seed, "codes"));
  std::normal_distribution<double> gauss(0.0, config.code_init_std);
  for (Eigen::Index i = 0; i < p.codes.size(); ++i) p.codes.data()[i] = static_cast<float>(gauss(rng));
  return p;
}

TrainResult train(const std::vector<TrainObject>& objects, const TrainConfig& config, const GripperModel& gripper,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (objects.empty()) throw Error(ErrorCode::kInvalidArgument, "training needs at least one object");
  std::size_t total = 0;
  for (const auto& o : objects) {
    if (o.samples.empty()) throw Error(ErrorCode::kInvalidArgument, "object '" + o.id + "' has no SGDF samples");
    total += o.samples.size();
  }

  SgdfParams<float> params = init_params(config, objects.size());
  AdamState<float> adam = make_adam(params);
  TrainResult result;

  Rng rng(derive_seed(config.seed, "batches"));
  const std::uint64_t dropout_seed = derive_seed(config.seed, "dropout");
  std::uniform_int_distribution<int> pick(0, static_cast<int>(objects.size()) - 1);
  std::vector<std::vector<std::size_t>> order(objects.size());
  std::vector<std::size_t> cursor(objects.size(), 0);
  for (std::size_t o = 0; o < objects.size(); ++o) {
    order[o].resize(objects[o].samples.size());
    std::iota(order[o].begin(), order[o].end(), std::size_t{0});
    std::shuffle(order[o].begin(), order[o].end(), rng);
  }
  const std::size_t batches_per_epoch = (total + config.batch_size - 1) / config.batch_size;
  std::uint64_t step = 0;
  SgdfParams<float> grad;
  std::vector<std::size_t> idx;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const SgdfParams<float> last_good = params;
    LossBreakdown sum;
    try {
      for (std::size_t b = 0; b < batches_per_epoch; ++b, ++step) {
        const int o = pick(rng);
        const auto n = std::min<std::size_t>(config.batch_size, order[o].size());
        idx.clear();
        while (idx.size() < n) {
          if (cursor[o] == order[o].size()) {
            std::shuffle(order[o].begin(), order[o].end(), rng);
            cursor[o] = 0;
          }
          idx.push_back(order[o][cursor[o]++]);
        }
        const SgdfBatch<float> batch = make_batch<float>(objects[o].samples, idx, o);
        const DropoutMasks<float> masks =
            make_dropout_masks<float>(config.arch, batch.size(), derive_seed(dropout_seed, step));
        const LossBreakdown loss = gradients(params, batch, epoch, config, gripper, &masks, grad);
        adam_step(params, grad, adam, config);
        if (!all_finite(params)) throw Error(ErrorCode::kNonFiniteLoss, "parameters became non-finite");
        sum.sdf += loss.sdf;
        sum.grasp += loss.grasp;
        sum.code += loss.code;
        sum.total += loss.total;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNonFiniteLoss) throw;
      params = last_good;
      result.aborted = true;
      result.message = "epoch " + std::to_string(epoch) + ": " + e.what();
      break;
    }
    const auto nb = static_cast<double>(batches_per_epoch);
    EpochLoss entry{epoch, {sum.sdf / nb, sum.grasp / nb, sum.code / nb, sum.total / nb}};
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }

  result.decoder = std::move(params.net);
  for (std::size_t o = 0; o < objects.size(); ++o)
    result.latents.add(objects[o].id, params.codes.col(static_cast<Eigen::Index>(o)).cast<double>());
  return result;
}

std::string loss_log_csv(const std::vector<EpochLoss>& log) {
  std::string out = "epoch,L_SDF,L_Grasp,L_Code,total\n";
  char buf[160];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g\n", e.epoch, e.loss.sdf, e.loss.grasp, e.loss.code,
                  e.loss.total);
    out += buf;
  }
  return out;
}

#define SHAPEGRASP_INSTANTIATE(T)                                                                                   \
  template SgdfParams<T> zeros_like<T>(const SgdfParams<T>&);                                                      \
  template std::vector<Eigen::Map<VecX<T>>> tensor_views<T>(SgdfParams<T>&);                                       \
  template SgdfBatch<T> make_batch<T>(std::span<const SgdfSample>, std::span<const std::size_t>, int);              \
  template LossBreakdown decoder_loss<T>(const SgdfParams<T>&, const SgdfBatch<T>&, int, const TrainConfig&,        \
                                         const GripperModel&, const DropoutMasks<T>*);                             \
  template LossBreakdown gradients<T>(const SgdfParams<T>&, const SgdfBatch<T>&, int, const TrainConfig&,           \
                                      const GripperModel&, const DropoutMasks<T>*, SgdfParams<T>&);                 \
  template AdamState<T> make_adam<T>(const SgdfParams<T>&);                                                        \
  template void adam_step<T>(SgdfParams<T>&, const SgdfParams<T>&, AdamState<T>&, const TrainConfig&);

SHAPEGRASP_INSTANTIATE(float)
SHAPEGRASP_INSTANTIATE(double)

}  // namespace shapegrasp
