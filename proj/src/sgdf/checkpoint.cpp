#include "shapegrasp/sgdf/checkpoint.hpp"

#include "shapegrasp/binary_io.hpp"
#include "shapegrasp/error.hpp"

namespace shapegrasp {

namespace {

constexpr std::uint32_t kNoSkip = 0xffffffffu;

void write_matrix(BinaryWriter& w, const MatX<float>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) w.f32(m(i, j));
}

MatX<float> read_matrix(BinaryReader& r, Eigen::Index rows, Eigen::Index cols) {
  MatX<float> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = r.f32();
  return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  const DecoderArch& a = ck.decoder.arch;
  BinaryWriter w;
  w.magic("SGDF1");
  w.u32(kCheckpointVersion);
  w.u64(ck.seed);
  w.u32(static_cast<std::uint32_t>(a.latent_dim));
  w.u32(static_cast<std::uint32_t>(a.hidden_layers));
  w.u32(static_cast<std::uint32_t>(a.width));
  w.u32(a.has_skip() ? static_cast<std::uint32_t>(a.skip_layer) : kNoSkip);
  w.f32(static_cast<float>(a.dropout));
  w.f32(static_cast<float>(a.coord_scale));
  w.u32(static_cast<std::uint32_t>(ck.decoder.layers.size()));
  for (const auto& l : ck.decoder.layers) {
    w.u32(static_cast<std::uint32_t>(l.v.rows()));
    w.u32(static_cast<std::uint32_t>(l.v.cols()));
    write_matrix(w, l.v);
    write_matrix(w, l.g);
    write_matrix(w, l.b);
  }
  w.u32(static_cast<std::uint32_t>(ck.latents.size()));
  for (std::size_t i = 0; i < ck.latents.size(); ++i) {
    w.str(ck.latents.ids[i]);
    if (ck.latents.codes[i].size() != a.latent_dim)
      throw Error(ErrorCode::kDimensionMismatch, "latent code width differs from the decoder");
    for (int k = 0; k < a.latent_dim; ++k) w.f32(static_cast<float>(ck.latents.codes[i][k]));
  }
  w.save(path);
}

Checkpoint load_checkpoint(const std::string& path) {
  BinaryReader r = BinaryReader::open(path);
  r.expect_magic("SGDF1");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw Error(ErrorCode::kVersionMismatch, "checkpoint format version " + std::to_string(version) + " in " + path);
  Checkpoint ck;
  ck.seed = r.u64();
  DecoderArch& a = ck.decoder.arch;
  a.latent_dim = static_cast<int>(r.u32());
  a.hidden_layers = static_cast<int>(r.u32());
  a.width = static_cast<int>(r.u32());
  const std::uint32_t skip = r.u32();
  a.skip_layer = skip == kNoSkip ? -1 : static_cast<int>(skip);
  a.dropout = r.f32();
  a.coord_scale = r.f32();
  try {
    a.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kIo, std::string("corrupt checkpoint architecture: ") + e.what());
  }
  const std::uint32_t n_layers = r.u32();
  if (static_cast<int>(n_layers) != a.hidden_layers + 1) throw Error(ErrorCode::kIo, "checkpoint layer count mismatch");
  for (int l = 0; l <= a.hidden_layers; ++l) {
    const auto rows = static_cast<Eigen::Index>(r.u32());
    const auto cols = static_cast<Eigen::Index>(r.u32());
    if (rows != a.layer_output_dim(l) || cols != a.layer_input_dim(l))
      throw Error(ErrorCode::kIo, "checkpoint layer " + std::to_string(l) + " has unexpected shape");
    WnLayer<float> layer;
    layer.v = read_matrix(r, rows, cols);
    layer.g = read_matrix(r, rows, 1);
    layer.b = read_matrix(r, rows, 1);
    ck.decoder.layers.push_back(std::move(layer));
  }
  const std::uint32_t n_codes = r.u32();
  for (std::uint32_t i = 0; i < n_codes; ++i) {
    const std::string id = r.str();
    LatentCode z(a.latent_dim);
    for (int k = 0; k < a.latent_dim; ++k) z[k] = r.f32();
    ck.latents.add(id, z);
  }
  if (!r.at_end()) throw Error(ErrorCode::kIo, "trailing bytes in " + path);
  return ck;
}

}  // namespace shapegrasp
