#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "shapegrasp/cli/app.hpp"
#include "shapegrasp/error.hpp"

using namespace shapegrasp;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> dataset;
  std::optional<std::string> checkpoint;
  std::optional<std::string> output;
  std::optional<std::string> gripper;
  std::optional<std::string> scene;
  std::optional<int> epochs;
  std::optional<int> resolution;
  std::optional<std::size_t> n_scenes;
  std::optional<double> depth_sigma;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--dataset", o.dataset, "Dataset directory");
  cmd->add_option("--checkpoint", o.checkpoint, "Checkpoint file");
  cmd->add_option("--output", o.output, "Output directory");
  cmd->add_option("--gripper", o.gripper, "Gripper JSON");
  cmd->add_flag("-q,--quiet", o.quiet, "Suppress warnings");
}

RunConfig build_config(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.dataset) c.dataset = *o.dataset;
  if (o.checkpoint) c.checkpoint = *o.checkpoint;
  if (o.output) c.output = *o.output;
  if (o.gripper) c.gripper = *o.gripper;
  if (o.scene) c.scene = *o.scene;
  if (o.epochs) c.train.epochs = *o.epochs;
  if (o.resolution) c.grid.resolution = *o.resolution;
  if (o.n_scenes) c.eval.n_scenes = *o.n_scenes;
  if (o.depth_sigma) c.depth_sigma = *o.depth_sigma;
  try {
    c.train.validate();
    c.grid.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  if (c.depth_sigma < 0.0) throw Error(ErrorCode::kConfig, "depth noise must be non-negative");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shape and grasp reconstruction from a single depth view"};
  app.require_subcommand(1);
  Overrides o;
  std::string object_id, path;

  auto* gen = app.add_subcommand("gen", "Label grasps and sample training data");
  add_common(gen, o);
  auto* tr = app.add_subcommand("train", "Train the decoder and latent codes");
  add_common(tr, o);
  tr->add_option("--epochs", o.epochs, "Training epochs");
  auto* pl = app.add_subcommand("plan", "Plan grasps for one scene");
  add_common(pl, o);
  pl->add_option("--scene", o.scene, "Scene JSON");
  pl->add_option("--resolution", o.resolution, "Decoding grid resolution");
  pl->add_option("--depth-noise", o.depth_sigma, "Depth noise sigma in meters");
  auto* ev = app.add_subcommand("eval", "Reconstruction and episode metrics");
  add_common(ev, o);
  ev->add_option("--scenes", o.n_scenes, "Number of packed scenes");
  ev->add_option("--resolution", o.resolution, "Decoding grid resolution");
  ev->add_option("--depth-noise", o.depth_sigma, "Depth noise sigma in meters");
  auto* ex = app.add_subcommand("export-mesh", "Write a decoded surface as PLY");
  add_common(ex, o);
  ex->add_option("object", object_id, "Object id")->required();
  ex->add_option("path", path, "Output PLY")->required();
  ex->add_option("--resolution", o.resolution, "Decoding grid resolution");
  auto* in = app.add_subcommand("inspect", "Print the header of a data file");
  in->add_option("path", path, "File or dataset directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (o.quiet) set_warnings_enabled(false);
    if (in->parsed()) {
      cmd_inspect(path, std::cout);
      return 0;
    }
    const RunConfig config = build_config(o);
    if (gen->parsed()) cmd_gen(config, std::cout);
    else if (tr->parsed()) cmd_train(config, std::cout);
    else if (pl->parsed()) cmd_plan(config, std::cout);
    else if (ev->parsed()) cmd_eval(config, std::cout);
    else if (ex->parsed()) cmd_export_mesh(config, object_id, path, std::cout);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
