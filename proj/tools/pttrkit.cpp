#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "pttr/harness/experiment.hpp"
#include "pttr/numcore/checkpoint.hpp"

namespace fs = std::filesystem;
using namespace pttr;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string model;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key=value run configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--model", c.model, "model kind")->check(CLI::IsMember({"pttr", "pttr++"}));
  cmd->add_option("--set", c.sets, "extra key=value overrides, applied last");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : RunConfig::load(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.model.empty()) cfg.set("model", c.model);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.finalize();
  return cfg;
}

std::vector<TrackletSequence> data_split(const RunConfig& cfg, const std::string& dir, bool test) {
  if (dir.empty()) return generate_split(cfg, test);
  return load_dataset(fs::path(dir) / (test ? "test" : "train"));
}

void write_loss_curve(const std::vector<EpochRecord>& curve, const fs::path& path) {
  std::ofstream out(path);
  out << "epoch,lr,loss,samples\n" << std::setprecision(9);
  for (const auto& r : curve) out << r.epoch << ',' << r.lr << ',' << r.mean_loss << ',' << r.samples << '\n';
  if (!out) throw StateError("cannot write " + path.string());
}

// Rebuilds the network described by `<dir>/config.cfg` and loads `<dir>/model`.
std::pair<RunConfig, Net> load_trained(const fs::path& dir, const Common& c) {
  RunConfig cfg = RunConfig::load(dir / "config.cfg");
  if (c.seed) cfg.seed = *c.seed;
  cfg.finalize();
  RandomState init = stream(cfg, SeedStream::Init);
  Net net(cfg.model, init);
  auto params = net.parameters();
  load_checkpoint(params, dir / "model");
  return {cfg, std::move(net)};
}

void write_eval(const std::string& variant, const EvalResult& eval, const fs::path& out) {
  write_results_csv(result_rows(variant, eval), out / "results.csv");
  write_curve(success_curve(eval.overall.per_frame), out / "success_curve.txt");
  write_curve(precision_curve(eval.overall.per_frame), out / "precision_curve.txt");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pttrkit: point cloud single-object tracking toolkit"};
  app.require_subcommand(1);

  Common gen_c, train_c, track_c, eval_c, abl_c;
  std::string train_data, track_data, eval_data, abl_data, track_ckpt, eval_ckpt, suite;

  auto* gen = app.add_subcommand("generate", "synthesize train and test tracklets");
  add_common(gen, gen_c);

  auto* tr = app.add_subcommand("train", "train a tracker and save a checkpoint");
  add_common(tr, train_c);
  tr->add_option("--data", train_data, "dataset directory from `generate` (default: generate in memory)");

  auto* tk = app.add_subcommand("track", "track the test split and write per-frame boxes");
  add_common(tk, track_c);
  tk->add_option("--checkpoint", track_ckpt, "directory written by `train`")->required();
  tk->add_option("--data", track_data, "dataset directory");

  auto* ev = app.add_subcommand("eval", "score a trained tracker on the test split");
  add_common(ev, eval_c);
  ev->add_option("--checkpoint", eval_ckpt, "directory written by `train`")->required();
  ev->add_option("--data", eval_data, "dataset directory");

  auto* ab = app.add_subcommand("ablate", "train and score every variant of an ablation suite");
  add_common(ab, abl_c);
  ab->add_option("--suite", suite, "sampling, components, attention or fusion")->required();
  ab->add_option("--data", abl_data, "dataset directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const RunConfig cfg = resolve(gen_c);
      const fs::path out(gen_c.out);
      fs::create_directories(out);
      save_dataset(generate_split(cfg, false), out / "train");
      save_dataset(generate_split(cfg, true), out / "test");
      cfg.save(out / "config.cfg");
      std::cout << "wrote dataset to " << out << "\n";
    } else if (tr->parsed()) {
      const RunConfig cfg = resolve(train_c);
      const fs::path out(train_c.out);
      fs::create_directories(out);
      const auto data = data_split(cfg, train_data, false);
      RandomState init = stream(cfg, SeedStream::Init);
      Net net(cfg.model, init);
      const auto curve = train(net, data, cfg.train, cfg.track, stream(cfg, SeedStream::Training).seed(),
                               out / "diverged", [](const EpochRecord& r) {
                                 std::cout << "epoch " << r.epoch << " lr " << r.lr << " loss " << r.mean_loss << "\n";
                               });
      save_checkpoint(net.parameters(), out / "model");
      cfg.save(out / "config.cfg");
      write_loss_curve(curve, out / "loss.csv");
      std::cout << "wrote checkpoint to " << out / "model" << "\n";
    } else if (tk->parsed()) {
      const auto [cfg, net] = load_trained(track_ckpt, track_c);
      const fs::path out(track_c.out);
      fs::create_directories(out);
      const auto eval = evaluate(NetPredictor<float>(net), data_split(cfg, track_data, true), cfg.track,
                                 stream(cfg, SeedStream::Evaluation).seed());
      std::ofstream boxes(out / "tracks.txt");
      boxes << std::setprecision(9);
      for (const auto& seq : eval.sequences) {
        for (std::size_t f = 0; f < seq.boxes.size(); ++f) {
          const auto& b = seq.boxes[f];
          boxes << seq.object_id << ' ' << f;
          for (double v : {b.center().x(), b.center().y(), b.center().z(), b.size().x(), b.size().y(), b.size().z(),
                           b.yaw(), seq.scores[f].iou, seq.scores[f].distance}) {
            boxes << ' ' << v;
          }
          boxes << '\n';
        }
      }
      write_eval(to_string(cfg.model.kind), eval, out);
      std::cout << "wrote tracks to " << out / "tracks.txt" << "\n";
    } else if (ev->parsed()) {
      const auto [cfg, net] = load_trained(eval_ckpt, eval_c);
      const fs::path out(eval_c.out);
      fs::create_directories(out);
      const auto eval = evaluate(NetPredictor<float>(net), data_split(cfg, eval_data, true), cfg.track,
                                 stream(cfg, SeedStream::Evaluation).seed());
      write_eval(to_string(cfg.model.kind), eval, out);
      std::cout << std::fixed << std::setprecision(2) << "success " << eval.overall.success << " precision "
                << eval.overall.precision << "\n";
    } else if (ab->parsed()) {
      const RunConfig cfg = resolve(abl_c);
      const fs::path out(abl_c.out);
      fs::create_directories(out);
      const auto rows = run_ablation(ablation_suite_from_string(suite), cfg, data_split(cfg, abl_data, false),
                                     data_split(cfg, abl_data, true));
      write_results_csv(rows, out / "results.csv");
      for (const auto& r : rows) {
        if (r.class_tag == "all") std::cout << r.variant << ' ' << r.success << ' ' << r.precision << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "pttrkit: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
