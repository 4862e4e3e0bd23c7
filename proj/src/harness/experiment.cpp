#include "pttr/harness/experiment.hpp"

namespace pttr {

RandomState stream(const RunConfig& cfg, SeedStream s) {
  return RandomState(cfg.seed).fork(static_cast<std::uint64_t>(s));
}

std::vector<TrackletSequence> generate_split(const RunConfig& cfg, bool test_split) {
  const RandomState rng = stream(cfg, test_split ? SeedStream::TestData : SeedStream::TrainData);
  return generate_dataset(cfg.data, test_split ? cfg.data.test_tracklets : cfg.data.train_tracklets, rng,
                          test_split ? "test" : "train");
}

ExperimentResult run_experiment(const RunConfig& cfg, const std::vector<TrackletSequence>& train_set,
                                const std::vector<TrackletSequence>& test_set, std::optional<Net>* net_out) {
  RandomState init = stream(cfg, SeedStream::Init);
  Net net(cfg.model, init);
  ExperimentResult r;
  r.curve = train(net, train_set, cfg.train, cfg.track, stream(cfg, SeedStream::Training).seed());
  r.eval = evaluate(NetPredictor<float>(net), test_set, cfg.track, stream(cfg, SeedStream::Evaluation).seed());
  if (net_out) net_out->emplace(std::move(net));
  return r;
}

std::vector<ResultRow> result_rows(const std::string& variant, const EvalResult& eval) {
  std::vector<ResultRow> rows;
  for (const auto& [tag, ope] : eval.per_class) {
    rows.push_back({variant, tag, ope.success, ope.precision, ope.per_frame.size()});
  }
  rows.push_back({variant, "all", eval.overall.success, eval.overall.precision, eval.overall.per_frame.size()});
  return rows;
}

std::string to_string(AblationSuite s) {
  switch (s) {
    case AblationSuite::Sampling: return "sampling";
    case AblationSuite::Components: return "components";
    case AblationSuite::AttentionParts: return "attention";
    case AblationSuite::FusionModes: return "fusion";
  }
  return "?";
}

AblationSuite ablation_suite_from_string(const std::string& s) {
  if (s == "sampling") return AblationSuite::Sampling;
  if (s == "components") return AblationSuite::Components;
  if (s == "attention") return AblationSuite::AttentionParts;
  if (s == "fusion") return AblationSuite::FusionModes;
  throw ConfigError("unknown ablation suite '" + s + "' (sampling, components, attention, fusion)");
}

std::vector<AblationVariant> ablation_variants(AblationSuite suite, const RunConfig& base) {
  std::vector<AblationVariant> out;
  auto add = [&](std::string name, auto&& edit) {
    RunConfig c = base;
    edit(c);
    c.finalize();
    out.push_back({std::move(name), std::move(c)});
  };
  switch (suite) {
    case AblationSuite::Sampling:
      for (auto s : {SamplingStrategy::Random, SamplingStrategy::DFPS, SamplingStrategy::FFPS,
                     SamplingStrategy::RASHybrid}) {
        add(to_string(s), [s](RunConfig& c) { c.model.sampling = s; });
      }
      break;
    case AblationSuite::Components:
      for (bool prt : {false, true}) {
        for (bool prm : {false, true}) {
          std::string name = prt ? (prm ? "prt+prm" : "prt") : (prm ? "prm" : "none");
          add(name, [prt, prm](RunConfig& c) {
            c.model.kind = ModelKind::Pttr;
            c.model.matcher = prt ? Matcher::Prt : Matcher::Cosine;
            c.model.use_prm = prm;
          });
        }
      }
      std::swap(out[1], out[2]);  // none, prt, prm, prt+prm
      break;
    case AblationSuite::AttentionParts:
      for (bool norm : {false, true}) {
        for (bool offset : {false, true}) {
          std::string name = norm ? (offset ? "offset+norm" : "norm") : (offset ? "offset" : "none");
          add(name, [norm, offset](RunConfig& c) {
            c.model.kind = ModelKind::Pttr;
            c.model.matcher = Matcher::Prt;
            c.model.ram = RamOptions{norm, offset};
          });
        }
      }
      break;
    case AblationSuite::FusionModes:
      for (auto branch : {FusionBranch::Point, FusionBranch::Bev}) {
        for (auto mode : {FusionMode::Addition, FusionMode::Global, FusionMode::PointWise}) {
          add(to_string(mode) + "@" + to_string(branch), [mode, branch](RunConfig& c) {
            c.model.kind = ModelKind::PttrPlusPlus;
            c.model.branches = BranchMode::Fused;
            c.model.fusion = mode;
            c.model.fusion_branch = branch;
          });
        }
      }
      break;
  }
  return out;
}

std::vector<ResultRow> run_ablation(AblationSuite suite, const RunConfig& base,
                                    const std::vector<TrackletSequence>& train_set,
                                    const std::vector<TrackletSequence>& test_set) {
  std::vector<ResultRow> rows;
  for (const auto& v : ablation_variants(suite, base)) {
    const auto r = run_experiment(v.config, train_set, test_set);
    const auto part = result_rows(v.name, r.eval);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

}  // namespace pttr
