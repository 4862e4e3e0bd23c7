#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pttr/harness/config.hpp"
#include "pttr/harness/io.hpp"
#include "pttr/harness/tracker.hpp"

namespace pttr {

using Net = TrackerNet<float>;

/// Independent random streams of one run, all derived from `RunConfig::seed`.
enum class SeedStream : std::uint64_t { TrainData = 0, TestData = 1, Init = 2, Training = 3, Evaluation = 4 };

RandomState stream(const RunConfig& cfg, SeedStream s);

std::vector<TrackletSequence> generate_split(const RunConfig& cfg, bool test_split);

struct ExperimentResult {
  std::vector<EpochRecord> curve;
  EvalResult eval;
};

/// Builds a network from the config's init stream, trains it and evaluates on
/// `test`. The trained network is returned through `net_out` when given.
ExperimentResult run_experiment(const RunConfig& cfg, const std::vector<TrackletSequence>& train_set,
                                const std::vector<TrackletSequence>& test_set, std::optional<Net>* net_out = nullptr);

/// Result rows for one evaluation: one per class plus an `all` row.
std::vector<ResultRow> result_rows(const std::string& variant, const EvalResult& eval);

enum class AblationSuite { Sampling, Components, AttentionParts, FusionModes };

std::string to_string(AblationSuite s);
AblationSuite ablation_suite_from_string(const std::string& s);

struct AblationVariant {
  std::string name;
  RunConfig config;
};

/// The variant rows of a suite, each a copy of `base` with the ablated knobs set.
std::vector<AblationVariant> ablation_variants(AblationSuite suite, const RunConfig& base);

/// Trains and evaluates every variant on the same data.
std::vector<ResultRow> run_ablation(AblationSuite suite, const RunConfig& base,
                                    const std::vector<TrackletSequence>& train_set,
                                    const std::vector<TrackletSequence>& test_set);

}  // namespace pttr
