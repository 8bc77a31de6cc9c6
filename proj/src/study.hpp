#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gibbs.hpp"
#include "metrics.hpp"
#include "model_selection.hpp"
#include "simulate.hpp"

namespace npgraph {

struct StudyScenario {
  std::string id;
  Scenario scenario;  // scenario.seed is ignored; seeds derive from the master
};

struct StudyConfig {
  std::vector<StudyScenario> scenarios;
  int replications = 1;
  std::uint64_t master_seed = 0;
  ChainConfig chain;                 // shared chain settings (hyper is per grid entry)
  std::vector<PrecisionHyper> grid;  // empty -> default 4-setting grid
};

struct ReplicationResult {
  std::string scenario_id;
  int replication = 0;  // 1-based
  std::uint64_t seed = 0;
  PrecisionHyper chosen;
  ConfusionMetrics metrics;
  double wall_seconds = 0.0;
  bool failed = false;
  std::string error;
};

struct MetricSummary {
  double min = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, max = 0.0;
  int n_defined = 0;  // values entering the quantiles (NaNs excluded)
};

struct ScenarioSummary {
  std::string scenario_id;
  int n_success = 0;
  int n_failed = 0;
  int mcc_missing = 0;
  MetricSummary specificity, sensitivity, mcc;
};

struct StudyReport {
  std::vector<ReplicationResult> rows;       // scenario-major, replication-minor
  std::vector<ScenarioSummary> summaries;    // one per scenario
};

// One replication: generate data, pick hyperparameters on the grid, run the
// final chain, and score the median-probability graph against the truth.
ReplicationResult run_replication(const StudyScenario& scenario, int replication,
                                  std::uint64_t seed, const ChainConfig& chain,
                                  const std::vector<PrecisionHyper>& grid);

StudyReport run_study(const StudyConfig& config);

}  // namespace npgraph
