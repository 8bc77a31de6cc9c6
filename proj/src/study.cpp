#include "study.hpp"

#include <chrono>
#include <cmath>

#include "common.hpp"
#include "parallel.hpp"

namespace npgraph {

namespace {

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  std::vector<double> defined;
  defined.reserve(values.size());
  for (double v : values) {
    if (std::isfinite(v)) defined.push_back(v);
  }
  s.n_defined = static_cast<int>(defined.size());
  if (defined.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.min = s.q25 = s.median = s.q75 = s.max = nan;
    return s;
  }
  s.min = quantile(defined, 0.0);
  s.q25 = quantile(defined, 0.25);
  s.median = quantile(defined, 0.5);
  s.q75 = quantile(defined, 0.75);
  s.max = quantile(defined, 1.0);
  return s;
}

}  // namespace

ReplicationResult run_replication(const StudyScenario& scenario, int replication,
                                  std::uint64_t seed, const ChainConfig& chain,
                                  const std::vector<PrecisionHyper>& grid) {
  ReplicationResult row;
  row.scenario_id = scenario.id;
  row.replication = replication;
  row.seed = seed;
  const auto started = std::chrono::steady_clock::now();
  try {
    Scenario data_scenario = scenario.scenario;
    data_scenario.seed = Rng::split_seed(seed, 0);
    const Dataset data = gen_dataset(data_scenario);

    ChainConfig base = chain;
    base.seed = Rng::split_seed(seed, 1);
    const HyperGridResult selection = select_hyperparameters(data.x, grid, base);

    ChainConfig final_config = base;
    final_config.hyper = selection.best;
    final_config.basis_counts = selection.basis_counts;
    final_config.seed = Rng::split_seed(seed, 2);
    const ChainOutput output = run_chain(data.x, final_config);

    row.chosen = selection.best;
    row.metrics = score_graph(median_probability_edges(output.edge_mean), data.truth);
  } catch (const Error& e) {
    row.failed = true;
    row.error = e.what();
  }
  row.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return row;
}

StudyReport run_study(const StudyConfig& config) {
  require(!config.scenarios.empty(), ErrorCode::invalid_argument,
          "study: scenario list must not be empty");
  require(config.replications >= 1, ErrorCode::invalid_argument,
          "study: need at least one replication");
  const std::vector<PrecisionHyper> grid =
      config.grid.empty() ? default_hyper_grid() : config.grid;

  const int n_scenarios = static_cast<int>(config.scenarios.size());
  const int jobs = n_scenarios * config.replications;
  StudyReport report;
  report.rows.resize(static_cast<std::size_t>(jobs));
  parallel_for(jobs, [&](int job) {
    const int s = job / config.replications;
    const int r = job % config.replications;
    const std::uint64_t seed =
        Rng::split_seed(config.master_seed, static_cast<std::uint64_t>(job));
    report.rows[static_cast<std::size_t>(job)] = run_replication(
        config.scenarios[static_cast<std::size_t>(s)], r + 1, seed, config.chain, grid);
  });

  for (int s = 0; s < n_scenarios; ++s) {
    ScenarioSummary summary;
    summary.scenario_id = config.scenarios[static_cast<std::size_t>(s)].id;
    std::vector<double> sp, se, mcc;
    for (int r = 0; r < config.replications; ++r) {
      const auto& row = report.rows[static_cast<std::size_t>(s * config.replications + r)];
      if (row.failed) {
        ++summary.n_failed;
        continue;
      }
      ++summary.n_success;
      sp.push_back(row.metrics.specificity);
      se.push_back(row.metrics.sensitivity);
      mcc.push_back(row.metrics.mcc);
      if (!std::isfinite(row.metrics.mcc)) ++summary.mcc_missing;
    }
    summary.specificity = summarize(sp);
    summary.sensitivity = summarize(se);
    summary.mcc = summarize(mcc);
    report.summaries.push_back(std::move(summary));
  }
  return report;
}

}  // namespace npgraph
