#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <limits>

#include "common.hpp"
#include "gibbs.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "model_selection.hpp"
#include "simulate.hpp"
#include "study.hpp"
#include "transform.hpp"

namespace npgraph::commands {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

json parse_json(const std::string& text) {
  json parsed = json::parse(text, nullptr, false);
  require(!parsed.is_discarded(), ErrorCode::invalid_argument,
          "configuration is not valid JSON");
  require(parsed.is_object(), ErrorCode::invalid_argument,
          "configuration must be a JSON object");
  return parsed;
}

double get_number(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  require(j.at(key).is_number(), ErrorCode::invalid_argument,
          "config field '" + key + "' must be a number");
  return j.at(key).get<double>();
}

int get_int(const json& j, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  require(j.at(key).is_number_integer(), ErrorCode::invalid_argument,
          "config field '" + key + "' must be an integer");
  return j.at(key).get<int>();
}

bool get_bool(const json& j, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  require(j.at(key).is_boolean(), ErrorCode::invalid_argument,
          "config field '" + key + "' must be a boolean");
  return j.at(key).get<bool>();
}

std::string get_string(const json& j, const std::string& key) {
  require(j.contains(key) && j.at(key).is_string(), ErrorCode::invalid_argument,
          "config field '" + key + "' (string) is required");
  return j.at(key).get<std::string>();
}

std::uint64_t get_seed(const json& j, bool required) {
  if (!j.contains("seed")) {
    require(!required, ErrorCode::invalid_argument,
            "config field 'seed' is required (no wall-clock default)");
    return 0;
  }
  require(j.at("seed").is_number_integer() && j.at("seed").get<std::int64_t>() >= 0,
          ErrorCode::invalid_argument, "config field 'seed' must be a non-negative integer");
  return j.at("seed").get<std::uint64_t>();
}

fs::path get_out_dir(const json& j) {
  const fs::path dir = get_string(j, "out");
  ensure_directory(dir);
  return dir;
}

ChainConfig chain_from_json(const json& cfg) {
  ChainConfig chain;
  if (cfg.contains("chain")) {
    const json& c = cfg.at("chain");
    require(c.is_object(), ErrorCode::invalid_argument, "config field 'chain' must be an object");
    chain.n_burn = get_int(c, "burn", chain.n_burn);
    chain.n_keep = get_int(c, "keep", chain.n_keep);
    chain.thinning = get_int(c, "thinning", chain.thinning);
    chain.hmc_travel_time = get_number(c, "hmc_travel_time", chain.hmc_travel_time);
    chain.hmc_trajectories = get_int(c, "hmc_trajectories", chain.hmc_trajectories);
    chain.quadrature_nodes = get_int(c, "quadrature_nodes", chain.quadrature_nodes);
    chain.min_basis = get_int(c, "min_basis", chain.min_basis);
    chain.max_basis = get_int(c, "max_basis", chain.max_basis);
    if (c.contains("basis_counts")) {
      require(c.at("basis_counts").is_array(), ErrorCode::invalid_argument,
              "config field 'chain.basis_counts' must be an array of integers");
      for (const auto& v : c.at("basis_counts")) {
        require(v.is_number_integer(), ErrorCode::invalid_argument,
                "config field 'chain.basis_counts' must be an array of integers");
        chain.basis_counts.push_back(v.get<int>());
      }
    }
  }
  if (cfg.contains("prior")) {
    const json& pr = cfg.at("prior");
    require(pr.is_object(), ErrorCode::invalid_argument, "config field 'prior' must be an object");
    chain.prior_nu = get_number(pr, "nu", chain.prior_nu);
    chain.prior_tau = get_number(pr, "tau", chain.prior_tau);
    chain.prior_sigma2 = get_number(pr, "sigma2", chain.prior_sigma2);
  }
  return chain;
}

std::vector<PrecisionHyper> grid_from_json(const json& cfg) {
  if (!cfg.contains("grid")) return default_hyper_grid();
  const json& g = cfg.at("grid");
  require(g.is_array() && !g.empty(), ErrorCode::invalid_argument,
          "config field 'grid' must be a non-empty array");
  std::vector<PrecisionHyper> grid;
  for (const auto& entry : g) {
    require(entry.is_object(), ErrorCode::invalid_argument,
            "each grid entry must be an object with c0, b0, b1");
    PrecisionHyper h;
    h.c0 = get_number(entry, "c0", -1.0);
    h.b0 = get_number(entry, "b0", -1.0);
    h.b1 = get_number(entry, "b1", -1.0);
    require(h.c0 > 0 && h.b0 > 0 && h.b1 > 0, ErrorCode::invalid_argument,
            "grid entries require positive c0, b0, b1");
    grid.push_back(h);
  }
  return grid;
}

Scenario scenario_from_json(const json& s) {
  require(s.is_object(), ErrorCode::invalid_argument, "scenario must be a JSON object");
  Scenario scenario;
  scenario.p = get_int(s, "p", 0);
  scenario.n = get_int(s, "n", 0);
  require(scenario.p >= 2 && scenario.n >= 2, ErrorCode::invalid_argument,
          "scenario requires integer fields p >= 2 and n >= 2");
  scenario.structure = parse_structure(get_string(s, "structure"));
  scenario.sparsity_fraction = get_number(s, "sparsity", scenario.sparsity_fraction);
  scenario.power_m = get_int(s, "power_m", scenario.power_m);
  if (s.contains("transforms")) {
    require(s.at("transforms").is_array() && !s.at("transforms").empty(),
            ErrorCode::invalid_argument, "scenario field 'transforms' must be a non-empty array");
    scenario.transforms.clear();
    for (const auto& t : s.at("transforms")) {
      require(t.is_string(), ErrorCode::invalid_argument,
              "scenario transforms must be strings");
      scenario.transforms.push_back(parse_transform(t.get<std::string>()));
    }
  }
  return scenario;
}

json scenario_to_json(const Scenario& scenario) {
  json s;
  s["p"] = scenario.p;
  s["n"] = scenario.n;
  s["structure"] = structure_name(scenario.structure);
  if (scenario.structure == Structure::percent) s["sparsity"] = scenario.sparsity_fraction;
  json transforms = json::array();
  for (const auto t : scenario.transforms) transforms.push_back(transform_name(t));
  s["transforms"] = transforms;
  s["power_m"] = scenario.power_m;
  return s;
}

json chain_to_json(const ChainConfig& chain) {
  json c;
  c["burn"] = chain.n_burn;
  c["keep"] = chain.n_keep;
  c["thinning"] = chain.thinning;
  c["hmc_travel_time"] = chain.hmc_travel_time;
  c["hmc_trajectories"] = chain.hmc_trajectories;
  c["quadrature_nodes"] = chain.quadrature_nodes;
  c["min_basis"] = chain.min_basis;
  c["max_basis"] = chain.max_basis;
  return c;
}

json prior_to_json(const ChainConfig& chain) {
  json p;
  p["nu"] = chain.prior_nu;
  p["tau"] = chain.prior_tau;
  p["sigma2"] = chain.prior_sigma2;
  return p;
}

json grid_to_json(const std::vector<PrecisionHyper>& grid) {
  json g = json::array();
  for (const auto& h : grid) {
    json e;
    e["c0"] = h.c0;
    e["b0"] = h.b0;
    e["b1"] = h.b1;
    g.push_back(e);
  }
  return g;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Validates fit input: finite cells in [0,1] (after optional min-max
// rescaling), no constant columns; exact 0/1 nudged into the open interval.
Eigen::MatrixXd prepare_unit_data(Eigen::MatrixXd x, bool rescale) {
  const auto n = x.rows();
  const auto p = x.cols();
  require(n >= 2 && p >= 2, ErrorCode::data_error,
          "input needs at least two rows and two columns");
  for (Eigen::Index d = 0; d < p; ++d) {
    const double lo = x.col(d).minCoeff();
    const double hi = x.col(d).maxCoeff();
    require(hi > lo, ErrorCode::data_error,
            "column " + std::to_string(d + 1) + " is constant");
    if (rescale) x.col(d) = (x.col(d).array() - lo) / (hi - lo);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index d = 0; d < p; ++d) {
      require(x(i, d) >= 0.0 && x(i, d) <= 1.0, ErrorCode::data_error,
              "value outside [0,1]" + std::string(rescale ? " after rescaling" : "") +
                  " at row " + std::to_string(i + 1) + ", column " + std::to_string(d + 1) +
                  (rescale ? "" : " (use --rescale for raw data)"));
      x(i, d) = std::min(1.0 - 1e-10, std::max(1e-10, x(i, d)));
    }
  }
  return x;
}

void cmd_simulate(const json& cfg) {
  Scenario scenario = scenario_from_json(
      cfg.contains("scenario") ? cfg.at("scenario") : json::object());
  scenario.seed = get_seed(cfg, true);
  const fs::path out = get_out_dir(cfg);

  const Dataset data = gen_dataset(scenario);
  write_matrix_csv(out / "x.csv", data.x);
  write_matrix_csv(out / "y_latent.csv", data.y_latent);
  write_matrix_csv(out / "truth.csv", data.truth);

  json provenance;
  provenance["command"] = "simulate";
  provenance["version"] = kVersion;
  provenance["seed"] = scenario.seed;
  provenance["scenario"] = scenario_to_json(scenario);
  json params = json::array();
  for (std::size_t d = 0; d < data.transforms.size(); ++d) {
    const TransformRecord& r = data.transforms[d];
    json e;
    e["column"] = d + 1;
    e["family"] = transform_name(r.family);
    e["location"] = r.location;
    e["scale"] = r.scale;
    if (r.family == TransformFamily::power) e["power_m"] = r.power_m;
    params.push_back(e);
  }
  provenance["transform_parameters"] = params;
  write_text_file(out / "provenance.json", provenance.dump(2) + "\n");
}

void cmd_fit(const json& cfg) {
  const std::string input = get_string(cfg, "input");
  const bool rescale = get_bool(cfg, "rescale", false);
  const std::uint64_t master_seed = get_seed(cfg, true);
  const fs::path out = get_out_dir(cfg);

  const Eigen::MatrixXd x = prepare_unit_data(read_matrix_csv(input), rescale);
  const auto p = x.cols();

  ChainConfig base = chain_from_json(cfg);
  base.seed = Rng::split_seed(master_seed, 1);
  const std::vector<PrecisionHyper> grid = grid_from_json(cfg);

  const HyperGridResult selection = select_hyperparameters(x, grid, base);

  ChainConfig final_config = base;
  final_config.hyper = selection.best;
  final_config.basis_counts = selection.basis_counts;
  final_config.seed = Rng::split_seed(master_seed, 2);
  const ChainOutput chain = run_chain(x, final_config);
  const Eigen::MatrixXi edges = median_probability_edges(chain.edge_mean);

  write_matrix_csv(out / "edge_mean.csv", chain.edge_mean);
  write_matrix_csv(out / "edges.csv", edges);
  write_matrix_csv(out / "omega_mean.csv", chain.omega_mean);

  // Posterior-mean transformations on the 101-point grid.
  {
    std::string csv = "x";
    for (Eigen::Index d = 0; d < p; ++d) csv += ",f" + std::to_string(d + 1);
    csv += '\n';
    std::vector<BasisSpec> specs;
    specs.reserve(static_cast<std::size_t>(p));
    for (Eigen::Index d = 0; d < p; ++d) {
      specs.push_back(build_basis(chain.basis_counts[static_cast<std::size_t>(d)]));
    }
    for (int g = 0; g <= 100; ++g) {
      const double xg = static_cast<double>(g) / 100.0;
      csv += format_double(xg);
      for (Eigen::Index d = 0; d < p; ++d) {
        const double f =
            chain.theta_mean[static_cast<std::size_t>(d)].dot(eval_basis(specs[static_cast<std::size_t>(d)], xg));
        csv += ',' + format_double(f);
      }
      csv += '\n';
    }
    write_text_file(out / "transforms.csv", csv);
  }

  {
    std::string csv = "c0,b0,b1,k,deviance,bic,selected\n";
    for (const auto& row : selection.rows) {
      csv += format_double(row.hyper.c0) + ',' + format_double(row.hyper.b0) + ',' +
             format_double(row.hyper.b1) + ',' + std::to_string(row.k) + ',' +
             format_double(row.error.empty() ? row.deviance
                                             : std::numeric_limits<double>::quiet_NaN()) +
             ',' + format_double(row.bic) + ',' + (row.selected ? "1" : "0") + '\n';
    }
    write_text_file(out / "bic_table.csv", csv);
  }

  json manifest;
  manifest["command"] = "fit";
  manifest["version"] = kVersion;
  manifest["input"] = input;
  manifest["rescale"] = rescale;
  manifest["seed"] = master_seed;
  manifest["chain"] = chain_to_json(base);
  manifest["prior"] = prior_to_json(base);
  manifest["grid"] = grid_to_json(grid);
  json derived;
  derived["basis_counts"] = selection.basis_counts;
  json best;
  best["c0"] = selection.best.c0;
  best["b0"] = selection.best.b0;
  best["b1"] = selection.best.b1;
  derived["selected_hyper"] = best;
  json grid_seeds = json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid_seeds.push_back(Rng::split_seed(base.seed, 1000 + static_cast<std::uint64_t>(i)));
  }
  derived["grid_chain_seeds"] = grid_seeds;
  derived["final_chain_seed"] = final_config.seed;
  json bic_rows = json::array();
  for (const auto& row : selection.rows) {
    json r;
    r["c0"] = row.hyper.c0;
    r["b0"] = row.hyper.b0;
    r["b1"] = row.hyper.b1;
    r["k"] = row.k;
    r["deviance"] = row.error.empty() ? finite_or_null(row.deviance) : json(nullptr);
    r["bic"] = finite_or_null(row.bic);
    r["selected"] = row.selected;
    if (!row.error.empty()) r["error"] = row.error;
    bic_rows.push_back(r);
  }
  derived["bic_table"] = bic_rows;
  manifest["derived"] = derived;
  write_text_file(out / "manifest.json", manifest.dump(2) + "\n");
}

void cmd_study(const json& cfg) {
  StudyConfig study;
  study.master_seed = get_seed(cfg, true);
  const fs::path out = get_out_dir(cfg);
  study.replications = get_int(cfg, "replications", 1);
  study.chain = chain_from_json(cfg);
  study.grid = grid_from_json(cfg);
  require(cfg.contains("scenarios") && cfg.at("scenarios").is_array() &&
              !cfg.at("scenarios").empty(),
          ErrorCode::invalid_argument, "config field 'scenarios' must be a non-empty array");
  int index = 0;
  for (const auto& s : cfg.at("scenarios")) {
    StudyScenario entry;
    entry.scenario = scenario_from_json(s);
    entry.id = s.contains("id") && s.at("id").is_string()
                   ? s.at("id").get<std::string>()
                   : structure_name(entry.scenario.structure) + "-" + std::to_string(++index);
    study.scenarios.push_back(std::move(entry));
  }

  const StudyReport report = run_study(study);

  {
    std::string csv =
        "scenario,replication,seed,c0,b0,b1,tp,tn,fp,fn,"
        "specificity,sensitivity,mcc,wall_seconds,failed,error\n";
    for (const auto& row : report.rows) {
      csv += csv_escape(row.scenario_id) + ',' + std::to_string(row.replication) + ',' +
             std::to_string(row.seed) + ',';
      if (row.failed) {
        csv += "NaN,NaN,NaN,0,0,0,0,NaN,NaN,NaN,";
      } else {
        csv += format_double(row.chosen.c0) + ',' + format_double(row.chosen.b0) + ',' +
               format_double(row.chosen.b1) + ',' + std::to_string(row.metrics.tp) + ',' +
               std::to_string(row.metrics.tn) + ',' + std::to_string(row.metrics.fp) + ',' +
               std::to_string(row.metrics.fn) + ',' + format_double(row.metrics.specificity) +
               ',' + format_double(row.metrics.sensitivity) + ',' +
               format_double(row.metrics.mcc) + ',';
      }
      csv += format_double(row.wall_seconds) + ',' + (row.failed ? "1" : "0") + ',' +
             csv_escape(row.error) + '\n';
    }
    write_text_file(out / "replications.csv", csv);
  }

  {
    std::string csv = "metric,scenario,value\n";
    for (const auto& row : report.rows) {
      if (row.failed) continue;
      const auto add = [&](const char* metric, double value) {
        if (std::isfinite(value)) {
          csv += std::string(metric) + ',' + csv_escape(row.scenario_id) + ',' +
                 format_double(value) + '\n';
        }
      };
      add("specificity", row.metrics.specificity);
      add("sensitivity", row.metrics.sensitivity);
      add("mcc", row.metrics.mcc);
    }
    write_text_file(out / "long.csv", csv);
  }

  json summary;
  summary["command"] = "study";
  summary["version"] = kVersion;
  summary["seed"] = study.master_seed;
  summary["replications"] = study.replications;
  json scenarios = json::array();
  for (const auto& s : report.summaries) {
    json e;
    e["scenario"] = s.scenario_id;
    e["n_success"] = s.n_success;
    e["n_failed"] = s.n_failed;
    e["mcc_missing"] = s.mcc_missing;
    const auto metric_json = [](const MetricSummary& m) {
      json q;
      q["min"] = finite_or_null(m.min);
      q["q25"] = finite_or_null(m.q25);
      q["median"] = finite_or_null(m.median);
      q["q75"] = finite_or_null(m.q75);
      q["max"] = finite_or_null(m.max);
      q["n"] = m.n_defined;
      return q;
    };
    e["specificity"] = metric_json(s.specificity);
    e["sensitivity"] = metric_json(s.sensitivity);
    e["mcc"] = metric_json(s.mcc);
    scenarios.push_back(e);
  }
  summary["scenarios"] = scenarios;
  write_text_file(out / "summary.json", summary.dump(2) + "\n");

  int successes = 0;
  for (const auto& s : report.summaries) successes += s.n_success;
  require(successes > 0, ErrorCode::numeric_failure,
          "study: every replication failed; see replications.csv");
}

void cmd_select_basis(const json& cfg) {
  const std::string input = get_string(cfg, "input");
  const bool rescale = get_bool(cfg, "rescale", false);
  const fs::path out = get_out_dir(cfg);
  const int min_basis = get_int(cfg, "min_basis", 4);
  const int max_basis = get_int(cfg, "max_basis", 100);

  const Eigen::MatrixXd x = prepare_unit_data(read_matrix_csv(input), rescale);

  std::string csv = "variable,basis_count,aic,selected\n";
  json counts = json::array();
  for (Eigen::Index d = 0; d < x.cols(); ++d) {
    const AicSelection sel = aic_select_basis(x.col(d), min_basis, max_basis);
    counts.push_back(sel.selected);
    for (std::size_t i = 0; i < sel.tried.size(); ++i) {
      csv += std::to_string(d + 1) + ',' + std::to_string(sel.tried[i]) + ',' +
             format_double(sel.aic[i]) + ',' + (sel.tried[i] == sel.selected ? "1" : "0") + '\n';
    }
  }
  write_text_file(out / "aic.csv", csv);

  json manifest;
  manifest["command"] = "select-basis";
  manifest["version"] = kVersion;
  manifest["input"] = input;
  manifest["rescale"] = rescale;
  manifest["min_basis"] = min_basis;
  manifest["max_basis"] = max_basis;
  manifest["selected_basis_counts"] = counts;
  write_text_file(out / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace

void run(const std::string& command, const std::string& config_json) {
  const json cfg = parse_json(config_json);
  if (command == "simulate") {
    cmd_simulate(cfg);
  } else if (command == "fit") {
    cmd_fit(cfg);
  } else if (command == "study") {
    cmd_study(cfg);
  } else if (command == "select-basis") {
    cmd_select_basis(cfg);
  } else {
    fail(ErrorCode::invalid_argument,
         "unknown command '" + command + "' (valid: simulate, fit, study, select-basis)");
  }
}

}  // namespace npgraph::commands
