// Command-line front end for the npgraph shared library. All estimation
// work happens behind the C API; this binary only merges configuration
// sources (JSON file + flag overrides) and maps failures to exit codes:
// 0 success, 1 runtime failure, 2 usage or data error.
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "npgraph/npgraph.h"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int exit_code_for(int npgraph_code) {
  switch (npgraph_code) {
    case NPGRAPH_OK:
      return kExitOk;
    case NPGRAPH_ERR_INVALID_ARGUMENT:
    case NPGRAPH_ERR_DATA:
    case NPGRAPH_ERR_IO:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

struct CommonFlags {
  std::string config_path;
  std::optional<std::int64_t> seed;
  std::string out_dir;
  std::optional<int> burn;
  std::optional<int> keep;
  std::string grid;  // "c0,b0,b1;c0,b0,b1;..."
  bool rescale = false;
  std::string input;
};

void add_common_options(CLI::App* cmd, CommonFlags& flags, bool with_fit_flags) {
  cmd->add_option("--config", flags.config_path, "JSON configuration file");
  cmd->add_option("--seed", flags.seed, "master RNG seed (overrides config)");
  cmd->add_option("--out", flags.out_dir, "output directory (overrides config)");
  if (with_fit_flags) {
    cmd->add_option("--input", flags.input, "input data CSV (overrides config)");
    cmd->add_option("--burn", flags.burn, "burn-in sweeps (overrides config)");
    cmd->add_option("--keep", flags.keep, "kept sweeps (overrides config)");
    cmd->add_option("--grid", flags.grid,
                    "hyperparameter grid \"c0,b0,b1;c0,b0,b1;...\" (overrides config)");
    cmd->add_flag("--rescale", flags.rescale, "min-max rescale each column to [0,1]");
  }
}

// Parses "c0,b0,b1;c0,b0,b1" into the config's grid array.
bool parse_grid_flag(const std::string& text, json& grid_out, std::string& error) {
  grid_out = json::array();
  std::stringstream entries(text);
  std::string entry;
  while (std::getline(entries, entry, ';')) {
    if (entry.empty()) continue;
    std::stringstream fields(entry);
    std::string field;
    std::vector<double> values;
    while (std::getline(fields, field, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        error = "--grid: '" + field + "' is not a number";
        return false;
      }
    }
    if (values.size() != 3) {
      error = "--grid: each entry needs exactly c0,b0,b1 (got '" + entry + "')";
      return false;
    }
    json e;
    e["c0"] = values[0];
    e["b0"] = values[1];
    e["b1"] = values[2];
    grid_out.push_back(e);
  }
  if (grid_out.empty()) {
    error = "--grid: no entries";
    return false;
  }
  return true;
}

// Loads the --config file (if any) and applies flag overrides on top.
int build_config(const CommonFlags& flags, json& cfg, std::string& error) {
  cfg = json::object();
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path, std::ios::binary);
    if (!in.good()) {
      error = "cannot open config file: " + flags.config_path;
      return kExitUsage;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    cfg = json::parse(buffer.str(), nullptr, false);
    if (cfg.is_discarded() || !cfg.is_object()) {
      error = "config file is not a JSON object: " + flags.config_path;
      return kExitUsage;
    }
  }
  if (flags.seed) cfg["seed"] = *flags.seed;
  if (!flags.out_dir.empty()) cfg["out"] = flags.out_dir;
  if (!flags.input.empty()) cfg["input"] = flags.input;
  if (flags.rescale) cfg["rescale"] = true;
  if (flags.burn || flags.keep) {
    if (!cfg.contains("chain") || !cfg["chain"].is_object()) cfg["chain"] = json::object();
    if (flags.burn) cfg["chain"]["burn"] = *flags.burn;
    if (flags.keep) cfg["chain"]["keep"] = *flags.keep;
  }
  if (!flags.grid.empty()) {
    json grid;
    if (!parse_grid_flag(flags.grid, grid, error)) return kExitUsage;
    cfg["grid"] = grid;
  }
  return kExitOk;
}

int dispatch(const std::string& command, const CommonFlags& flags) {
  json cfg;
  std::string error;
  const int rc = build_config(flags, cfg, error);
  if (rc != kExitOk) {
    std::fprintf(stderr, "npgraph: %s\n", error.c_str());
    return rc;
  }
  npgraph_status* status = nullptr;
  const int code = npgraph_run(command.c_str(), cfg.dump().c_str(), &status);
  if (code != NPGRAPH_OK) {
    std::fprintf(stderr, "npgraph %s: %s\n", command.c_str(),
                 status ? npgraph_status_message(status) : "unknown failure");
    npgraph_status_free(status);
    return exit_code_for(code);
  }
  npgraph_status_free(status);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("npgraph ") + npgraph_version() +
               " — Bayesian nonparanormal graphical models"};
  app.require_subcommand(1);

  CommonFlags simulate_flags, fit_flags, study_flags, basis_flags;
  CLI::App* simulate =
      app.add_subcommand("simulate", "generate a synthetic dataset from a scenario");
  add_common_options(simulate, simulate_flags, false);
  CLI::App* fit = app.add_subcommand(
      "fit", "estimate the graph: AIC basis selection, BIC hyperparameter grid, final chain");
  add_common_options(fit, fit_flags, true);
  CLI::App* study =
      app.add_subcommand("study", "run replicated simulation scenarios and score recovery");
  add_common_options(study, study_flags, true);
  CLI::App* select_basis =
      app.add_subcommand("select-basis", "emit the per-variable AIC table only");
  add_common_options(select_basis, basis_flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (simulate->parsed()) return dispatch("simulate", simulate_flags);
  if (fit->parsed()) return dispatch("fit", fit_flags);
  if (study->parsed()) return dispatch("study", study_flags);
  if (select_basis->parsed()) return dispatch("select-basis", basis_flags);
  return kExitUsage;
}
