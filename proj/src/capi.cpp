#include "npgraph/npgraph.h"

#include <exception>
#include <json.hpp>
#include <memory>
#include <new>
#include <string>

#include "commands.hpp"
#include "common.hpp"
#include "gibbs.hpp"
#include "model_selection.hpp"

struct npgraph_status {
  int code = NPGRAPH_OK;
  std::string message;
};

struct npgraph_fit {
  npgraph::ChainOutput output;
  npgraph::PrecisionHyper selected;
  Eigen::MatrixXi edges;
};

namespace {

int code_of(npgraph::ErrorCode code) {
  switch (code) {
    case npgraph::ErrorCode::invalid_argument: return NPGRAPH_ERR_INVALID_ARGUMENT;
    case npgraph::ErrorCode::data_error: return NPGRAPH_ERR_DATA;
    case npgraph::ErrorCode::io_error: return NPGRAPH_ERR_IO;
    case npgraph::ErrorCode::numeric_failure: return NPGRAPH_ERR_NUMERIC;
    case npgraph::ErrorCode::internal_error: return NPGRAPH_ERR_INTERNAL;
  }
  return NPGRAPH_ERR_INTERNAL;
}

void set_status(npgraph_status** status, int code, const std::string& message) {
  if (!status) return;
  *status = new (std::nothrow) npgraph_status{code, message};
}

// Runs fn, translating C++ exceptions into error codes.
template <typename Fn>
int guarded(npgraph_status** status, Fn&& fn) {
  if (status) *status = nullptr;
  try {
    fn();
    return NPGRAPH_OK;
  } catch (const npgraph::Error& e) {
    const int code = code_of(e.code());
    set_status(status, code, e.what());
    return code;
  } catch (const std::bad_alloc&) {
    set_status(status, NPGRAPH_ERR_INTERNAL, "out of memory");
    return NPGRAPH_ERR_INTERNAL;
  } catch (const std::exception& e) {
    set_status(status, NPGRAPH_ERR_INTERNAL, e.what());
    return NPGRAPH_ERR_INTERNAL;
  } catch (...) {
    set_status(status, NPGRAPH_ERR_INTERNAL, "unknown failure");
    return NPGRAPH_ERR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* npgraph_version(void) { return npgraph::kVersion; }

int npgraph_status_code(const npgraph_status* status) {
  return status ? status->code : NPGRAPH_OK;
}

const char* npgraph_status_message(const npgraph_status* status) {
  return status ? status->message.c_str() : "";
}

void npgraph_status_free(npgraph_status* status) { delete status; }

int npgraph_run(const char* command, const char* config_json, npgraph_status** status) {
  return guarded(status, [&] {
    npgraph::require(command != nullptr, npgraph::ErrorCode::invalid_argument,
                     "command must not be NULL");
    npgraph::require(config_json != nullptr, npgraph::ErrorCode::invalid_argument,
                     "config_json must not be NULL");
    npgraph::commands::run(command, config_json);
  });
}

int npgraph_fit_create(const double* data, int n_rows, int n_cols, const char* config_json,
                       npgraph_fit** fit, npgraph_status** status) {
  if (fit) *fit = nullptr;
  return guarded(status, [&] {
    npgraph::require(fit != nullptr, npgraph::ErrorCode::invalid_argument,
                     "fit out-parameter must not be NULL");
    npgraph::require(data != nullptr && n_rows >= 2 && n_cols >= 2,
                     npgraph::ErrorCode::invalid_argument,
                     "need a data pointer with at least 2 rows and 2 columns");

    Eigen::MatrixXd x(n_rows, n_cols);
    for (int r = 0; r < n_rows; ++r) {
      for (int c = 0; c < n_cols; ++c) x(r, c) = data[r * n_cols + c];
    }

    // Reuse the fit command's configuration schema through a JSON document.
    const std::string text = config_json ? config_json : "{}";
    nlohmann::ordered_json cfg = nlohmann::ordered_json::parse(text, nullptr, false);
    npgraph::require(!cfg.is_discarded() && cfg.is_object(),
                     npgraph::ErrorCode::invalid_argument,
                     "config_json must be a JSON object");

    npgraph::ChainConfig base;
    std::uint64_t master_seed = 0;
    if (cfg.contains("seed")) {
      npgraph::require(cfg.at("seed").is_number_integer(),
                       npgraph::ErrorCode::invalid_argument, "'seed' must be an integer");
      master_seed = cfg.at("seed").get<std::uint64_t>();
    }
    if (cfg.contains("chain") && cfg.at("chain").is_object()) {
      const auto& c = cfg.at("chain");
      if (c.contains("burn")) base.n_burn = c.at("burn").get<int>();
      if (c.contains("keep")) base.n_keep = c.at("keep").get<int>();
      if (c.contains("thinning")) base.thinning = c.at("thinning").get<int>();
      if (c.contains("hmc_travel_time")) base.hmc_travel_time = c.at("hmc_travel_time").get<double>();
      if (c.contains("hmc_trajectories")) base.hmc_trajectories = c.at("hmc_trajectories").get<int>();
      if (c.contains("quadrature_nodes")) base.quadrature_nodes = c.at("quadrature_nodes").get<int>();
      if (c.contains("min_basis")) base.min_basis = c.at("min_basis").get<int>();
      if (c.contains("max_basis")) base.max_basis = c.at("max_basis").get<int>();
      if (c.contains("basis_counts")) {
        for (const auto& v : c.at("basis_counts")) base.basis_counts.push_back(v.get<int>());
      }
    }
    if (cfg.contains("prior") && cfg.at("prior").is_object()) {
      const auto& pr = cfg.at("prior");
      if (pr.contains("nu")) base.prior_nu = pr.at("nu").get<double>();
      if (pr.contains("tau")) base.prior_tau = pr.at("tau").get<double>();
      if (pr.contains("sigma2")) base.prior_sigma2 = pr.at("sigma2").get<double>();
    }
    std::vector<npgraph::PrecisionHyper> grid;
    if (cfg.contains("grid") && cfg.at("grid").is_array()) {
      for (const auto& e : cfg.at("grid")) {
        npgraph::PrecisionHyper h;
        h.c0 = e.at("c0").get<double>();
        h.b0 = e.at("b0").get<double>();
        h.b1 = e.at("b1").get<double>();
        grid.push_back(h);
      }
    } else {
      grid = npgraph::default_hyper_grid();
    }

    base.seed = npgraph::Rng::split_seed(master_seed, 1);
    const npgraph::HyperGridResult selection =
        npgraph::select_hyperparameters(x, grid, base);

    npgraph::ChainConfig final_config = base;
    final_config.hyper = selection.best;
    final_config.basis_counts = selection.basis_counts;
    final_config.seed = npgraph::Rng::split_seed(master_seed, 2);

    auto handle = std::make_unique<npgraph_fit>();
    handle->output = npgraph::run_chain(x, final_config);
    handle->selected = selection.best;
    handle->edges = npgraph::median_probability_edges(handle->output.edge_mean);
    *fit = handle.release();
  });
}

void npgraph_fit_free(npgraph_fit* fit) { delete fit; }

int npgraph_fit_dim(const npgraph_fit* fit) {
  return fit ? static_cast<int>(fit->output.edge_mean.rows()) : 0;
}

int npgraph_fit_edge_mean(const npgraph_fit* fit, double* out) {
  if (!fit || !out) return NPGRAPH_ERR_INVALID_ARGUMENT;
  const auto p = fit->output.edge_mean.rows();
  for (Eigen::Index r = 0; r < p; ++r) {
    for (Eigen::Index c = 0; c < p; ++c) out[r * p + c] = fit->output.edge_mean(r, c);
  }
  return NPGRAPH_OK;
}

int npgraph_fit_edges(const npgraph_fit* fit, int* out) {
  if (!fit || !out) return NPGRAPH_ERR_INVALID_ARGUMENT;
  const auto p = fit->edges.rows();
  for (Eigen::Index r = 0; r < p; ++r) {
    for (Eigen::Index c = 0; c < p; ++c) out[r * p + c] = fit->edges(r, c);
  }
  return NPGRAPH_OK;
}

int npgraph_fit_omega_mean(const npgraph_fit* fit, double* out) {
  if (!fit || !out) return NPGRAPH_ERR_INVALID_ARGUMENT;
  const auto p = fit->output.omega_mean.rows();
  for (Eigen::Index r = 0; r < p; ++r) {
    for (Eigen::Index c = 0; c < p; ++c) out[r * p + c] = fit->output.omega_mean(r, c);
  }
  return NPGRAPH_OK;
}

int npgraph_fit_basis_count(const npgraph_fit* fit, int column) {
  if (!fit || column < 1 ||
      column > static_cast<int>(fit->output.basis_counts.size())) {
    return 0;
  }
  return fit->output.basis_counts[static_cast<std::size_t>(column - 1)];
}

int npgraph_fit_selected_hyper(const npgraph_fit* fit, double* c0, double* b0, double* b1) {
  if (!fit) return NPGRAPH_ERR_INVALID_ARGUMENT;
  if (c0) *c0 = fit->selected.c0;
  if (b0) *b0 = fit->selected.b0;
  if (b1) *b1 = fit->selected.b1;
  return NPGRAPH_OK;
}

}  // extern "C"
