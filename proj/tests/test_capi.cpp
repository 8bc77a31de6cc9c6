// Exercises the shared library exactly as an external consumer would:
// only through the public C header.
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "npgraph/npgraph.h"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("npgraph_capi_test_" + std::to_string(std::rand()) + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Deterministic unit-interval data with round-robin column dependence, easy
// to fit quickly at tiny chain lengths.
std::vector<double> toy_data(int n, int p) {
  std::vector<double> x(static_cast<std::size_t>(n) * p);
  std::uint64_t s = 88172645463325252ull;
  auto next_u = [&]() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return (s >> 11) * (1.0 / 9007199254740992.0);
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) {
      const double u = next_u();
      x[static_cast<std::size_t>(i) * p + j] = 1e-6 + (1.0 - 2e-6) * u;
    }
  return x;
}

}  // namespace

TEST_CASE("version string is present") {
  const char* v = npgraph_version();
  REQUIRE(v != nullptr);
  CHECK(std::string(v).find('.') != std::string::npos);
}

TEST_CASE("invalid command surfaces a status with a usage code") {
  npgraph_status* status = nullptr;
  const int rc = npgraph_run("frobnicate", "{}", &status);
  CHECK(rc == NPGRAPH_ERR_INVALID_ARGUMENT);
  REQUIRE(status != nullptr);
  CHECK(npgraph_status_code(status) == rc);
  CHECK(std::string(npgraph_status_message(status)).find("frobnicate") != std::string::npos);
  npgraph_status_free(status);
}

TEST_CASE("null status pointers are tolerated") {
  CHECK(npgraph_run("frobnicate", "{}", nullptr) == NPGRAPH_ERR_INVALID_ARGUMENT);
  CHECK(npgraph_run(nullptr, "{}", nullptr) == NPGRAPH_ERR_INVALID_ARGUMENT);
}

TEST_CASE("malformed json is rejected cleanly") {
  npgraph_status* status = nullptr;
  const int rc = npgraph_run("simulate", "{not json", &status);
  CHECK(rc == NPGRAPH_ERR_INVALID_ARGUMENT);
  npgraph_status_free(status);
}

TEST_CASE("simulate writes its artifact files") {
  TempDir tmp;
  const std::string cfg = std::string("{\"seed\": 42, \"out\": \"") + tmp.path.string() +
                          "\", \"scenario\": {\"p\": 4, \"n\": 50, \"structure\": \"ar1\", "
                          "\"transforms\": [\"normal\"]}}";
  npgraph_status* status = nullptr;
  const int rc = npgraph_run("simulate", cfg.c_str(), &status);
  if (status) {
    INFO(npgraph_status_message(status));
  }
  REQUIRE(rc == NPGRAPH_OK);
  npgraph_status_free(status);
  CHECK(fs::exists(tmp.path / "x.csv"));
  CHECK(fs::exists(tmp.path / "y_latent.csv"));
  CHECK(fs::exists(tmp.path / "truth.csv"));
  CHECK(fs::exists(tmp.path / "provenance.json"));

  // Same config into a second directory: identical bytes.
  TempDir tmp2;
  const std::string cfg2 = std::string("{\"seed\": 42, \"out\": \"") + tmp2.path.string() +
                           "\", \"scenario\": {\"p\": 4, \"n\": 50, \"structure\": \"ar1\", "
                           "\"transforms\": [\"normal\"]}}";
  REQUIRE(npgraph_run("simulate", cfg2.c_str(), nullptr) == NPGRAPH_OK);
  CHECK(slurp(tmp.path / "x.csv") == slurp(tmp2.path / "x.csv"));
  CHECK(slurp(tmp.path / "truth.csv") == slurp(tmp2.path / "truth.csv"));
}

TEST_CASE("missing seed is refused for simulate") {
  TempDir tmp;
  const std::string cfg = std::string("{\"out\": \"") + tmp.path.string() +
                          "\", \"scenario\": {\"p\": 3, \"n\": 20, \"structure\": \"circle\"}}";
  npgraph_status* status = nullptr;
  const int rc = npgraph_run("simulate", cfg.c_str(), &status);
  CHECK(rc == NPGRAPH_ERR_INVALID_ARGUMENT);
  REQUIRE(status != nullptr);
  CHECK(std::string(npgraph_status_message(status)).find("seed") != std::string::npos);
  npgraph_status_free(status);
}

TEST_CASE("in-memory fit handle reports coherent results") {
  const int n = 60, p = 3;
  const std::vector<double> data = toy_data(n, p);
  const char* cfg =
      "{\"seed\": 7, \"chain\": {\"burn\": 20, \"keep\": 30, \"basis_counts\": [4, 4, 4]},"
      " \"grid\": [{\"c0\": 0.02, \"b0\": 1, \"b1\": 1}]}";
  npgraph_fit* fit = nullptr;
  npgraph_status* status = nullptr;
  const int rc = npgraph_fit_create(data.data(), n, p, cfg, &fit, &status);
  if (status) {
    INFO(npgraph_status_message(status));
  }
  REQUIRE(rc == NPGRAPH_OK);
  REQUIRE(fit != nullptr);
  npgraph_status_free(status);

  CHECK(npgraph_fit_dim(fit) == p);
  std::vector<double> edge_mean(p * p), omega(p * p);
  std::vector<int> edges(p * p);
  REQUIRE(npgraph_fit_edge_mean(fit, edge_mean.data()) == NPGRAPH_OK);
  REQUIRE(npgraph_fit_edges(fit, edges.data()) == NPGRAPH_OK);
  REQUIRE(npgraph_fit_omega_mean(fit, omega.data()) == NPGRAPH_OK);
  for (int i = 0; i < p; ++i) {
    CHECK(edge_mean[i * p + i] == 0.0);
    for (int j = 0; j < p; ++j) {
      CHECK(edge_mean[i * p + j] >= 0.0);
      CHECK(edge_mean[i * p + j] <= 1.0);
      CHECK(edge_mean[i * p + j] == edge_mean[j * p + i]);
      CHECK(edges[i * p + j] == edges[j * p + i]);
      CHECK(omega[i * p + j] == omega[j * p + i]);
      CHECK((edges[i * p + j] == 1) == (edge_mean[i * p + j] > 0.5));
    }
  }
  for (int j = 1; j <= p; ++j) CHECK(npgraph_fit_basis_count(fit, j) == 4);
  CHECK(npgraph_fit_basis_count(fit, 0) == 0);
  CHECK(npgraph_fit_basis_count(fit, p + 1) == 0);
  double c0 = 0, b0 = 0, b1 = 0;
  REQUIRE(npgraph_fit_selected_hyper(fit, &c0, &b0, &b1) == NPGRAPH_OK);
  CHECK(c0 == 0.02);
  CHECK(b0 == 1.0);
  CHECK(b1 == 1.0);
  npgraph_fit_free(fit);
}

TEST_CASE("fit rejects out-of-range data with a data code") {
  const int n = 30, p = 2;
  std::vector<double> data = toy_data(n, p);
  data[5] = 2.0;
  npgraph_fit* fit = nullptr;
  npgraph_status* status = nullptr;
  const char* cfg = "{\"seed\": 1, \"chain\": {\"burn\": 2, \"keep\": 2, \"basis_counts\": [4, 4]}}";
  const int rc = npgraph_fit_create(data.data(), n, p, cfg, &fit, &status);
  CHECK(rc == NPGRAPH_ERR_DATA);
  CHECK(fit == nullptr);
  REQUIRE(status != nullptr);
  npgraph_status_free(status);
}

TEST_CASE("fit validates pointers and shapes") {
  npgraph_fit* fit = nullptr;
  CHECK(npgraph_fit_create(nullptr, 10, 2, "{\"seed\":1}", &fit, nullptr) ==
        NPGRAPH_ERR_INVALID_ARGUMENT);
  const std::vector<double> data = toy_data(10, 2);
  CHECK(npgraph_fit_create(data.data(), 0, 2, "{\"seed\":1}", &fit, nullptr) ==
        NPGRAPH_ERR_INVALID_ARGUMENT);
  CHECK(npgraph_fit_create(data.data(), 10, 2, "{\"seed\":1}", nullptr, nullptr) ==
        NPGRAPH_ERR_INVALID_ARGUMENT);
  // Null handle queries fail without crashing.
  CHECK(npgraph_fit_dim(nullptr) == 0);
  double buf[4];
  CHECK(npgraph_fit_edge_mean(nullptr, buf) == NPGRAPH_ERR_INVALID_ARGUMENT);
  npgraph_fit_free(nullptr);  // no-op
}
