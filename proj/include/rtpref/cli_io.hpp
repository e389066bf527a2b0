#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rtpref/types.hpp"

namespace rtpref::io {

// ---------------------------------------------------------------------------
// CSV: agent_id,x_1,...,x_d,y_1,...,y_d,choice,rt

struct AgentRows {
  std::string agent_id;
  std::vector<Observation> rows;
};

struct AgentData {
  std::string agent_id;
  Dataset data;
};

std::string csv_header(std::size_t d);

/// Agents in order of first appearance; rows keep file order. Errors carry
/// the 1-based line number.
std::vector<AgentData> parse_csv(std::istream& in, const std::string& source = "<input>");
std::vector<AgentData> parse_csv(const std::string& path);

void write_csv(std::ostream& out, std::size_t d, const std::vector<AgentRows>& agents);
void write_csv(const std::string& path, std::size_t d, const std::vector<AgentRows>& agents);

/// Shortest decimal that round-trips.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Run configuration

enum class ModelKind { kDdm, kDdmChoiceOnly, kLnr, kExtendedDdm };

ModelKind parse_model(const std::string& name);
std::string model_name(ModelKind m);

/// Parameters for all commands. Loaded from a JSON object whose keys are the
/// field names below; unknown keys are rejected.
struct RunConfig {
  ModelKind model = ModelKind::kDdm;
  std::uint64_t seed = 0;
  std::size_t n_train = 100;
  std::optional<double> sgd_lambda;
  int sgd_passes = 1;
  std::string solver = "exact";  // exact | sgd, for RT-trained DDM fits
  double logistic_reg = 1e-4;
  int lnr_restarts = 8;
  double tol = 1e-12;  // series truncation tolerance

  std::string input;  // CSV for fit / evaluate
  std::string out;    // file (simulate, fit) or directory (evaluate)
  std::string truth;  // per-agent parameters JSON, enables oracle evaluation

  // simulate
  std::string population = "fixed";  // fixed | heterogeneous
  std::size_t agents = 1;
  std::size_t n = 1000;  // rows per agent
  std::size_t d = 2;
  std::vector<double> w{1.0, -1.0};
  double b = 1.0;
  double start_halfwidth = 0.0;  // extended-ddm uniform start
  double dt = 0.0;               // extended-ddm step; 0 means 1e-4 b^2
  double d0 = 0.0;
  double rho = 0.0;
  std::string design = "box";  // box | dated-rewards
  double low = 0.0;
  double high = 1.0;
  double amount = 10.0;
  double delay_max = 30.0;

  void validate() const;
};

/// Applies the keys of a JSON object text to cfg.
void apply_json(RunConfig& cfg, const std::string& json_text, const std::string& source);
RunConfig load_config(const std::string& path);

// ---------------------------------------------------------------------------
// Commands. Each returns the text to print on stdout. Validation problems
// throw ValidationError, numerical failures NumericalError.

std::string cmd_simulate(const RunConfig& cfg);
std::string cmd_fit(const RunConfig& cfg);
std::string cmd_evaluate(const RunConfig& cfg);
std::string cmd_identity_check(const RunConfig& cfg);

}  // namespace rtpref::io
