// rtpref command-line driver. All work goes through the C API.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rtpref/rtpref.h"

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> model;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_train;
  std::optional<std::string> out;
  std::optional<double> tol;
  std::optional<std::string> input;
  std::optional<std::string> truth;
  std::optional<std::size_t> n;
  std::optional<std::size_t> agents;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON configuration file");
  cmd->add_option("--model", f.model, "ddm | ddm-choice-only | lnr | extended-ddm");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--n-train", f.n_train, "training rows per agent");
  cmd->add_option("--out", f.out, "output file or directory");
  cmd->add_option("--tol", f.tol, "series truncation tolerance");
}

std::string overrides(const Flags& f) {
  nlohmann::json j = nlohmann::json::object();
  if (f.model) j["model"] = *f.model;
  if (f.seed) j["seed"] = *f.seed;
  if (f.n_train) j["n_train"] = *f.n_train;
  if (f.out) j["out"] = *f.out;
  if (f.tol) j["tol"] = *f.tol;
  if (f.input) j["input"] = *f.input;
  if (f.truth) j["truth"] = *f.truth;
  if (f.n) j["n"] = *f.n;
  if (f.agents) j["agents"] = *f.agents;
  return j.dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preference learning from choices and response times"};
  app.require_subcommand(1);
  Flags f;

  auto* simulate = app.add_subcommand("simulate", "write a synthetic dataset as CSV");
  add_common(simulate, f);
  simulate->add_option("-n,--n", f.n, "rows per agent");
  simulate->add_option("--agents", f.agents, "number of agents");
  simulate->add_option("--truth", f.truth, "also write the generating parameters as JSON");

  auto* fit = app.add_subcommand("fit", "fit one model per agent and report estimates as JSON");
  add_common(fit, f);
  fit->add_option("input,--input", f.input, "CSV dataset");

  auto* evaluate = app.add_subcommand("evaluate", "train/test comparison of the DDM, logit and race models");
  add_common(evaluate, f);
  evaluate->add_option("input,--input", f.input, "CSV dataset");
  evaluate->add_option("--truth", f.truth, "known per-agent DDM parameters; skips DDM fitting");

  auto* identity = app.add_subcommand("identity-check", "check the closed-form identities and bounds");
  add_common(identity, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const char* config = f.config.empty() ? nullptr : f.config.c_str();
  const std::string extra = overrides(f);
  char* output = nullptr;
  rtpref_status st = RTPREF_ERR_INTERNAL;
  if (simulate->parsed()) {
    st = rtpref_cmd_simulate(config, extra.c_str(), &output);
  } else if (fit->parsed()) {
    st = rtpref_cmd_fit(config, extra.c_str(), &output);
  } else if (evaluate->parsed()) {
    st = rtpref_cmd_evaluate(config, extra.c_str(), &output);
  } else if (identity->parsed()) {
    st = rtpref_cmd_identity_check(config, extra.c_str(), &output);
  }

  if (output != nullptr) {
    std::fputs(output, stdout);
    rtpref_string_free(output);
  }
  if (st == RTPREF_OK) return 0;
  std::fprintf(stderr, "error: %s\n", rtpref_last_error());
  return st == RTPREF_ERR_NUMERICAL ? 2 : 1;
}
