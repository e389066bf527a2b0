#include "rtpref/cli_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include <boost/math/quadrature/exp_sinh.hpp>
#include "json.hpp"

#include "rtpref/ddm_math.hpp"
#include "rtpref/errors.hpp"
#include "rtpref/estimators.hpp"
#include "rtpref/evaluation.hpp"
#include "rtpref/parallel.hpp"
#include "rtpref/random.hpp"
#include "rtpref/simulators.hpp"

namespace rtpref::io {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string line_msg(const std::string& source, std::size_t line, const std::string& what) {
  return source + ":" + std::to_string(line) + ": " + what;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ValidationError("cannot open " + path + " for writing");
  return f;
}

void write_text(const std::string& path, const std::string& text) {
  auto f = open_out(path);
  f << text;
  if (!f) throw ValidationError("failed writing " + path);
}

json to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

std::vector<std::size_t> order_by_id(const std::vector<AgentData>& agents) {
  std::vector<std::size_t> idx(agents.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return agents[a].agent_id < agents[b].agent_id; });
  return idx;
}

const char* kind_name(const Error& e) { return e.kind() == ErrorKind::kNumerical ? "numerical" : "validation"; }

// Per-agent outcome: either a JSON payload or an error.
struct AgentOutcome {
  bool ok = false;
  std::string error_kind;
  std::string message;
};

template <class Fn>
AgentOutcome guarded(Fn&& fn) {
  AgentOutcome out;
  try {
    fn();
    out.ok = true;
  } catch (const Error& e) {
    out.error_kind = kind_name(e);
    out.message = e.what();
  } catch (const std::exception& e) {
    out.error_kind = "numerical";
    out.message = e.what();
  }
  return out;
}

std::vector<AgentData> load_input(const RunConfig& cfg) {
  if (cfg.input.empty()) throw ValidationError("no input CSV given (set \"input\")");
  return parse_csv(cfg.input);
}

std::map<std::string, DdmParams> load_truth(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open truth file " + path);
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  std::map<std::string, DdmParams> out;
  try {
    for (const auto& a : doc.at("agents")) {
      DdmParams p;
      const auto w = a.at("w").get<std::vector<double>>();
      p.w = Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
      p.b = a.at("b").get<double>();
      p.validate();
      out[a.at("agent_id").get<std::string>()] = p;
    }
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return out;
}

est::SgdConfig sgd_config(const RunConfig& cfg) {
  est::SgdConfig sgd;
  sgd.lambda = cfg.sgd_lambda;
  sgd.passes = cfg.sgd_passes;
  return sgd;
}

std::string dist_csv_row(const std::vector<double>& cols) {
  std::string line;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) line += ',';
    line += format_double(cols[i]);
  }
  return line + '\n';
}

json dist_json(const eval::Distribution& d) {
  return json{{"count", d.count}, {"mean", d.count ? json(d.mean) : json(nullptr)}};
}

}  // namespace

// ---------------------------------------------------------------------------
// CSV

std::string csv_header(std::size_t d) {
  std::string h = "agent_id";
  for (std::size_t j = 1; j <= d; ++j) h += ",x_" + std::to_string(j);
  for (std::size_t j = 1; j <= d; ++j) h += ",y_" + std::to_string(j);
  return h + ",choice,rt";
}

std::vector<AgentData> parse_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ValidationError(source + ": missing header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header;
  for (const auto f : split_fields(line)) header.emplace_back(f);
  if (header.size() < 5 || (header.size() - 3) % 2 != 0) {
    throw ValidationError(line_msg(source, 1, "header must be agent_id,x_1..x_d,y_1..y_d,choice,rt"));
  }
  const std::size_t d = (header.size() - 3) / 2;
  if (line != csv_header(d)) {
    throw ValidationError(line_msg(source, 1, "header mismatch; expected \"" + csv_header(d) + "\""));
  }

  std::vector<AgentRows> groups;
  std::unordered_map<std::string, std::size_t> index;
  const auto n_dim = static_cast<Eigen::Index>(d);

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != header.size()) {
      throw ValidationError(line_msg(source, line_no,
                                     "expected " + std::to_string(header.size()) + " fields, got " +
                                         std::to_string(f.size())));
    }
    if (f[0].empty()) throw ValidationError(line_msg(source, line_no, "empty agent_id"));

    Observation obs{Vector(n_dim), Vector(n_dim), 1, 0.0};
    for (std::size_t j = 0; j < 2 * d; ++j) {
      const auto v = parse_double(f[1 + j]);
      if (!v || !std::isfinite(*v)) {
        throw ValidationError(line_msg(source, line_no, "bad value in column " + header[1 + j]));
      }
      (j < d ? obs.x : obs.y)[static_cast<Eigen::Index>(j % d)] = *v;
    }
    const auto choice = parse_double(f[2 * d + 1]);
    if (!choice || (*choice != 1.0 && *choice != -1.0)) {
      throw ValidationError(line_msg(source, line_no, "choice must be -1 or 1"));
    }
    obs.z = *choice > 0 ? 1 : -1;
    const auto rt = parse_double(f[2 * d + 2]);
    if (!rt || !std::isfinite(*rt) || *rt <= 0.0) {
      throw ValidationError(line_msg(source, line_no, "rt must be a positive number"));
    }
    obs.t = *rt;

    const std::string id(f[0]);
    auto [it, inserted] = index.try_emplace(id, groups.size());
    if (inserted) groups.push_back({id, {}});
    groups[it->second].rows.push_back(std::move(obs));
  }
  if (in.bad()) throw ValidationError(source + ": read error");

  std::vector<AgentData> out;
  out.reserve(groups.size());
  for (auto& g : groups) out.push_back({g.agent_id, build_dataset(std::move(g.rows))});
  return out;
}

std::vector<AgentData> parse_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open " + path);
  return parse_csv(f, path);
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw NumericalError("number formatting failed");
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, std::size_t d, const std::vector<AgentRows>& agents) {
  out << csv_header(d) << '\n';
  std::string line;
  for (const auto& a : agents) {
    for (const auto& r : a.rows) {
      if (static_cast<std::size_t>(r.x.size()) != d || static_cast<std::size_t>(r.y.size()) != d) {
        throw ValidationError("write_csv: row dimension does not match header");
      }
      line = a.agent_id;
      for (Eigen::Index j = 0; j < r.x.size(); ++j) line += ',' + format_double(r.x[j]);
      for (Eigen::Index j = 0; j < r.y.size(); ++j) line += ',' + format_double(r.y[j]);
      line += r.z > 0 ? ",1," : ",-1,";
      line += format_double(r.t);
      out << line << '\n';
    }
  }
}

void write_csv(const std::string& path, std::size_t d, const std::vector<AgentRows>& agents) {
  auto f = open_out(path);
  write_csv(f, d, agents);
  if (!f) throw ValidationError("failed writing " + path);
}

// ---------------------------------------------------------------------------
// Configuration

ModelKind parse_model(const std::string& name) {
  if (name == "ddm") return ModelKind::kDdm;
  if (name == "ddm-choice-only") return ModelKind::kDdmChoiceOnly;
  if (name == "lnr") return ModelKind::kLnr;
  if (name == "extended-ddm") return ModelKind::kExtendedDdm;
  throw ValidationError("unknown model \"" + name + "\" (ddm, ddm-choice-only, lnr, extended-ddm)");
}

std::string model_name(ModelKind m) {
  switch (m) {
    case ModelKind::kDdm:
      return "ddm";
    case ModelKind::kDdmChoiceOnly:
      return "ddm-choice-only";
    case ModelKind::kLnr:
      return "lnr";
    case ModelKind::kExtendedDdm:
      return "extended-ddm";
  }
  return "ddm";
}

void RunConfig::validate() const {
  if (n_train < 1) throw ValidationError("n_train must be at least 1");
  if (sgd_lambda && !(*sgd_lambda > 0.0)) throw ValidationError("sgd_lambda must be positive");
  if (sgd_passes < 1) throw ValidationError("sgd_passes must be at least 1");
  if (solver != "exact" && solver != "sgd") throw ValidationError("solver must be \"exact\" or \"sgd\"");
  if (!(logistic_reg >= 0.0)) throw ValidationError("logistic_reg must be nonnegative");
  if (lnr_restarts < 1) throw ValidationError("lnr_restarts must be at least 1");
  if (!(tol > 0.0 && tol < 1.0)) throw ValidationError("tol must lie in (0, 1)");
  if (population != "fixed" && population != "heterogeneous") {
    throw ValidationError("population must be \"fixed\" or \"heterogeneous\"");
  }
  if (agents < 1) throw ValidationError("agents must be at least 1");
  if (d < 1) throw ValidationError("d must be at least 1");
  if (design != "box" && design != "dated-rewards") throw ValidationError("design must be \"box\" or \"dated-rewards\"");
  if (!(b > 0.0) || !std::isfinite(b)) throw ValidationError("b must be positive");
  if (!(std::abs(rho) < 1.0)) throw ValidationError("rho must satisfy |rho| < 1");
}

void apply_json(RunConfig& cfg, const std::string& json_text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(source + ": " + e.what());
  }
  if (!doc.is_object()) throw ValidationError(source + ": configuration must be a JSON object");

  for (const auto& [key, val] : doc.items()) {
    try {
      if (key == "model") {
        cfg.model = parse_model(val.get<std::string>());
      } else if (key == "seed") {
        cfg.seed = val.get<std::uint64_t>();
      } else if (key == "n_train") {
        cfg.n_train = val.get<std::size_t>();
      } else if (key == "sgd_lambda") {
        if (val.is_null()) {
          cfg.sgd_lambda.reset();
        } else {
          cfg.sgd_lambda = val.get<double>();
        }
      } else if (key == "sgd_passes") {
        cfg.sgd_passes = val.get<int>();
      } else if (key == "solver") {
        cfg.solver = val.get<std::string>();
      } else if (key == "logistic_reg") {
        cfg.logistic_reg = val.get<double>();
      } else if (key == "lnr_restarts") {
        cfg.lnr_restarts = val.get<int>();
      } else if (key == "tol") {
        cfg.tol = val.get<double>();
      } else if (key == "input") {
        cfg.input = val.get<std::string>();
      } else if (key == "out") {
        cfg.out = val.get<std::string>();
      } else if (key == "truth") {
        cfg.truth = val.get<std::string>();
      } else if (key == "population") {
        cfg.population = val.get<std::string>();
      } else if (key == "agents") {
        cfg.agents = val.get<std::size_t>();
      } else if (key == "n") {
        cfg.n = val.get<std::size_t>();
      } else if (key == "d") {
        cfg.d = val.get<std::size_t>();
      } else if (key == "w") {
        cfg.w = val.get<std::vector<double>>();
      } else if (key == "b") {
        cfg.b = val.get<double>();
      } else if (key == "start_halfwidth") {
        cfg.start_halfwidth = val.get<double>();
      } else if (key == "dt") {
        cfg.dt = val.get<double>();
      } else if (key == "d0") {
        cfg.d0 = val.get<double>();
      } else if (key == "rho") {
        cfg.rho = val.get<double>();
      } else if (key == "design") {
        cfg.design = val.get<std::string>();
      } else if (key == "low") {
        cfg.low = val.get<double>();
      } else if (key == "high") {
        cfg.high = val.get<double>();
      } else if (key == "amount") {
        cfg.amount = val.get<double>();
      } else if (key == "delay_max") {
        cfg.delay_max = val.get<double>();
      } else {
        throw ValidationError(source + ": unknown key \"" + key + "\"");
      }
    } catch (const json::exception& e) {
      throw ValidationError(source + ": bad value for \"" + key + "\": " + e.what());
    }
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  RunConfig cfg;
  apply_json(cfg, ss.str(), path);
  return cfg;
}

// ---------------------------------------------------------------------------
// simulate

std::string cmd_simulate(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.out.empty()) throw ValidationError("simulate needs an output path (--out)");

  std::vector<AgentRows> agents(cfg.agents);
  json truth = json::array();
  std::size_t d = cfg.d;

  if (cfg.population == "heterogeneous") {
    if (cfg.model != ModelKind::kDdm && cfg.model != ModelKind::kDdmChoiceOnly) {
      throw ValidationError("heterogeneous populations are generated from the DDM");
    }
    eval::PopulationOptions popts;
    popts.design.amount = cfg.amount;
    popts.design.delay_max = cfg.delay_max;
    auto pop = eval::heterogeneous_population(cfg.agents, cfg.n, cfg.seed, popts);
    d = 2;
    for (std::size_t j = 0; j < pop.size(); ++j) {
      truth.push_back({{"agent_id", pop[j].agent_id}, {"w", to_json(pop[j].truth.w)}, {"b", pop[j].truth.b}});
      agents[j] = {pop[j].agent_id, std::move(pop[j].rows)};
    }
  } else {
    if (cfg.w.size() != cfg.d) {
      throw ValidationError("w has " + std::to_string(cfg.w.size()) + " entries but d = " + std::to_string(cfg.d));
    }
    sim::SimulationSpec spec;
    spec.d = cfg.d;
    const Vector w = Eigen::Map<const Vector>(cfg.w.data(), static_cast<Eigen::Index>(cfg.w.size()));
    switch (cfg.model) {
      case ModelKind::kDdm:
      case ModelKind::kDdmChoiceOnly:
        spec.model = sim::Model::kDdm;
        break;
      case ModelKind::kExtendedDdm:
        spec.model = sim::Model::kExtendedDdm;
        spec.start = sim::StartDistribution::uniform(cfg.start_halfwidth);
        spec.dt = cfg.dt;
        break;
      case ModelKind::kLnr:
        spec.model = sim::Model::kLnr;
        break;
    }
    spec.ddm = DdmParams{w, cfg.b};
    spec.lnr = LnrParams{w, cfg.d0, cfg.rho};
    if (cfg.design == "dated-rewards") {
      spec.design.kind = sim::AlternativeDesign::Kind::kDatedRewards;
      spec.design.amount = cfg.amount;
      spec.design.delay_max = cfg.delay_max;
    } else {
      spec.design.low = cfg.low;
      spec.design.high = cfg.high;
    }
    spec.validate();
    for (std::size_t j = 0; j < cfg.agents; ++j) {
      const std::string id = eval::agent_name(j, cfg.agents);
      agents[j] = {id, sim::simulate_rows(spec, cfg.n, derive_seed(cfg.seed, j))};
      json entry{{"agent_id", id}, {"w", cfg.w}};
      if (cfg.model == ModelKind::kLnr) {
        entry["d0"] = cfg.d0;
        entry["rho"] = cfg.rho;
      } else {
        entry["b"] = cfg.b;
      }
      truth.push_back(std::move(entry));
    }
  }

  write_csv(cfg.out, d, agents);
  std::string msg = "wrote " + std::to_string(cfg.agents * cfg.n) + " rows for " + std::to_string(cfg.agents) +
                    " agent(s) to " + cfg.out + "\n";
  if (!cfg.truth.empty()) {
    json doc{{"model", model_name(cfg.model)}, {"seed", cfg.seed}, {"agents", truth}};
    write_text(cfg.truth, doc.dump(2) + "\n");
    msg += "wrote parameters to " + cfg.truth + "\n";
  }
  return msg;
}

// ---------------------------------------------------------------------------
// fit

std::string cmd_fit(const RunConfig& cfg) {
  cfg.validate();
  const auto agents = load_input(cfg);
  std::vector<json> reports(agents.size());
  std::vector<AgentOutcome> outcomes(agents.size());

  parallel_for(agents.size(), [&](std::size_t i) {
    const Dataset& ds = agents[i].data;
    json& r = reports[i];
    outcomes[i] = guarded([&] {
      switch (cfg.model) {
        case ModelKind::kDdm:
        case ModelKind::kExtendedDdm: {
          const FitReport fit =
              cfg.solver == "sgd" ? est::fit_ddm_sgd(ds, sgd_config(cfg)) : est::fit_ddm_exact(ds);
          r["u_hat"] = to_json(fit.estimate);
          r["loss"] = fit.final_loss;
          if (cfg.model == ModelKind::kDdm) {
            // The start-point distribution of the extended model changes E[t],
            // so b is only recovered for the plain DDM.
            const double b_hat = est::recover_b_moment_match(fit.estimate, ds);
            r["b_hat"] = b_hat;
            r["w_hat"] = to_json(b_hat * fit.estimate);
          }
          break;
        }
        case ModelKind::kDdmChoiceOnly: {
          const Vector m = est::fit_logistic(ds, cfg.logistic_reg);
          r["m_hat"] = to_json(m);
          r["loss"] = est::logistic_loss(ds, m, cfg.logistic_reg);
          break;
        }
        case ModelKind::kLnr: {
          est::LnrFitOptions opts;
          opts.fix_d0 = false;
          opts.fix_rho = true;
          opts.restarts = cfg.lnr_restarts;
          opts.seed = derive_seed(cfg.seed, i);
          opts.require_stationarity = false;
          LnrParams init{Vector::Zero(static_cast<Eigen::Index>(ds.dim())), cfg.d0, cfg.rho};
          const FitReport fit = est::fit_lnr(ds, init, opts);
          r["w_hat"] = to_json(fit.estimate);
          r["d0"] = fit.lnr->d0;
          r["rho"] = fit.lnr->rho;
          r["loss"] = fit.final_loss;
          r["converged"] = fit.converged;
          r["grad_norm"] = fit.grad_norm;
          break;
        }
      }
    });
  });

  json list = json::array();
  std::size_t failed = 0;
  for (std::size_t i : order_by_id(agents)) {
    json entry{{"agent_id", agents[i].agent_id}, {"n", agents[i].data.size()}};
    if (outcomes[i].ok) {
      entry["status"] = "ok";
      entry.update(reports[i]);
    } else {
      ++failed;
      entry["status"] = "error";
      entry["error_kind"] = outcomes[i].error_kind;
      entry["message"] = outcomes[i].message;
    }
    list.push_back(std::move(entry));
  }
  const json doc{{"model", model_name(cfg.model)}, {"agents", list}};
  const std::string text = doc.dump(2) + "\n";
  if (failed == agents.size()) {
    throw NumericalError("fit failed for every agent; first error: " + outcomes.front().message);
  }
  if (cfg.out.empty()) return text;
  write_text(cfg.out, text);
  return "fitted " + std::to_string(agents.size() - failed) + " of " + std::to_string(agents.size()) +
         " agent(s); report in " + cfg.out + "\n";
}

// ---------------------------------------------------------------------------
// evaluate

std::string cmd_evaluate(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.out.empty()) throw ValidationError("evaluate needs an output directory (--out)");
  const auto agents = load_input(cfg);
  std::optional<std::map<std::string, DdmParams>> truth;
  if (!cfg.truth.empty()) truth = load_truth(cfg.truth);

  eval::EvaluationOptions opts;
  opts.n_train = cfg.n_train;
  opts.solver = cfg.solver == "sgd" ? eval::DdmSolver::kSgd : eval::DdmSolver::kExact;
  opts.sgd = sgd_config(cfg);
  opts.logistic_reg = cfg.logistic_reg;
  opts.lnr.restarts = cfg.lnr_restarts;

  std::vector<eval::AgentResult> results(agents.size());
  std::vector<AgentOutcome> outcomes(agents.size());
  parallel_for(agents.size(), [&](std::size_t i) {
    outcomes[i] = guarded([&] {
      std::optional<DdmParams> oracle;
      if (truth) {
        const auto it = truth->find(agents[i].agent_id);
        if (it == truth->end()) throw ValidationError("no parameters for agent " + agents[i].agent_id);
        oracle = it->second;
      }
      eval::EvaluationOptions local = opts;
      local.lnr.seed = derive_seed(cfg.seed, i);
      results[i] = eval::evaluate_agent(agents[i].agent_id, agents[i].data, local, oracle);
    });
  });

  std::error_code ec;
  fs::create_directories(cfg.out, ec);
  if (ec) throw ValidationError("cannot create output directory " + cfg.out + ": " + ec.message());
  const fs::path dir(cfg.out);

  std::vector<eval::AgentResult> ok;
  json failures = json::array();
  std::ostringstream table;
  table << "agent_id,n_train,n_test,error_rate_ddm_rt,error_rate_ddm_choice_only,error_rate_lnr,miscoverage,"
           "discount_ddm_rt,discount_choice_only,discount_ratio,discount_flag,b_hat,status\n";
  for (std::size_t i : order_by_id(agents)) {
    if (!outcomes[i].ok) {
      failures.push_back({{"agent_id", agents[i].agent_id},
                          {"error_kind", outcomes[i].error_kind},
                          {"message", outcomes[i].message}});
      table << agents[i].agent_id << ",,,,,,,,,,,,error\n";
      continue;
    }
    const auto& r = results[i];
    const auto num = [](double v) { return std::isfinite(v) ? format_double(v) : std::string(); };
    table << r.agent_id << ',' << r.n_train << ',' << r.n_test << ',' << num(r.error_rate_ddm_rt) << ','
          << num(r.error_rate_ddm_choice_only) << ',' << num(r.error_rate_lnr) << ',' << num(r.miscoverage) << ','
          << num(r.discount_ddm_rt) << ',' << num(r.discount_choice_only) << ',' << num(r.discount_ratio) << ','
          << (r.discount_valid ? "ok" : "nonpositive_money_weight") << ',' << num(r.b_hat) << ",ok\n";
    ok.push_back(r);
  }
  write_text((dir / "agents.csv").string(), table.str());
  if (ok.empty()) throw NumericalError("evaluation failed for every agent; first error: " + outcomes.front().message);

  const eval::Summary s = eval::summarize(ok);

  std::string cdf = "error_rate,ddm_rt,ddm_choice_only,lnr\n";
  for (std::size_t k = 0; k < s.error_rate_ddm_rt.grid.size(); ++k) {
    cdf += dist_csv_row({s.error_rate_ddm_rt.grid[k], s.error_rate_ddm_rt.cdf[k],
                         s.error_rate_ddm_choice_only.cdf[k], s.error_rate_lnr.cdf[k]});
  }
  write_text((dir / "error_rate_cdf.csv").string(), cdf);

  std::string hist = "bin_low,bin_high,count\n";
  for (std::size_t k = 0; k < s.miscoverage.bin_counts.size(); ++k) {
    hist += format_double(s.miscoverage.bin_edges[k]) + ',' + format_double(s.miscoverage.bin_edges[k + 1]) + ',' +
            std::to_string(s.miscoverage.bin_counts[k]) + '\n';
  }
  write_text((dir / "miscoverage_hist.csv").string(), hist);

  std::string ratio = "discount_ratio,cdf\n";
  for (std::size_t k = 0; k < s.discount_ratio.grid.size(); ++k) {
    ratio += dist_csv_row({s.discount_ratio.grid[k], s.discount_ratio.cdf[k]});
  }
  write_text((dir / "discount_ratio_cdf.csv").string(), ratio);

  const json summary{{"agents", s.agents},
                     {"failed_agents", failures},
                     {"n_train", cfg.n_train},
                     {"oracle", truth.has_value()},
                     {"error_rate_ddm_rt", dist_json(s.error_rate_ddm_rt)},
                     {"error_rate_ddm_choice_only", dist_json(s.error_rate_ddm_choice_only)},
                     {"error_rate_lnr", dist_json(s.error_rate_lnr)},
                     {"miscoverage", dist_json(s.miscoverage)},
                     {"discount_ratio", dist_json(s.discount_ratio)},
                     {"discount_excluded", s.discount_excluded},
                     {"fraction_discount_ratio_above_one", s.fraction_discount_ratio_above_one}};
  write_text((dir / "summary.json").string(), summary.dump(2) + "\n");

  std::ostringstream msg;
  msg << "agents evaluated: " << s.agents << " (failed: " << failures.size() << ")\n"
      << "mean error rate  ddm-rt " << format_double(s.error_rate_ddm_rt.mean) << "  ddm-choice-only "
      << format_double(s.error_rate_ddm_choice_only.mean) << "  lnr " << format_double(s.error_rate_lnr.mean) << '\n'
      << "mean miscoverage " << format_double(s.miscoverage.mean) << '\n'
      << "tables written to " << cfg.out << '\n';
  return msg.str();
}

// ---------------------------------------------------------------------------
// identity-check

std::string cmd_identity_check(const RunConfig& cfg) {
  cfg.validate();
  constexpr std::size_t kGrid = 10000;
  constexpr double kBetaMax = 20.0;
  constexpr double kIdentityTol = 1e-10;
  constexpr double kGapTol = -1e-14;
  constexpr double kRatioBound = 0.6 - 1e-12;
  constexpr double kMassTol = 1e-8;

  double max_resid = 0.0, min_gap = INFINITY, min_ratio = INFINITY;
  double at_resid = 0.0, at_gap = 0.0, at_ratio = 0.0;
  for (std::size_t i = 0; i < kGrid; ++i) {
    const double beta = -kBetaMax + 2.0 * kBetaMax * static_cast<double>(i) / (kGrid - 1);
    const double r = std::abs(ddm::check_hyperbolic_identity(beta));
    const double g = ddm::tanh_lower_bound_gap(beta);
    const double q = ddm::time_moment_ratio(beta);
    if (r > max_resid) max_resid = r, at_resid = beta;
    if (g < min_gap) min_gap = g, at_gap = beta;
    if (q < min_ratio) min_ratio = q, at_ratio = beta;
  }

  // Total mass of the response-time density under the configured series tolerance.
  const ddm::SeriesControl ctrl{cfg.tol, 200};
  boost::math::quadrature::exp_sinh<double> integrator;
  double max_mass_err = 0.0;
  std::ostringstream mass_lines;
  for (const auto& [v, b] : {std::pair{0.0, 1.0}, {1.0, 1.0}, {2.0, 0.5}, {-1.0, 2.0}}) {
    const double mass = integrator.integrate([&](double t) { return t > 0.0 ? ddm::rt_density(t, v, b, ctrl) : 0.0; });
    max_mass_err = std::max(max_mass_err, std::abs(mass - 1.0));
    mass_lines << "  density mass (v=" << format_double(v) << ", b=" << format_double(b) << "): "
               << format_double(mass) << '\n';
  }

  const bool pass_identity = max_resid < kIdentityTol;
  const bool pass_gap = min_gap >= kGapTol;
  const bool pass_ratio = min_ratio >= kRatioBound;
  const bool pass_mass = max_mass_err < kMassTol;

  std::ostringstream out;
  out << "beta grid: " << kGrid << " points on [" << -kBetaMax << ", " << kBetaMax << "]\n"
      << (pass_identity ? "PASS" : "FAIL") << "  hyperbolic identity  max |residual| = " << format_double(max_resid)
      << " at beta = " << format_double(at_resid) << "\n"
      << (pass_gap ? "PASS" : "FAIL") << "  tanh(b)/b >= 1/sqrt(1+b^2)  min gap = " << format_double(min_gap)
      << " at beta = " << format_double(at_gap) << "\n"
      << (pass_ratio ? "PASS" : "FAIL") << "  b^2 E[t] / E[t^2] >= 0.6  min = " << format_double(min_ratio)
      << " at beta = " << format_double(at_ratio) << "\n"
      << (pass_mass ? "PASS" : "FAIL") << "  density integrates to 1  max error = " << format_double(max_mass_err)
      << " (tol " << format_double(cfg.tol) << ")\n"
      << mass_lines.str();

  if (!cfg.out.empty()) {
    const json doc{{"grid_points", kGrid},
                   {"max_identity_residual", max_resid},
                   {"min_tanh_gap", min_gap},
                   {"min_moment_ratio", min_ratio},
                   {"max_density_mass_error", max_mass_err},
                   {"pass", pass_identity && pass_gap && pass_ratio && pass_mass}};
    write_text(cfg.out, doc.dump(2) + "\n");
  }
  if (!(pass_identity && pass_gap && pass_ratio && pass_mass)) throw NumericalError(out.str() + "identity check failed");
  return out.str();
}

}  // namespace rtpref::io
