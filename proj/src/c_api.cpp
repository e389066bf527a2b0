#include "rtpref/rtpref.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "rtpref/cli_io.hpp"
#include "rtpref/ddm_math.hpp"
#include "rtpref/errors.hpp"
#include "rtpref/estimators.hpp"
#include "rtpref/lnr_math.hpp"
#include "rtpref/simulators.hpp"

struct rtpref_dataset {
  rtpref::Dataset data;
};

namespace {

thread_local std::string g_last_error;

template <class Fn>
rtpref_status guard(Fn&& fn) noexcept {
  try {
    fn();
    g_last_error.clear();
    return RTPREF_OK;
  } catch (const rtpref::Error& e) {
    g_last_error = e.what();
    return e.kind() == rtpref::ErrorKind::kNumerical ? RTPREF_ERR_NUMERICAL : RTPREF_ERR_VALIDATION;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RTPREF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RTPREF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return RTPREF_ERR_INTERNAL;
  }
}

template <class T>
void require(const T* p, const char* name) {
  if (p == nullptr) throw rtpref::ValidationError(std::string(name) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void copy_out(const rtpref::Vector& v, double* out) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[i];
}

using Command = std::string (*)(const rtpref::io::RunConfig&);

rtpref_status run_command(Command cmd, const char* config_path, const char* overrides_json, char** output) {
  if (output != nullptr) *output = nullptr;
  std::string text;
  const rtpref_status st = guard([&] {
    rtpref::io::RunConfig cfg = config_path ? rtpref::io::load_config(config_path) : rtpref::io::RunConfig{};
    if (overrides_json != nullptr) rtpref::io::apply_json(cfg, overrides_json, "command line");
    text = cmd(cfg);
  });
  if (st == RTPREF_OK && output != nullptr) {
    const rtpref_status copy = guard([&] { *output = dup_string(text); });
    if (copy != RTPREF_OK) return copy;
  }
  return st;
}

}  // namespace

extern "C" {

const char* rtpref_last_error(void) { return g_last_error.c_str(); }

const char* rtpref_version(void) { return "1.0.0"; }

rtpref_status rtpref_dataset_create(size_t n, size_t d, const double* x, const double* y, const int* z,
                                    const double* t, rtpref_dataset** out) {
  return guard([&] {
    require(out, "out");
    *out = nullptr;
    require(x, "x");
    require(y, "y");
    require(z, "z");
    require(t, "t");
    std::vector<rtpref::Observation> rows(n);
    const auto dim = static_cast<Eigen::Index>(d);
    for (size_t i = 0; i < n; ++i) {
      rows[i].x = Eigen::Map<const rtpref::Vector>(x + i * d, dim);
      rows[i].y = Eigen::Map<const rtpref::Vector>(y + i * d, dim);
      rows[i].z = z[i];
      rows[i].t = t[i];
    }
    *out = new rtpref_dataset{rtpref::build_dataset(std::move(rows))};
  });
}

rtpref_status rtpref_dataset_load_csv(const char* path, const char* agent_id, rtpref_dataset** out) {
  return guard([&] {
    require(out, "out");
    *out = nullptr;
    require(path, "path");
    auto agents = rtpref::io::parse_csv(std::string(path));
    if (agent_id == nullptr) {
      if (agents.size() != 1) throw rtpref::ValidationError("file holds several agents; pass an agent_id");
      *out = new rtpref_dataset{std::move(agents.front().data)};
      return;
    }
    for (auto& a : agents) {
      if (a.agent_id == agent_id) {
        *out = new rtpref_dataset{std::move(a.data)};
        return;
      }
    }
    throw rtpref::ValidationError(std::string("agent ") + agent_id + " not found in " + path);
  });
}

rtpref_status rtpref_dataset_shape(const rtpref_dataset* ds, size_t* n, size_t* d) {
  return guard([&] {
    require(ds, "dataset");
    if (n) *n = ds->data.size();
    if (d) *d = ds->data.dim();
  });
}

void rtpref_dataset_free(rtpref_dataset* ds) { delete ds; }

rtpref_status rtpref_ddm_moments(double v, double b, double* choice_mean, double* mean_t, double* second_moment_t) {
  return guard([&] {
    if (!(b > 0.0)) throw rtpref::ValidationError("boundary b must be positive");
    if (choice_mean) *choice_mean = rtpref::ddm::expected_z(v, b);
    if (mean_t) *mean_t = rtpref::ddm::expected_t(v, b);
    if (second_moment_t) *second_moment_t = rtpref::ddm::second_moment_t(v, b);
  });
}

rtpref_status rtpref_ddm_choice_prob(double v, double b, int z, double* out) {
  return guard([&] {
    require(out, "out");
    if (!(b > 0.0)) throw rtpref::ValidationError("boundary b must be positive");
    if (z != 1 && z != -1) throw rtpref::ValidationError("choice z must be -1 or 1");
    *out = rtpref::ddm::choice_prob(v, b, z);
  });
}

rtpref_status rtpref_ddm_laplace(double alpha, double v, double b, double* out) {
  return guard([&] {
    require(out, "out");
    if (!(b > 0.0)) throw rtpref::ValidationError("boundary b must be positive");
    *out = rtpref::ddm::laplace_t(alpha, v, b);
  });
}

rtpref_status rtpref_ddm_density(double t, double v, double b, double tol, double* out) {
  return guard([&] {
    require(out, "out");
    rtpref::ddm::SeriesControl ctrl;
    if (tol > 0.0) ctrl.tol = tol;
    *out = rtpref::ddm::rt_density(t, v, b, ctrl);
  });
}

rtpref_status rtpref_lnr_moments(double nu_x, double nu_y, double d0, double rho, double* choice_mean,
                                 double* mean_t) {
  return guard([&] {
    if (choice_mean) *choice_mean = rtpref::lnr::expected_z(nu_x, nu_y, rho);
    if (mean_t) *mean_t = rtpref::lnr::expected_t(nu_x, nu_y, d0, rho);
  });
}

rtpref_status rtpref_ddm_sample(double v, double b, uint64_t seed, size_t n, int* z, double* t) {
  return guard([&] {
    require(z, "z");
    require(t, "t");
    const auto draws = rtpref::sim::simulate_batch(n, seed, [&](rtpref::Rng& rng) {
      return rtpref::sim::sample_ddm(v, b, rng);
    });
    for (size_t i = 0; i < n; ++i) {
      z[i] = draws[i].z;
      t[i] = draws[i].t;
    }
  });
}

rtpref_status rtpref_fit_ddm_sgd(const rtpref_dataset* ds, double lambda, double* u_out) {
  return guard([&] {
    require(ds, "dataset");
    require(u_out, "u_out");
    rtpref::est::SgdConfig cfg;
    if (lambda > 0.0) cfg.lambda = lambda;
    copy_out(rtpref::est::fit_ddm_sgd(ds->data, cfg).estimate, u_out);
  });
}

rtpref_status rtpref_fit_ddm_exact(const rtpref_dataset* ds, double* u_out) {
  return guard([&] {
    require(ds, "dataset");
    require(u_out, "u_out");
    copy_out(rtpref::est::fit_ddm_exact(ds->data).estimate, u_out);
  });
}

rtpref_status rtpref_fit_logistic(const rtpref_dataset* ds, double reg, double* m_out) {
  return guard([&] {
    require(ds, "dataset");
    require(m_out, "m_out");
    copy_out(rtpref::est::fit_logistic(ds->data, reg), m_out);
  });
}

rtpref_status rtpref_recover_b_combine(size_t d, const double* u, const double* m, double* b_out) {
  return guard([&] {
    require(u, "u");
    require(m, "m");
    require(b_out, "b_out");
    const auto dim = static_cast<Eigen::Index>(d);
    *b_out = rtpref::est::recover_b_combine(Eigen::Map<const rtpref::Vector>(u, dim),
                                            Eigen::Map<const rtpref::Vector>(m, dim));
  });
}

rtpref_status rtpref_recover_b_moment_match(const rtpref_dataset* ds, const double* u, double* b_out) {
  return guard([&] {
    require(ds, "dataset");
    require(u, "u");
    require(b_out, "b_out");
    const auto dim = static_cast<Eigen::Index>(ds->data.dim());
    *b_out = rtpref::est::recover_b_moment_match(Eigen::Map<const rtpref::Vector>(u, dim), ds->data);
  });
}

rtpref_status rtpref_cmd_simulate(const char* config_path, const char* overrides_json, char** output) {
  return run_command(&rtpref::io::cmd_simulate, config_path, overrides_json, output);
}

rtpref_status rtpref_cmd_fit(const char* config_path, const char* overrides_json, char** output) {
  return run_command(&rtpref::io::cmd_fit, config_path, overrides_json, output);
}

rtpref_status rtpref_cmd_evaluate(const char* config_path, const char* overrides_json, char** output) {
  return run_command(&rtpref::io::cmd_evaluate, config_path, overrides_json, output);
}

rtpref_status rtpref_cmd_identity_check(const char* config_path, const char* overrides_json, char** output) {
  return run_command(&rtpref::io::cmd_identity_check, config_path, overrides_json, output);
}

void rtpref_string_free(char* s) { std::free(s); }

}  // extern "C"
