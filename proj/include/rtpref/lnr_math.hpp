#pragma once

#include "rtpref/types.hpp"

// Lognormal race: alternative j finishes at tau_j = D_j / V_j with
// D_j ~ Lognormal(d0, 1) iid and (log V_x, log V_y) ~ N((nu_x, nu_y), [[1, rho], [rho, 1]]).

namespace rtpref::lnr {

/// Standard normal CDF.
double normal_cdf(double x);

/// E[z] = 2 Phi((nu_x - nu_y) / sqrt(4 - 2 rho)) - 1.
double expected_z(double nu_x, double nu_y, double rho);

/// J_rho(r) = e^{r/2} Phi((-r + rho - 2)/s) + e^{-r/2} Phi((r + rho - 2)/s), s = sqrt(4 - 2 rho).
double j_rho(double r, double rho);

/// E[t] = exp(d0 + 1 - (nu_x + nu_y)/2) J_rho(nu_x - nu_y).
double expected_t(double nu_x, double nu_y, double d0, double rho);

/// Speed-accuracy ratio E[z] / E[t] with nu(.) = (.)^T w.
double ratio(const Vector& x, const Vector& y, const LnrParams& params);

}  // namespace rtpref::lnr
