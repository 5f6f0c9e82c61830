#pragma once

namespace iclv {

// Standard normal density.
double std_normal_pdf(double x);

// Standard normal CDF, accurate to machine precision over the full range
// (built on erfc so the lower tail does not underflow prematurely).
double std_normal_cdf(double x);

// Inverse standard normal CDF (Wichura's PPND16 rational approximations,
// relative accuracy about 1e-15).  Throws std::domain_error outside (0,1).
double std_normal_quantile(double p);

}  // namespace iclv
