#pragma once

namespace windcast::prob {

double normal_pdf(double x);
double normal_cdf(double x);
/// Standard normal quantile for p in (0,1); +-inf at the bounds.
double normal_quantile(double p);

}  // namespace windcast::prob
