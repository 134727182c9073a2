#include "windcast/sim/power_curve.hpp"

#include <cmath>
#include <stdexcept>

namespace windcast::sim {

void PowerCurveSpec::validate() const {
  if (!(cut_in > 0.0 && cut_in < rated && rated < cut_off))
    throw std::invalid_argument("power curve needs 0 < cut_in < rated < cut_off");
  if (!(nominal > 0.0 && nominal <= 1.0))
    throw std::invalid_argument("normalized nominal power must lie in (0,1]");
  if (!(ramp_shape > 0.0)) throw std::invalid_argument("ramp shape must be positive");
}

double power_curve(double speed, const PowerCurveSpec& spec) {
  if (speed < 0.0 || std::isnan(speed)) throw std::invalid_argument("negative wind speed");
  if (speed < spec.cut_in || speed >= spec.cut_off) return 0.0;
  if (speed >= spec.rated) return spec.nominal;
  double x = (speed - spec.cut_in) / (spec.rated - spec.cut_in);
  return spec.nominal * std::pow(x, spec.ramp_shape);
}

}  // namespace windcast::sim
