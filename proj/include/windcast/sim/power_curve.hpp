#pragma once

namespace windcast::sim {

/// Parametric turbine power curve in normalized units.
struct PowerCurveSpec {
  double cut_in = 4.0;    // m/s
  double rated = 16.0;    // m/s
  double cut_off = 25.0;  // m/s
  double nominal = 1.0;
  double ramp_shape = 3.0;

  /// Throws std::invalid_argument unless 0 < cut_in < rated < cut_off.
  void validate() const;
};

/// 0 below cut-in, ((v - cut_in) / (rated - cut_in))^shape up to rated,
/// nominal until cut-off, 0 at and above cut-off.
double power_curve(double speed, const PowerCurveSpec& spec);

}  // namespace windcast::sim
