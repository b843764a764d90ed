#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mgtune/fopid.hpp"

namespace mgtune {

// ---------------------------------------------------------------------------
// Tuned reference gains
// ---------------------------------------------------------------------------

/// A named, ready-to-run controller setting: the best parameters found by one
/// tuning method (one of the five kriging kernels, or the genetic-algorithm
/// baseline) for one controller family. These let the robustness and
/// switching studies run without first spending a tuning campaign.
struct Preset {
  std::string name;        // "<method>-<controller>", e.g. "spline-fopid"
  std::string method;      // kernel name or "ga"
  ControllerKind kind = ControllerKind::pid;
  ControllerParams params;
};

inline const std::vector<Preset>& presets() {
  static const std::vector<Preset> table = {
      {"exponential-pid", "exponential", ControllerKind::pid,
       {3.613, 1.822, 0.344, 1.0, 1.0}},
      {"exponential-fopid", "exponential", ControllerKind::fopid,
       {0.984, 3.359, 1.426, 0.677, 0.623}},
      {"gaussian-pid", "gaussian", ControllerKind::pid,
       {3.666, 1.903, 0.333, 1.0, 1.0}},
      {"gaussian-fopid", "gaussian", ControllerKind::fopid,
       {2.461, 5.000, 0.948, 0.926, 0.744}},
      {"linear-pid", "linear", ControllerKind::pid,
       {4.150, 1.250, 0.350, 1.0, 1.0}},
      {"linear-fopid", "linear", ControllerKind::fopid,
       {2.204, 3.155, 1.233, 0.768, 0.705}},
      {"spherical-pid", "spherical", ControllerKind::pid,
       {3.678, 1.351, 0.342, 1.0, 1.0}},
      {"spherical-fopid", "spherical", ControllerKind::fopid,
       {2.450, 4.750, 0.950, 0.860, 0.780}},
      {"spline-pid", "spline", ControllerKind::pid,
       {3.712, 1.391, 0.333, 1.0, 1.0}},
      {"spline-fopid", "spline", ControllerKind::fopid,
       {0.950, 4.350, 1.250, 0.660, 0.700}},
      {"ga-pid", "ga", ControllerKind::pid, {3.124, 1.087, 0.324, 1.0, 1.0}},
      {"ga-fopid", "ga", ControllerKind::fopid,
       {1.703, 2.166, 1.310, 0.992, 0.654}},
  };
  return table;
}

inline const Preset& preset(const std::string& name) {
  for (const Preset& p : presets())
    if (p.name == name) return p;
  throw std::invalid_argument("unknown preset: " + name);
}

/// The headline pair used by the robustness and switching studies: the
/// overall best tuning method's result for each controller family.
inline const Preset& best_pid_preset() { return preset("spline-pid"); }
inline const Preset& best_fopid_preset() { return preset("spline-fopid"); }

}  // namespace mgtune
