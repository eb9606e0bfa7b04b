#pragma once

// Test-time use of the inverse model: turn a desired (v, c) into the
// joystick command that should make the car actually drive curvature c.

#include <nlohmann/json_fwd.hpp>

#include "ikd/align.hpp"
#include "ikd/mlp.hpp"

namespace ikd {

inline double av_from_vc(double v, double c) { return v * c; }

/// av / v, or 0 when |v| < eps_v.
inline double c_from_av_v(double av, double v, double eps_v = kDefaultEpsV) {
  return guarded_curvature(av, v, eps_v);
}

struct CorrectionResult {
  double v = 0.0;
  double av_desired = 0.0;
  double av_corrected = 0.0;  ///< within [-4, 4]
  double c_corrected = 0.0;
  bool clamped = false;

  friend bool operator==(const CorrectionResult&, const CorrectionResult&) = default;
};

void to_json(nlohmann::json& j, const CorrectionResult& r);

/// Queries the network with (v, av_desired) and clamps the answer to +-4 rad/s.
/// Throws InferenceError when the network output is not finite.
CorrectionResult correct_angular(const MlpParams& model, double v, double av_desired,
                                 double eps_v = kDefaultEpsV);

CorrectionResult correct(const MlpParams& model, double v, double c_desired,
                         double eps_v = kDefaultEpsV);

}  // namespace ikd
