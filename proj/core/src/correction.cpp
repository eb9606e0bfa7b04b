#include "ikd/correction.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "ikd/error.hpp"
#include "ikd/simcore.hpp"

namespace ikd {

void to_json(nlohmann::json& j, const CorrectionResult& r) {
  j = nlohmann::json{{"v", r.v},
                     {"av_desired", r.av_desired},
                     {"av_corrected", r.av_corrected},
                     {"c_corrected", r.c_corrected},
                     {"clamped", r.clamped}};
}

CorrectionResult correct_angular(const MlpParams& model, double v, double av_desired,
                                 double eps_v) {
  if (!std::isfinite(v) || !std::isfinite(av_desired)) {
    throw ValidationError("correction inputs must be finite");
  }
  const double raw = forward(model, v, av_desired);
  if (!std::isfinite(raw)) {
    throw InferenceError("model produced a non-finite angular velocity; the model file is corrupt");
  }
  CorrectionResult r;
  r.v = v;
  r.av_desired = av_desired;
  r.av_corrected = std::clamp(raw, -kMaxAngularVelocity, kMaxAngularVelocity);
  r.clamped = r.av_corrected != raw;
  r.c_corrected = c_from_av_v(r.av_corrected, v, eps_v);
  return r;
}

CorrectionResult correct(const MlpParams& model, double v, double c_desired, double eps_v) {
  if (!std::isfinite(c_desired)) {
    throw ValidationError("correction inputs must be finite");
  }
  return correct_angular(model, v, av_from_vc(v, c_desired), eps_v);
}

}  // namespace ikd
