#include "tfdf/objective.hpp"

#include <cmath>

namespace tfdf {

void ObjectiveParams::validate() const {
  for (double w : {eta, lambda, rho, xi, delta}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidConfig, "objective weights must be finite and >= 0");
  }
}

}  // namespace tfdf
