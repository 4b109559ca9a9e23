#pragma once

#include "atlas/errors.hpp"

namespace atlas {

/// Mass ratio mu and energy parameter c. The energy level under study is
/// H = -c; the regularized surface is {K_{mu,c} = 0}.
struct Params {
  double mu = 0.0;
  double c = 0.0;

  Params(double mu_, double c_) : mu(mu_), c(c_) {
    if (!(mu >= 0.0 && mu <= 1.0))
      throw InvalidParams("mass ratio must satisfy 0 <= mu <= 1");
  }

  /// True iff the bounded earth component is compact and nondegenerate.
  bool compact_regime() const { return mu < 1.0 && c > 1.5; }

  void require_compact() const {
    if (mu >= 1.0)
      throw InvalidParams("mu = 1 degenerates the bounded component to the origin");
    if (!(c > 1.5))
      throw InvalidParams("energy parameter must satisfy c > 3/2");
  }
};

} // namespace atlas
