// Copyright 2026 The crossrate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <sstream>

#include "crossrate/errors.hpp"

namespace crossrate {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // Kronrod error estimate
  double l1 = 0.0;     // integral of |f|
};

inline constexpr unsigned kQuadratureMaxDepth = 24;
inline constexpr double kQuadratureAbsFloor = 1e-15;

/// Adaptive G7/K15 on [a, b]. Accepts when the Kronrod error estimate is
/// below rel_tol * L1 or below kQuadratureAbsFloor; throws NumericalError
/// otherwise.
template <typename F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double rel_tol,
                                    const char* what = "integrate_adaptive") {
  using boost::math::quadrature::gauss_kronrod;
  QuadratureResult r;
  if (!(b > a)) return r;
  auto good = [&] {
    return std::isfinite(r.value) &&
           (r.error <= rel_tol * r.l1 || r.error <= kQuadratureAbsFloor);
  };
  // One K15 pass first: negligible integrands would otherwise recurse to
  // full depth chasing a relative tolerance.
  r.value = gauss_kronrod<double, 15>::integrate(f, a, b, 0, rel_tol, &r.error, &r.l1);
  if (good()) return r;
  // Boost's own stopping test is per subinterval and can end just short of
  // rel_tol on the whole range, so ask it for more.
  r.value = gauss_kronrod<double, 15>::integrate(f, a, b, kQuadratureMaxDepth,
                                                 rel_tol * 1e-2, &r.error, &r.l1);
  if (!good()) {
    std::ostringstream os;
    os << what << ": quadrature did not converge (achieved error " << r.error
       << ", |f| integral " << r.l1 << ", requested rel tol " << rel_tol << ")";
    throw NumericalError(os.str());
  }
  return r;
}

}  // namespace crossrate
