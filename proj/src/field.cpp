// Copyright 2026 The gravscan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gravscan/field.hpp"

#include "gravscan/ior.hpp"

namespace gravscan {

MassField build_mass(std::span<const WeightedFeature> features, const IORField* ior) {
  if (features.empty()) throw ValidationError("at least one feature is required");
  const RetinaGrid& grid = features.front().map->grid;
  MassField mass{grid, ImageD::Zero(grid.height(), grid.width())};
  for (const WeightedFeature& f : features) {
    if (!(f.map->grid == grid)) throw ValidationError("feature maps live on different grids");
    if (!(f.alpha > 0.0) || !std::isfinite(f.alpha)) {
      throw ValidationError("feature weights must be positive");
    }
    mass.mu += f.alpha * f.map->values;
  }
  if (ior != nullptr) {
    if (!(ior->grid == grid)) throw ValidationError("inhibition field lives on a different grid");
    mass.mu *= (1.0 - ior->inhibition);
  }
  return mass;
}

Point eval_field(const MassField& mass, const Point& a, double epsilon) {
  return FieldEvaluator<double>(mass.grid, epsilon)(mass.mu, a);
}

double eval_potential(const MassField& mass, const Point& a, double epsilon) {
  return FieldEvaluator<double>(mass.grid, epsilon).potential(mass.mu, a);
}

IORField IORField::zeros(const RetinaGrid& grid, double beta, double sigma) {
  if (beta < 0.0) throw ValidationError("IOR rate must be nonnegative");
  if (!(sigma > 0.0)) throw ValidationError("IOR width must be positive");
  return {grid, ImageD::Zero(grid.height(), grid.width()), beta, sigma};
}

namespace {

Eigen::ArrayXd axis_footprint(int n, double diag, double center, double sigma) {
  const Eigen::ArrayXd coords = Eigen::ArrayXd::LinSpaced(n, 0.0, n - 1.0) / diag;
  return (-(coords - center).square() / (2.0 * sigma * sigma)).exp();
}

}  // namespace

ImageD inhibition_footprint(const RetinaGrid& grid, const Point& focus, double sigma) {
  const Eigen::ArrayXd gx = axis_footprint(grid.width(), grid.diag(), focus.x(), sigma);
  const Eigen::ArrayXd gy = axis_footprint(grid.height(), grid.diag(), focus.y(), sigma);
  return (gy.matrix() * gx.matrix().transpose()).array();
}

void IORField::advance(const Point& focus, double dt) {
  if (!(dt > 0.0)) throw ValidationError("IOR step must be positive");
  if (beta == 0.0) return;
  const double keep = std::exp(-beta * dt);
  // g is separable, so it is applied row by row without materialising it.
  const Eigen::ArrayXd gx = axis_footprint(grid.width(), grid.diag(), focus.x(), sigma);
  const Eigen::ArrayXd gy = axis_footprint(grid.height(), grid.diag(), focus.y(), sigma);
  Eigen::Array<double, 1, Eigen::Dynamic> g_row(grid.width());
  for (Eigen::Index r = 0; r < inhibition.rows(); ++r) {
    g_row = gy(r) * gx.transpose();
    // rounding can push g + (1 - g) * keep one ulp past 1
    inhibition.row(r) = (g_row + (inhibition.row(r) - g_row) * keep).min(1.0);
  }
}

IORField step_ior(const IORField& ior, const Point& focus, double dt) {
  IORField next = ior;
  next.advance(focus, dt);
  return next;
}

}  // namespace gravscan
