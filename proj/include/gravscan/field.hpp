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

#pragma once

#include <numbers>
#include <span>

#include "gravscan/core.hpp"
#include "gravscan/features.hpp"

namespace gravscan {

struct IORField;

/// Attention mass density over the retina.
struct MassField {
  RetinaGrid grid;
  ImageD mu;
};

/// mu = (sum_i alpha_i * f_i) * (1 - I). `ior` may be null (no inhibition).
MassField build_mass(std::span<const WeightedFeature> features, const IORField* ior);

/// Default kernel softening: one pixel in normalized units.
inline double default_softening(const RetinaGrid& grid) { return grid.pixel_size(); }

/// Softened 2D gravitational field over a fixed lattice.
///
///   E(a) = -(1/2pi) * sum_x (a - x) mu(x) dA / (|a - x|^2 + eps^2)
///
/// The summation runs row by row in a fixed order so repeated evaluations are
/// bit-identical.
template <typename Scalar>
class FieldEvaluator {
 public:
  using Vec = Eigen::Matrix<Scalar, 2, 1>;
  using Row = Eigen::Array<Scalar, 1, Eigen::Dynamic>;

  FieldEvaluator(const RetinaGrid& grid, Scalar epsilon)
      : grid_(grid), eps2_(epsilon * epsilon), area_(Scalar(grid.pixel_area())),
        xs_(Row::LinSpaced(grid.width(), Scalar(0), Scalar(grid.width() - 1)) /
            Scalar(grid.diag())),
        dx_(grid.width()), w_(grid.width()) {
    if (!(epsilon > Scalar(0))) throw ValidationError("softening length must be positive");
  }

  template <typename Derived>
  Vec operator()(const Eigen::ArrayBase<Derived>& mu, const Vec& a) const {
    const Scalar inv_diag = Scalar(1) / Scalar(grid_.diag());
    dx_ = a.x() - xs_;
    const Row dx2 = dx_.square() + eps2_;
    Scalar sx(0);
    Scalar sy(0);
    for (Eigen::Index r = 0; r < mu.rows(); ++r) {
      const Scalar dy = a.y() - Scalar(r) * inv_diag;
      w_ = mu.row(r) / (dx2 + dy * dy);
      sx += (dx_ * w_).sum();
      sy += dy * w_.sum();
    }
    const Scalar c = -area_ / (Scalar(2) * std::numbers::pi_v<Scalar>);
    return {c * sx, c * sy};
  }

  /// Softened potential U with E = -grad U:
  ///   U(a) = (1/4pi) * sum_x mu(x) dA * ln(|a - x|^2 + eps^2)
  template <typename Derived>
  Scalar potential(const Eigen::ArrayBase<Derived>& mu, const Vec& a) const {
    const Scalar inv_diag = Scalar(1) / Scalar(grid_.diag());
    dx_ = a.x() - xs_;
    const Row dx2 = dx_.square() + eps2_;
    Scalar s(0);
    for (Eigen::Index r = 0; r < mu.rows(); ++r) {
      const Scalar dy = a.y() - Scalar(r) * inv_diag;
      s += (mu.row(r) * (dx2 + dy * dy).log()).sum();
    }
    return s * area_ / (Scalar(4) * std::numbers::pi_v<Scalar>);
  }

  const RetinaGrid& grid() const { return grid_; }

 private:
  RetinaGrid grid_;
  Scalar eps2_;
  Scalar area_;
  Row xs_;
  mutable Row dx_;
  mutable Row w_;
};

Point eval_field(const MassField& mass, const Point& a, double epsilon);
double eval_potential(const MassField& mass, const Point& a, double epsilon);

}  // namespace gravscan
