#pragma once

#include <utility>

#include "tfilm/grid.hpp"

namespace tfilm {

// Second-order centered periodic stencils on cell-centered data. All
// operators commute exactly with grid translations.

VectorField gradient(const Field& f);
Field laplacian(const Field& f);
MatrixField hessian(const Field& f);
VectorField grad_laplacian(const Field& f);
Tensor3Field third_derivatives(const Field& f);

/// Midpoint quadrature of f over R: h^d * sum over member cells.
/// Throws EmptyRegionError when no cell center lies in R.
double integrate(const Field& f, const Region& R);

/// Discrete (max, min) over cell-center values in R.
std::pair<double, double> sup_inf(const Field& f, const Region& R);

}  // namespace tfilm
