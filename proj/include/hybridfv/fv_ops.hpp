#pragma once

#include "hybridfv/fields.hpp"
#include "hybridfv/grid.hpp"

#include <array>

namespace hybridfv {

/// Volumetric (or density-weighted) flux through every face: linear face
/// interpolation of u (and rho) dotted with the outward x/y/z normal times
/// face area. Wall faces carry the no-slip closure, i.e. zero flux.
FaceField face_flux(const StructuredGrid& g, const std::array<Field, 3>& u,
                    const Field* rho = nullptr);

/// Per-cell net outward flux divided by cell volume, 1/s.
Field divergence(const StructuredGrid& g, const FaceField& phi);

/// Gauss gradient from linearly interpolated face values; boundary faces
/// take the Dirichlet value or, for NeumannZero, the adjacent cell value.
std::array<Field, 3> gradient(const StructuredGrid& g, const Field& s,
                              const FieldBc& bc);

/// Conservative upwind convection: sum over faces of phi times the upwind
/// cell value, divided by cell volume. Inflow through a boundary face uses
/// the boundary closure value.
Field upwind_convect(const StructuredGrid& g, const FaceField& phi,
                     const Field& s, const FieldBc& bc);

/// coeff * 5/7-point Laplacian. Dirichlet walls use the reflected ghost
/// value 2*wall - interior; NeumannZero walls drop the face term.
Field laplacian_apply(const StructuredGrid& g, const Field& s, double coeff,
                      const FieldBc& bc);

/// Sum of boundary-face fluxes (exactly zero for a closed cavity).
double boundary_flux_sum(const StructuredGrid& g, const FaceField& phi);

}  // namespace hybridfv
