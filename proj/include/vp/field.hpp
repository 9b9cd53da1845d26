#pragma once
// Charge density, current, and the electrostatic field on the x-grid. The
// field at a point is half the difference between the charge to its left and
// the charge to its right, so its magnitude can never exceed half the total
// absolute charge.

#include <vector>

#include "vp/phasespace.hpp"

namespace vp {

struct FieldState {
  std::vector<double> rho;  // signed charge density
  std::vector<double> j1;   // signed current density
  std::vector<double> E1;
  double M_signed = 0.0;
  double M_abs = 0.0;
};

// E1_i = (L_i - R_i)/2 where L is the charge strictly left of x_i plus half
// of cell i, R the mirror image from the right. Built by one ascending and
// one descending scan, so an even rho gives bitwise antisymmetric E1.
std::vector<double> solve_field(const std::vector<double>& rho, double dx);

// j1(x) = sum_a e_a * sum_v velocity(v) * f_a * dv1 dv2 with the family's
// transport velocity.
std::vector<double> deposit_current(const PhaseGrid& grid, const SystemSpec& spec);

// rho from charge-weighted marginals, then E1; M_abs from the analytic
// species masses.
FieldState compute_field(const PhaseGrid& grid, const SystemSpec& spec, bool want_current = false);

// L1 norm of (rho_next - rho_prev)/dt + D_x j1_mid, centered difference,
// one-sided at the ends, scaled by dx. Small when transport is healthy.
double check_continuity(const std::vector<double>& rho_prev, const std::vector<double>& rho_next,
                        const std::vector<double>& j1_mid, double dt, double dx);

// Linear interpolation of a cell-centered x-profile at position x, clamped
// to the end values outside the outermost centers.
double lerp_profile(const std::vector<double>& prof, const GridGeometry& g, double x);

}  // namespace vp
