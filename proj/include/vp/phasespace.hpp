#pragma once
// Discretized phase-space densities: uniform cell-centered grids over
// (x, v1, v2) per species, initial-data sampling, and the conservative 1-d
// remap kernel used by the transport steps.

#include <cstddef>
#include <vector>

#include "vp/model.hpp"

namespace vp {

struct SupportExceedsGrid : Error { using Error::Error; };
struct ShiftTooLarge : Error { using Error::Error; };

enum class Scheme { linear_conservative, cubic };

const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);  // throws InvalidValue

struct GridGeometry {
  int nx = 0, nv1 = 0, nv2 = 0;
  double x_min = 0.0, dx = 0.0;
  double v1_min = 0.0, dv1 = 0.0;
  double v2_min = 0.0, dv2 = 0.0;

  double cell_volume() const { return dx * dv1 * dv2; }
  double dv() const { return dv1 * dv2; }
  double x_max() const { return x_min + nx * dx; }
  double v1_max() const { return v1_min + nv1 * dv1; }
  double v2_max() const { return v2_min + nv2 * dv2; }
  double x_center(int i) const { return x_min + (i + 0.5) * dx; }
  double v1_center(int j) const { return v1_min + (j + 0.5) * dv1; }
  double v2_center(int k) const { return v2_min + (k + 0.5) * dv2; }
  std::size_t cells() const {
    return static_cast<std::size_t>(nx) * nv1 * nv2;
  }

  void validate() const;  // counts >= 4, spacings > 0

  // Uniform grid spanning the bounds exactly, v-axes symmetric about 0.
  static GridGeometry cover(const DomainBounds& b, int nx, int nv1, int nv2);
};

// Dense nonnegative values indexed (species, x, v1, v2), v2 fastest. For a
// fixed x the whole (v1, v2) block is contiguous, which the remap kernels
// exploit.
struct PhaseGrid {
  GridGeometry geom;
  int n_species = 0;
  std::vector<double> values;

  PhaseGrid() = default;
  PhaseGrid(const GridGeometry& g, int ns);

  std::size_t species_stride() const { return geom.cells(); }
  std::size_t plane() const { return static_cast<std::size_t>(geom.nv1) * geom.nv2; }
  double* species_data(int s) { return values.data() + species_stride() * s; }
  const double* species_data(int s) const { return values.data() + species_stride() * s; }
  double& at(int s, int i, int j, int k) {
    return values[(species_stride() * s) + plane() * i +
                  static_cast<std::size_t>(j) * geom.nv2 + k];
  }
  double at(int s, int i, int j, int k) const {
    return const_cast<PhaseGrid*>(this)->at(s, i, j, k);
  }

  // Fixed-order block sum times cell volume; deterministic for any worker count.
  double species_mass(int s) const;
  double max_value() const;
  // Largest value on any outermost cell layer (x, v1, or v2 ends), used to
  // assert that support never touches the grid edge.
  double boundary_max() const;
  bool has_nonfinite() const;
};

// Cell-centered evaluation of the closed-form profile into an nx*nv1*nv2
// slice. Throws SupportExceedsGrid when the analytic support sticks out.
void sample_profile(const InitialProfile& p, const GridGeometry& g, double* slice);

PhaseGrid sample_initial(const SystemSpec& spec, const GridGeometry& g);

// Signed mass crossing the face between cells i and i+1 when every cell in
// the slice moves by `shift` cells (|shift| <= 1). f values are cells
// i-1, i, i+1, i+2; callers pass 0 beyond the slice ends.
double face_flux(Scheme scheme, double shift, double fm1, double f0, double f1, double f2);

// Conservative remap of a 1-d slice by a uniform fractional shift, flux form
// with zero inflow at both ends. Cubic output is clipped to >= 0 with the
// clipped mass absorbed by rescaling the positive cells of the slice.
std::vector<double> interp_1d(const std::vector<double>& values, double shift, Scheme scheme);

// rho(x_i) = sum_a w_a * sum_(v-cells) f_a * dv1 * dv2. With w = charges this
// is the source of the field; with w = 1 it bounds the velocity marginals.
std::vector<double> marginal_density(const PhaseGrid& grid,
                                     const std::vector<double>& species_weights);

}  // namespace vp
