#include "vp/phasespace.hpp"

#include <algorithm>
#include <cmath>

#include "vp/parallel.hpp"

namespace vp {

const char* scheme_name(Scheme s) {
  return s == Scheme::cubic ? "cubic" : "linear_conservative";
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "linear_conservative") return Scheme::linear_conservative;
  if (name == "cubic") return Scheme::cubic;
  throw InvalidValue("unknown scheme '" + name + "' (expected linear_conservative or cubic)");
}

void GridGeometry::validate() const {
  if (nx < 4 || nv1 < 4 || nv2 < 4)
    throw InvalidValue("grid needs at least 4 cells per axis");
  if (!(dx > 0.0) || !(dv1 > 0.0) || !(dv2 > 0.0))
    throw InvalidValue("grid spacings must be positive");
}

GridGeometry GridGeometry::cover(const DomainBounds& b, int nx, int nv1, int nv2) {
  GridGeometry g;
  g.nx = nx;
  g.nv1 = nv1;
  g.nv2 = nv2;
  g.x_min = b.x_min;
  g.dx = (b.x_max - b.x_min) / nx;
  g.v1_min = -b.v1_max;
  g.dv1 = 2.0 * b.v1_max / nv1;
  g.v2_min = -b.v2_max;
  g.dv2 = 2.0 * b.v2_max / nv2;
  g.validate();
  return g;
}

PhaseGrid::PhaseGrid(const GridGeometry& g, int ns) : geom(g), n_species(ns) {
  geom.validate();
  if (ns < 1) throw InvalidValue("need at least one species");
  values.assign(species_stride() * ns, 0.0);
}

double PhaseGrid::species_mass(int s) const {
  const double* base = species_data(s);
  std::size_t pl = plane();
  std::vector<double> per_x(geom.nx, 0.0);
  par::parallel_for(geom.nx, [&](std::size_t i) {
    const double* p = base + pl * i;
    double acc = 0.0;
    for (std::size_t c = 0; c < pl; ++c) acc += p[c];
    per_x[i] = acc;
  });
  double total = 0.0;
  for (double v : per_x) total += v;
  return total * geom.cell_volume();
}

double PhaseGrid::max_value() const {
  double m = 0.0;
  for (double v : values)
    if (v > m) m = v;
  return m;
}

double PhaseGrid::boundary_max() const {
  double m = 0.0;
  auto see = [&m](double v) {
    if (std::abs(v) > m) m = std::abs(v);
  };
  for (int s = 0; s < n_species; ++s)
    for (int i = 0; i < geom.nx; ++i) {
      bool x_edge = (i == 0 || i == geom.nx - 1);
      for (int j = 0; j < geom.nv1; ++j) {
        bool v1_edge = (j == 0 || j == geom.nv1 - 1);
        if (x_edge || v1_edge) {
          for (int k = 0; k < geom.nv2; ++k) see(at(s, i, j, k));
        } else {
          see(at(s, i, j, 0));
          see(at(s, i, j, geom.nv2 - 1));
        }
      }
    }
  return m;
}

bool PhaseGrid::has_nonfinite() const {
  for (double v : values)
    if (!std::isfinite(v)) return true;
  return false;
}

void sample_profile(const InitialProfile& p, const GridGeometry& g, double* slice) {
  if (p.x_center - p.x_halfwidth < g.x_min || p.x_center + p.x_halfwidth > g.x_max() ||
      p.v1_center - p.v1_halfwidth < g.v1_min || p.v1_center + p.v1_halfwidth > g.v1_max() ||
      -p.v2_halfwidth < g.v2_min || p.v2_halfwidth > g.v2_max())
    throw SupportExceedsGrid("initial profile support sticks out of the grid");
  std::size_t pl = static_cast<std::size_t>(g.nv1) * g.nv2;
  par::parallel_for(g.nx, [&](std::size_t i) {
    double x = g.x_center(static_cast<int>(i));
    double bx = p.amplitude * bump(x, p.x_center, p.x_halfwidth);
    double* out = slice + pl * i;
    for (int j = 0; j < g.nv1; ++j) {
      double bv1 = bump(g.v1_center(j), p.v1_center, p.v1_halfwidth);
      for (int k = 0; k < g.nv2; ++k)
        out[static_cast<std::size_t>(j) * g.nv2 + k] =
            bx * bv1 * bump(g.v2_center(k), 0.0, p.v2_halfwidth);
    }
  });
}

PhaseGrid sample_initial(const SystemSpec& spec, const GridGeometry& g) {
  PhaseGrid grid(g, static_cast<int>(spec.species.size()));
  for (int s = 0; s < grid.n_species; ++s)
    sample_profile(spec.species[s].profile, g, grid.species_data(s));
  return grid;
}

double check_neutrality(const SystemSpec& spec, const PhaseGrid& sampled) {
  double net = 0.0, abs_total = 0.0;
  for (int s = 0; s < sampled.n_species; ++s) {
    double m = sampled.species_mass(s);
    net += spec.species[s].charge * m;
    abs_total += std::abs(spec.species[s].charge) * m;
  }
  if (spec.neutral() && std::abs(net) > 1e-10 * abs_total)
    throw NeutralityViolation("sampled charges do not cancel: net " + std::to_string(net));
  return net;
}

double face_flux(Scheme scheme, double shift, double fm1, double f0, double f1, double f2) {
  if (scheme == Scheme::linear_conservative)
    return shift >= 0.0 ? shift * f0 : shift * f1;
  if (shift >= 0.0) {
    double a = shift;
    return a * (f0 + (1.0 - a) * (2.0 - a) * (1.0 / 6.0) * (f1 - f0) +
                (1.0 - a) * (1.0 + a) * (1.0 / 6.0) * (f0 - fm1));
  }
  double a = -shift;
  return -a * (f1 + (1.0 - a) * (2.0 - a) * (1.0 / 6.0) * (f0 - f1) +
               (1.0 - a) * (1.0 + a) * (1.0 / 6.0) * (f1 - f2));
}

namespace {

// Clip negatives to zero, then rescale the positive cells so the slice sum is
// unchanged. Keeps the remap conservative and the density nonnegative.
void clip_and_redistribute(double* v, std::size_t n) {
  double neg = 0.0, pos = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] < 0.0)
      neg -= v[i];
    else
      pos += v[i];
  }
  if (neg == 0.0) return;
  double scale = pos > neg ? (pos - neg) / pos : 0.0;
  for (std::size_t i = 0; i < n; ++i) v[i] = v[i] < 0.0 ? 0.0 : v[i] * scale;
}

}  // namespace

std::vector<double> interp_1d(const std::vector<double>& values, double shift, Scheme scheme) {
  if (std::abs(shift) > 1.0 + 1e-12)
    throw ShiftTooLarge("remap shift " + std::to_string(shift) + " exceeds one cell");
  std::size_t n = values.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  auto cell = [&](std::ptrdiff_t i) -> double {
    return (i < 0 || i >= static_cast<std::ptrdiff_t>(n)) ? 0.0 : values[i];
  };
  // out_i = in_i - (F_{i+1/2} - F_{i-1/2}); zero inflow means the outermost
  // faces only carry what the end cells export.
  double prev = face_flux(scheme, shift, cell(-2), cell(-1), cell(0), cell(1));
  for (std::size_t i = 0; i < n; ++i) {
    std::ptrdiff_t s = static_cast<std::ptrdiff_t>(i);
    double cur = face_flux(scheme, shift, cell(s - 1), cell(s), cell(s + 1), cell(s + 2));
    out[i] = values[i] - (cur - prev);
    prev = cur;
  }
  if (scheme == Scheme::cubic) clip_and_redistribute(out.data(), n);
  return out;
}

std::vector<double> marginal_density(const PhaseGrid& grid,
                                     const std::vector<double>& species_weights) {
  if (species_weights.size() != static_cast<std::size_t>(grid.n_species))
    throw InvalidValue("species weight count does not match the grid");
  const GridGeometry& g = grid.geom;
  std::vector<double> rho(g.nx, 0.0);
  std::size_t pl = grid.plane();
  double dv = g.dv();
  par::parallel_for(g.nx, [&](std::size_t i) {
    double acc = 0.0;
    for (int s = 0; s < grid.n_species; ++s) {
      const double* p = grid.species_data(s) + pl * i;
      double sp = 0.0;
      for (std::size_t c = 0; c < pl; ++c) sp += p[c];
      acc += species_weights[s] * sp;
    }
    rho[i] = acc * dv;
  });
  return rho;
}

}  // namespace vp
