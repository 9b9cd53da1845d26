#include "vp/field.hpp"

#include <cmath>

#include "vp/parallel.hpp"

namespace vp {

std::vector<double> solve_field(const std::vector<double>& rho, double dx) {
  std::size_t n = rho.size();
  std::vector<double> left(n), e(n);
  double run = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double c = rho[i] * dx;
    left[i] = run + 0.5 * c;
    run += c;
  }
  run = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    double c = rho[i] * dx;
    // right-of-x charge, accumulated in mirror order of the left scan
    e[i] = 0.5 * (left[i] - (run + 0.5 * c));
    run += c;
  }
  return e;
}

std::vector<double> deposit_current(const PhaseGrid& grid, const SystemSpec& spec) {
  const GridGeometry& g = grid.geom;
  std::size_t pl = grid.plane();
  double dv = g.dv();
  // Per-column transport velocities, shared by every x-plane.
  std::vector<double> vel(pl);
  for (int j = 0; j < g.nv1; ++j)
    for (int k = 0; k < g.nv2; ++k)
      vel[static_cast<std::size_t>(j) * g.nv2 + k] =
          spec.transport_velocity(g.v1_center(j), g.v2_center(k));
  std::vector<double> j1(g.nx, 0.0);
  par::parallel_for(g.nx, [&](std::size_t i) {
    double acc = 0.0;
    for (int s = 0; s < grid.n_species; ++s) {
      const double* p = grid.species_data(s) + pl * i;
      double sp = 0.0;
      for (std::size_t c = 0; c < pl; ++c) sp += vel[c] * p[c];
      acc += spec.species[s].charge * sp;
    }
    j1[i] = acc * dv;
  });
  return j1;
}

FieldState compute_field(const PhaseGrid& grid, const SystemSpec& spec, bool want_current) {
  FieldState f;
  std::vector<double> charges(spec.species.size());
  f.M_abs = 0.0;
  for (std::size_t s = 0; s < spec.species.size(); ++s) {
    charges[s] = spec.species[s].charge;
    f.M_abs += std::abs(charges[s]) * spec.species[s].profile.mass();
  }
  f.rho = marginal_density(grid, charges);
  f.E1 = solve_field(f.rho, grid.geom.dx);
  f.M_signed = 0.0;
  for (double r : f.rho) f.M_signed += r;
  f.M_signed *= grid.geom.dx;
  if (want_current) f.j1 = deposit_current(grid, spec);
  return f;
}

double lerp_profile(const std::vector<double>& prof, const GridGeometry& g, double x) {
  if (prof.empty()) return 0.0;
  double u = (x - g.x_min) / g.dx - 0.5;
  if (u <= 0.0) return prof.front();
  if (u >= static_cast<double>(prof.size()) - 1.0) return prof.back();
  int i0 = static_cast<int>(u);
  double f = u - i0;
  return prof[i0] * (1.0 - f) + prof[i0 + 1] * f;
}

double check_continuity(const std::vector<double>& rho_prev, const std::vector<double>& rho_next,
                        const std::vector<double>& j1_mid, double dt, double dx) {
  std::size_t n = rho_prev.size();
  if (rho_next.size() != n || j1_mid.size() != n)
    throw InvalidValue("continuity check needs profiles on one grid");
  if (!(dt > 0.0) || !(dx > 0.0)) throw InvalidValue("continuity check needs dt, dx > 0");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dj;
    if (i == 0)
      dj = (j1_mid[1] - j1_mid[0]) / dx;
    else if (i == n - 1)
      dj = (j1_mid[n - 1] - j1_mid[n - 2]) / dx;
    else
      dj = (j1_mid[i + 1] - j1_mid[i - 1]) / (2.0 * dx);
    sum += std::abs((rho_next[i] - rho_prev[i]) / dt + dj);
  }
  return sum * dx;
}

}  // namespace vp
