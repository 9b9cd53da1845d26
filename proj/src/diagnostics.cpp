#include "vp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vp/parallel.hpp"

namespace vp {
namespace {

// sqrt(1 + v1^2 + v2^2) per (v1, v2) column, shared across x-planes.
std::vector<double> gamma_table(const GridGeometry& g) {
  std::vector<double> t(static_cast<std::size_t>(g.nv1) * g.nv2);
  for (int j = 0; j < g.nv1; ++j) {
    double v1 = g.v1_center(j);
    for (int k = 0; k < g.nv2; ++k) {
      double v2 = g.v2_center(k);
      t[static_cast<std::size_t>(j) * g.nv2 + k] = std::sqrt(1.0 + v1 * v1 + v2 * v2);
    }
  }
  return t;
}

// Unweighted species sum of one column's moment against per-cell weights.
double column_moment(const PhaseGrid& grid, int i, const std::vector<double>& w) {
  std::size_t pl = grid.plane();
  double acc = 0.0;
  for (int s = 0; s < grid.n_species; ++s) {
    const double* p = grid.species_data(s) + pl * i;
    double sp = 0.0;
    for (std::size_t c = 0; c < pl; ++c) sp += w[c] * p[c];
    acc += sp;
  }
  return acc;
}

double column_sum(const PhaseGrid& grid, int i) {
  std::size_t pl = grid.plane();
  double acc = 0.0;
  for (int s = 0; s < grid.n_species; ++s) {
    const double* p = grid.species_data(s) + pl * i;
    double sp = 0.0;
    for (std::size_t c = 0; c < pl; ++c) sp += p[c];
    acc += sp;
  }
  return acc;
}

}  // namespace

SupportExtremes support_extremes(const PhaseGrid& grid, double threshold_rel) {
  if (!(threshold_rel > 0.0) || !(threshold_rel < 1.0))
    throw InvalidValue("support threshold must lie strictly between 0 and 1");
  const GridGeometry& g = grid.geom;
  std::size_t pl = grid.plane();

  std::vector<double> col_max(g.nx, 0.0);
  par::parallel_for(g.nx, [&](std::size_t i) {
    double m = 0.0;
    for (std::size_t c = 0; c < pl; ++c) {
      double sum = 0.0;
      for (int s = 0; s < grid.n_species; ++s) sum += grid.species_data(s)[pl * i + c];
      if (sum > m) m = sum;
    }
    col_max[i] = m;
  });
  double peak = 0.0;
  for (double v : col_max) peak = std::max(peak, v);
  double thresh = threshold_rel * peak;
  if (!(peak > 0.0)) throw EmptySupport("no cell above the support threshold");

  // Per-column extremes over cells clearing the threshold.
  struct Col {
    bool occupied = false;
    double max_v1 = 0.0, max_abs_v1 = 0.0, max_abs_v2 = 0.0;
  };
  std::vector<Col> cols(g.nx);
  par::parallel_for(g.nx, [&](std::size_t i) {
    Col c;
    for (int j = 0; j < g.nv1; ++j) {
      double v1 = g.v1_center(j);
      for (int k = 0; k < g.nv2; ++k) {
        double sum = 0.0;
        std::size_t off = pl * i + static_cast<std::size_t>(j) * g.nv2 + k;
        for (int s = 0; s < grid.n_species; ++s) sum += grid.species_data(s)[off];
        if (sum > thresh) {
          double v2 = g.v2_center(k);
          if (!c.occupied || v1 > c.max_v1) c.max_v1 = v1;
          if (!c.occupied || std::abs(v1) > c.max_abs_v1) c.max_abs_v1 = std::abs(v1);
          if (!c.occupied || std::abs(v2) > c.max_abs_v2) c.max_abs_v2 = std::abs(v2);
          c.occupied = true;
        }
      }
    }
    cols[i] = c;
  });

  SupportExtremes ex;
  ex.support_threshold = thresh;
  ex.P1 = -std::numeric_limits<double>::infinity();
  int i_R = -1;
  for (int i = 0; i < g.nx; ++i) {
    if (!cols[i].occupied) continue;
    i_R = i;
    ex.Q1 = std::max(ex.Q1, cols[i].max_abs_v1);
    ex.P1 = std::max(ex.P1, cols[i].max_v1);
    ex.W2 = std::max(ex.W2, cols[i].max_abs_v2);
  }
  if (i_R < 0) throw EmptySupport("no cell above the support threshold");
  ex.R = g.x_center(i_R);
  ex.p1 = cols[i_R].max_v1;
  // Rightmost column holding a cell within one v1 cell of the overall top.
  double band = g.dv1 * (1.0 + 1e-9);
  for (int i = g.nx - 1; i >= 0; --i)
    if (cols[i].occupied && cols[i].max_v1 >= ex.P1 - band) {
      ex.r = g.x_center(i);
      break;
    }
  return ex;
}

double lp_norm(const std::vector<double>& rho, double p, double dx) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : rho) m = std::max(m, std::abs(v));
    return m;
  }
  if (!(p >= 1.0)) throw InvalidValue("p-norm needs p >= 1");
  double acc = 0.0;
  for (double v : rho) acc += std::pow(std::abs(v), p);
  return std::pow(acc * dx, 1.0 / p);
}

EnergyDensities energy_densities(const PhaseGrid& grid, const SystemSpec& spec,
                                 const std::vector<double>& E1) {
  if (!spec.relativistic())
    throw WrongSystemKind("energy densities are defined for the relativistic kinds");
  const GridGeometry& g = grid.geom;
  auto gam = gamma_table(g);
  std::vector<double> v1w(gam.size());
  for (int j = 0; j < g.nv1; ++j)
    for (int k = 0; k < g.nv2; ++k)
      v1w[static_cast<std::size_t>(j) * g.nv2 + k] = g.v1_center(j);
  EnergyDensities d;
  d.e.resize(g.nx);
  d.m.resize(g.nx);
  d.k.resize(g.nx);
  d.sigma_minus.resize(g.nx);
  d.sigma_plus.resize(g.nx);
  double dv = g.dv();
  par::parallel_for(g.nx, [&](std::size_t i) {
    double kv = column_moment(grid, static_cast<int>(i), gam) * dv;
    double mv = column_moment(grid, static_cast<int>(i), v1w) * dv;
    d.k[i] = kv;
    d.m[i] = mv;
    d.sigma_minus[i] = kv - mv;
    d.sigma_plus[i] = kv + mv;
    d.e[i] = kv + 0.5 * E1[i] * E1[i];
  });
  return d;
}

SigmaCheck check_sigma_inequality(const PhaseGrid& grid, const SystemSpec& spec) {
  if (!spec.relativistic())
    throw WrongSystemKind("the sigma inequality applies to the relativistic kinds");
  const GridGeometry& g = grid.geom;
  auto gam = gamma_table(g);
  std::vector<double> v1w(gam.size());
  for (int j = 0; j < g.nv1; ++j)
    for (int k = 0; k < g.nv2; ++k)
      v1w[static_cast<std::size_t>(j) * g.nv2 + k] = g.v1_center(j);
  double dv = g.dv();
  std::vector<double> worst_m(g.nx, 0.0), worst_p(g.nx, 0.0);
  par::parallel_for(g.nx, [&](std::size_t i) {
    double dens = column_sum(grid, static_cast<int>(i)) * dv;
    if (dens <= 0.0) return;
    double kv = column_moment(grid, static_cast<int>(i), gam) * dv;
    double mv = column_moment(grid, static_cast<int>(i), v1w) * dv;
    double sm = (kv - mv) * kv, sp = (kv + mv) * kv;
    worst_m[i] = sm > 0.0 ? dens / (3.0 * std::sqrt(sm)) : 0.0;
    worst_p[i] = sp > 0.0 ? dens / (3.0 * std::sqrt(sp)) : 0.0;
  });
  SigmaCheck c;
  for (int i = 0; i < g.nx; ++i) {
    c.worst_minus = std::max(c.worst_minus, worst_m[i]);
    c.worst_plus = std::max(c.worst_plus, worst_p[i]);
  }
  c.ok = c.worst_minus <= 1.0 + 1e-12 && c.worst_plus <= 1.0 + 1e-12;
  return c;
}

VirialValues virial(const PhaseGrid& grid, const FieldState& field, const SystemSpec& spec) {
  (void)spec;
  const GridGeometry& g = grid.geom;
  std::vector<double> v1w(grid.plane());
  for (int j = 0; j < g.nv1; ++j)
    for (int k = 0; k < g.nv2; ++k)
      v1w[static_cast<std::size_t>(j) * g.nv2 + k] = g.v1_center(j);
  std::vector<double> per_x(g.nx);
  par::parallel_for(g.nx, [&](std::size_t i) {
    per_x[i] = column_moment(grid, static_cast<int>(i), v1w) * field.E1[i];
  });
  VirialValues v;
  double acc = 0.0, rq = 0.0;
  for (int i = 0; i < g.nx; ++i) {
    acc += per_x[i];
    rq += field.rho[i] * field.E1[i] * field.E1[i];
  }
  v.virial = acc * g.cell_volume();
  v.rho_E1sq = rq * g.dx;
  return v;
}

EnergyProfile energy_profile(const PhaseGrid& grid, const SystemSpec& spec,
                             const std::vector<double>& E1) {
  if (!spec.relativistic())
    throw WrongSystemKind("the cone ledger is defined for the relativistic kinds");
  const GridGeometry& g = grid.geom;
  auto gam = gamma_table(g);
  std::vector<double> v1w(gam.size());
  for (int j = 0; j < g.nv1; ++j)
    for (int k = 0; k < g.nv2; ++k)
      v1w[static_cast<std::size_t>(j) * g.nv2 + k] = g.v1_center(j);
  double dv = g.dv();
  EnergyProfile prof;
  prof.e.resize(g.nx);
  prof.m.resize(g.nx);
  par::parallel_for(g.nx, [&](std::size_t i) {
    int ii = static_cast<int>(i);
    prof.e[i] = column_moment(grid, ii, gam) * dv + 0.5 * E1[i] * E1[i];
    prof.m[i] = column_moment(grid, ii, v1w) * dv;
  });
  return prof;
}

RayPoint profile_at(const EnergyProfile& prof, const GridGeometry& g, double x) {
  double u = (x - g.x_min) / g.dx - 0.5;
  RayPoint out;
  if (u <= -1.0 || u >= static_cast<double>(g.nx)) return out;
  int i0 = static_cast<int>(std::floor(u));
  double f = u - i0;
  double e0 = 0.0, e1 = 0.0, m0 = 0.0, m1 = 0.0;
  if (i0 >= 0 && i0 < g.nx) {
    e0 = prof.e[i0];
    m0 = prof.m[i0];
  }
  if (i0 + 1 >= 0 && i0 + 1 < g.nx) {
    e1 = prof.e[i0 + 1];
    m1 = prof.m[i0 + 1];
  }
  out.e = e0 * (1.0 - f) + e1 * f;
  out.m = m0 * (1.0 - f) + m1 * f;
  return out;
}

// Integral of (e - dir*m) along the ray x = apex + dir*t for t in [t0, t1],
// blending p0 and p1 linearly in time. Pieces are cut where the ray crosses
// cell centers; the blend is quadratic in t on each piece, so Simpson is
// exact there.
static double ray_integral(const EnergyProfile& p0, const EnergyProfile& p1,
                           const GridGeometry& g, double apex, int dir, double t0, double t1) {
  auto phi = [&](double t) {
    double x = apex + dir * t;
    double w = (t - t0) / (t1 - t0);
    RayPoint a = profile_at(p0, g, x);
    RayPoint b = profile_at(p1, g, x);
    double e = (1.0 - w) * a.e + w * b.e;
    double m = (1.0 - w) * a.m + w * b.m;
    return e - dir * m;
  };
  std::vector<double> cuts;
  cuts.push_back(t0);
  // cell center i sits at x_min + (i + 0.5) dx; the ray crosses it at
  // t = dir * (center - apex)
  double lo_x = apex + dir * t0, hi_x = apex + dir * t1;
  if (lo_x > hi_x) std::swap(lo_x, hi_x);
  int i_lo = static_cast<int>(std::ceil((lo_x - g.x_min) / g.dx - 0.5));
  int i_hi = static_cast<int>(std::floor((hi_x - g.x_min) / g.dx - 0.5));
  i_lo = std::max(i_lo, -1);
  i_hi = std::min(i_hi, g.nx);
  for (int i = i_lo; i <= i_hi; ++i) {
    double t = dir * (g.x_center(i) - apex);
    if (t > t0 && t < t1) cuts.push_back(t);
  }
  cuts.push_back(t1);
  std::sort(cuts.begin(), cuts.end());
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double a = cuts[k], b = cuts[k + 1];
    if (b <= a) continue;
    acc += (b - a) / 6.0 * (phi(a) + 4.0 * phi(0.5 * (a + b)) + phi(b));
  }
  return acc;
}

void cone_accumulate(ConeLedger& ledger, const GridGeometry& g, double t0,
                     const EnergyProfile& p0, double t1, const EnergyProfile& p1) {
  ledger.I_plus += ray_integral(p0, p1, g, ledger.apex, +1, t0, t1);
  ledger.I_minus += ray_integral(p0, p1, g, ledger.apex, -1, t0, t1);
  ledger.T = t1;
}

void cone_top_update(ConeLedger& ledger, double T, const EnergyProfile& prof,
                     const GridGeometry& g) {
  double a = ledger.apex - T, b = ledger.apex + T;
  double acc = 0.0;
  for (int i = 0; i < g.nx; ++i) {
    double lo = g.x_min + i * g.dx, hi = lo + g.dx;
    double ov = std::min(hi, b) - std::max(lo, a);
    if (ov > 0.0) acc += prof.e[i] * ov;
  }
  ledger.cone_top = acc;
  ledger.T = T;
}

MomentValues x2_moment_and_K(const PhaseGrid& grid, const FieldState& field,
                             const SystemSpec& spec) {
  (void)spec;
  const GridGeometry& g = grid.geom;
  std::vector<double> vsq(grid.plane()), v1sqw(grid.plane());
  for (int j = 0; j < g.nv1; ++j) {
    double v1 = g.v1_center(j);
    for (int k = 0; k < g.nv2; ++k) {
      double v2 = g.v2_center(k);
      vsq[static_cast<std::size_t>(j) * g.nv2 + k] = v1 * v1 + v2 * v2;
      v1sqw[static_cast<std::size_t>(j) * g.nv2 + k] = v1 * v1;
    }
  }
  struct Part {
    double x2 = 0.0, K = 0.0, v1sq = 0.0;
  };
  std::vector<Part> parts(g.nx);
  par::parallel_for(g.nx, [&](std::size_t i) {
    double x = g.x_center(static_cast<int>(i));
    Part p;
    p.K = column_moment(grid, static_cast<int>(i), vsq);
    p.v1sq = column_moment(grid, static_cast<int>(i), v1sqw);
    p.x2 = column_sum(grid, static_cast<int>(i)) * x * x;
    parts[i] = p;
  });
  MomentValues m;
  for (const auto& p : parts) {
    m.x2_moment += p.x2;
    m.kinetic_K += p.K;
    m.v1sq += p.v1sq;
  }
  double vol = g.cell_volume();
  m.x2_moment *= vol;
  m.kinetic_K *= vol;
  m.v1sq *= vol;
  for (double e : field.E1) m.E1sq += e * e;
  m.E1sq *= g.dx;
  m.d2dt2_rhs = 2.0 * m.v1sq - m.E1sq;
  return m;
}

double density_ceiling_bound(const PhaseGrid& initial, const SystemSpec& spec) {
  // Closed form: each species' max-over-x v-profile integrates to the peak
  // v-integral of its bump, independent of the centers.
  (void)initial;
  double acc = 0.0;
  for (const auto& s : spec.species) acc += s.profile.peak_v_integral();
  return acc;
}

DiagnosticsRecord compute_record(const PhaseGrid& grid, const FieldState& field,
                                 const SystemSpec& spec, double t,
                                 const DiagnosticsConfig& cfg, double ceiling_bound) {
  const GridGeometry& g = grid.geom;
  DiagnosticsRecord rec;
  rec.t = t;
  rec.extremes = support_extremes(grid, cfg.support_threshold);
  rec.rho_L1 = lp_norm(field.rho, 1.0, g.dx);
  rec.rho_L2 = lp_norm(field.rho, 2.0, g.dx);
  rec.rho_Linf = lp_norm(field.rho, std::numeric_limits<double>::infinity(), g.dx);
  for (double p : cfg.extra_ps) rec.rho_Lp_extra.push_back(lp_norm(field.rho, p, g.dx));
  for (int s = 0; s < grid.n_species; ++s)
    rec.charge_per_species.push_back(spec.species[s].charge * grid.species_mass(s));

  MomentValues mv = x2_moment_and_K(grid, field, spec);
  rec.kinetic_K = mv.kinetic_K;
  rec.x2_moment = mv.x2_moment;
  VirialValues vv = virial(grid, field, spec);
  rec.virial = vv.virial;
  rec.rho_E1sq = vv.rho_E1sq;

  if (spec.neutral()) {
    rec.has_total_energy = true;
    if (spec.relativistic()) {
      auto gam = gamma_table(g);
      std::vector<double> per_x(g.nx);
      par::parallel_for(g.nx, [&](std::size_t i) {
        per_x[i] = column_moment(grid, static_cast<int>(i), gam);
      });
      double k = 0.0;
      for (double v : per_x) k += v;
      rec.total_energy = k * g.cell_volume() + 0.5 * mv.E1sq;
    } else {
      rec.total_energy = 0.5 * mv.kinetic_K + 0.5 * mv.E1sq;
    }
  }
  if (spec.relativistic()) {
    rec.has_sigma = true;
    rec.sigma_ok = check_sigma_inequality(grid, spec).ok;
  }
  rec.E1_at_r = lerp_profile(field.E1, g, rec.extremes.r);
  for (double e : field.E1) rec.E1_max_abs = std::max(rec.E1_max_abs, std::abs(e));
  rec.rho_ceiling_bound = ceiling_bound;
  return rec;
}

}  // namespace vp
