#include "vp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "vp/parallel.hpp"

namespace vp {

const char* backend_name(Backend b) { return b == Backend::pic ? "pic" : "semilag"; }

Backend backend_from_name(const std::string& name) {
  if (name == "semilag") return Backend::semilag;
  if (name == "pic") return Backend::pic;
  throw InvalidValue("unknown backend '" + name + "' (expected semilag or pic)");
}

void StepperConfig::validate() const {
  if (!(dt > 0.0)) throw InvalidValue("dt must be positive");
  if (!(t_end >= 0.0)) throw InvalidValue("t_end must be nonnegative");
  if (output_every < 1) throw InvalidValue("output_every must be at least 1");
  if (max_subcycles < 1) throw InvalidValue("max_subcycles must be at least 1");
  if (backend == Backend::pic && pic_particle_count < 1)
    throw InvalidValue("pic_particle_count must be positive");
}

namespace {

// One flux-form pass moving every (v1,v2) column of one species slice along
// x by its own sub-cell shift. Sweeps x-planes in address order; workers own
// disjoint column ranges, so results do not depend on the worker count.
void x_pass(const double* src, double* dst, int nx, std::size_t pl,
            const std::vector<double>& xi, Scheme scheme) {
  par::parallel_for_ranges(pl, [&](std::size_t c0, std::size_t c1) {
    std::size_t w = c1 - c0;
    std::vector<double> fprev(w), fcur(w);
    auto plane = [&](int i) -> const double* {
      return (i < 0 || i >= nx) ? nullptr : src + static_cast<std::size_t>(i) * pl;
    };
    auto cell = [&](const double* p, std::size_t c) -> double { return p ? p[c] : 0.0; };
    // face between cells -1 and 0
    {
      const double *p0 = plane(0), *p1 = plane(1);
      for (std::size_t c = c0; c < c1; ++c)
        fprev[c - c0] = face_flux(scheme, xi[c], 0.0, 0.0, cell(p0, c), cell(p1, c));
    }
    for (int i = 0; i < nx; ++i) {
      const double *pm1 = plane(i - 1), *p0 = plane(i), *p1 = plane(i + 1), *p2 = plane(i + 2);
      double* out = dst + static_cast<std::size_t>(i) * pl;
      for (std::size_t c = c0; c < c1; ++c) {
        double f = face_flux(scheme, xi[c], cell(pm1, c), cell(p0, c), cell(p1, c), cell(p2, c));
        out[c] = p0[c] - (f - fprev[c - c0]);
        fcur[c - c0] = f;
      }
      std::swap(fprev, fcur);
    }
  });
}

// Per-column clip of negatives with a compensating rescale of the positive
// cells, along x. Only the cubic scheme produces negatives.
void x_clip(double* data, int nx, std::size_t pl) {
  par::parallel_for_ranges(pl, [&](std::size_t c0, std::size_t c1) {
    std::size_t w = c1 - c0;
    std::vector<double> neg(w, 0.0), pos(w, 0.0);
    for (int i = 0; i < nx; ++i) {
      const double* p = data + static_cast<std::size_t>(i) * pl;
      for (std::size_t c = c0; c < c1; ++c) {
        double v = p[c];
        if (v < 0.0)
          neg[c - c0] -= v;
        else
          pos[c - c0] += v;
      }
    }
    bool any = false;
    std::vector<double> scale(w, 1.0);
    for (std::size_t c = 0; c < w; ++c)
      if (neg[c] > 0.0) {
        any = true;
        scale[c] = pos[c] > neg[c] ? (pos[c] - neg[c]) / pos[c] : 0.0;
      }
    if (!any) return;
    for (int i = 0; i < nx; ++i) {
      double* p = data + static_cast<std::size_t>(i) * pl;
      for (std::size_t c = c0; c < c1; ++c) {
        double v = p[c];
        p[c] = v < 0.0 ? 0.0 : v * scale[c - c0];
      }
    }
  });
}

// Transport in x by duration h: shift column (j,k) by velocity(j,k)*h/dx,
// sub-cycled per column so each pass stays within one cell.
void advect_x(const PhaseGrid& in, PhaseGrid& out, const SystemSpec& spec,
              const StepperConfig& cfg, double h) {
  const GridGeometry& g = in.geom;
  std::size_t pl = in.plane();
  std::vector<double> xi0(pl);
  std::vector<int> ncyc(pl);
  int n_max = 1;
  for (int j = 0; j < g.nv1; ++j)
    for (int k = 0; k < g.nv2; ++k) {
      std::size_t c = static_cast<std::size_t>(j) * g.nv2 + k;
      double shift = spec.transport_velocity(g.v1_center(j), g.v2_center(k)) * h / g.dx;
      int n = std::max(1, static_cast<int>(std::ceil(std::abs(shift) - 1e-12)));
      if (n > cfg.max_subcycles)
        throw CFLViolation("x shift of " + std::to_string(shift) + " cells needs " +
                           std::to_string(n) + " sub-steps (cap " +
                           std::to_string(cfg.max_subcycles) + ")");
      xi0[c] = shift;
      ncyc[c] = n;
      n_max = std::max(n_max, n);
    }

  PhaseGrid scratch;
  if (n_max > 1) scratch = PhaseGrid(g, in.n_species);
  std::vector<double> xi(pl);
  for (int s = 0; s < in.n_species; ++s) {
    const double* src = in.species_data(s);
    double* a = out.species_data(s);
    double* b = n_max > 1 ? scratch.species_data(s) : nullptr;
    const double* cur = src;
    double* nxt = a;
    for (int pass = 0; pass < n_max; ++pass) {
      for (std::size_t c = 0; c < pl; ++c)
        xi[c] = pass < ncyc[c] ? xi0[c] / ncyc[c] : 0.0;
      x_pass(cur, nxt, g.nx, pl, xi, cfg.scheme);
      if (cfg.scheme == Scheme::cubic) x_clip(nxt, g.nx, pl);
      cur = nxt;
      nxt = (cur == a) ? b : a;
    }
    if (cur != a) std::memcpy(a, cur, sizeof(double) * in.species_stride());
  }
}

// Kick in v1 by duration dt: every column at one x shifts by the same
// e*E1(x)*dt/dv1, so the (v1,v2) block remaps row-uniformly in place.
void advect_v1(PhaseGrid& grid, const std::vector<double>& E1, const SystemSpec& spec,
               const StepperConfig& cfg, double dt) {
  const GridGeometry& g = grid.geom;
  std::size_t pl = grid.plane();
  double e_max = 0.0;
  for (double e : E1) e_max = std::max(e_max, std::abs(e));
  for (int s = 0; s < grid.n_species; ++s) {
    double e_s = spec.species[s].charge;
    double worst = std::abs(e_s) * e_max * std::abs(dt) / g.dv1;
    int n_worst = std::max(1, static_cast<int>(std::ceil(worst - 1e-12)));
    if (n_worst > cfg.max_subcycles)
      throw CFLViolation("v1 shift of " + std::to_string(worst) + " cells needs " +
                         std::to_string(n_worst) + " sub-steps (cap " +
                         std::to_string(cfg.max_subcycles) + ")");
    double* base = grid.species_data(s);
    par::parallel_for(g.nx, [&](std::size_t i) {
      double shift = e_s * E1[i] * dt / g.dv1;
      int n = std::max(1, static_cast<int>(std::ceil(std::abs(shift) - 1e-12)));
      double xi = shift / n;
      thread_local std::vector<double> scratch;
      scratch.resize(pl);
      double* blk = base + pl * i;
      double* cur = blk;
      double* other = scratch.data();
      int nv1 = g.nv1, nv2 = g.nv2;
      for (int pass = 0; pass < n; ++pass) {
        auto row = [&](int j) -> const double* {
          return (j < 0 || j >= nv1) ? nullptr : cur + static_cast<std::size_t>(j) * nv2;
        };
        thread_local std::vector<double> fprev_v, fcur_v;
        fprev_v.assign(nv2, 0.0);
        fcur_v.resize(nv2);
        {
          const double *r0 = row(0), *r1 = row(1);
          for (int k = 0; k < nv2; ++k)
            fprev_v[k] = face_flux(cfg.scheme, xi, 0.0, 0.0, r0 ? r0[k] : 0.0, r1 ? r1[k] : 0.0);
        }
        for (int j = 0; j < nv1; ++j) {
          const double *rm1 = row(j - 1), *r0 = row(j), *r1 = row(j + 1), *r2 = row(j + 2);
          double* outr = other + static_cast<std::size_t>(j) * nv2;
          for (int k = 0; k < nv2; ++k) {
            double f = face_flux(cfg.scheme, xi, rm1 ? rm1[k] : 0.0, r0[k], r1 ? r1[k] : 0.0,
                                 r2 ? r2[k] : 0.0);
            outr[k] = r0[k] - (f - fprev_v[k]);
            fcur_v[k] = f;
          }
          std::swap(fprev_v, fcur_v);
        }
        std::swap(cur, other);
        if (cfg.scheme == Scheme::cubic) {
          // clip along v1 for each fixed v2
          for (int k = 0; k < nv2; ++k) {
            double neg = 0.0, pos = 0.0;
            for (int j = 0; j < nv1; ++j) {
              double v = cur[static_cast<std::size_t>(j) * nv2 + k];
              if (v < 0.0)
                neg -= v;
              else
                pos += v;
            }
            if (neg == 0.0) continue;
            double sc = pos > neg ? (pos - neg) / pos : 0.0;
            for (int j = 0; j < nv1; ++j) {
              double& v = cur[static_cast<std::size_t>(j) * nv2 + k];
              v = v < 0.0 ? 0.0 : v * sc;
            }
          }
        }
      }
      if (cur != blk) std::memcpy(blk, cur, sizeof(double) * pl);
    });
  }
}

struct AuditResult {
  std::vector<double> masses;
  double peak = 0.0;
  double boundary = 0.0;
  bool finite = true;
};

// Fused per-step health scan: per-species mass, global peak, largest
// boundary-layer value, and finiteness, in one deterministic pass.
AuditResult audit(const PhaseGrid& grid) {
  const GridGeometry& g = grid.geom;
  std::size_t pl = grid.plane();
  struct Part {
    double sum = 0.0, peak = 0.0, edge = 0.0;
    bool finite = true;
  };
  std::size_t nplanes = static_cast<std::size_t>(grid.n_species) * g.nx;
  std::vector<Part> parts(nplanes);
  par::parallel_for(nplanes, [&](std::size_t pi) {
    int s = static_cast<int>(pi / g.nx);
    int i = static_cast<int>(pi % g.nx);
    const double* p = grid.species_data(s) + pl * i;
    Part part;
    bool x_edge = (i == 0 || i == g.nx - 1);
    for (int j = 0; j < g.nv1; ++j) {
      bool v1_edge = (j == 0 || j == g.nv1 - 1);
      const double* r = p + static_cast<std::size_t>(j) * g.nv2;
      for (int k = 0; k < g.nv2; ++k) {
        double v = r[k];
        part.sum += v;
        if (!std::isfinite(v)) part.finite = false;
        double a = std::abs(v);
        if (a > part.peak) part.peak = a;
        if ((x_edge || v1_edge || k == 0 || k == g.nv2 - 1) && a > part.edge) part.edge = a;
      }
    }
    parts[pi] = part;
  });
  AuditResult r;
  r.masses.assign(grid.n_species, 0.0);
  for (std::size_t pi = 0; pi < nplanes; ++pi) {
    int s = static_cast<int>(pi / g.nx);
    r.masses[s] += parts[pi].sum;
    r.peak = std::max(r.peak, parts[pi].peak);
    r.boundary = std::max(r.boundary, parts[pi].edge);
    r.finite = r.finite && parts[pi].finite;
  }
  for (double& m : r.masses) m *= g.cell_volume();
  return r;
}

}  // namespace

PhaseGrid step_semilag(const PhaseGrid& state, FieldState& field, const SystemSpec& spec,
                       const StepperConfig& cfg) {
  PhaseGrid mid(state.geom, state.n_species);
  advect_x(state, mid, spec, cfg, 0.5 * cfg.dt);
  field = compute_field(mid, spec);
  advect_v1(mid, field.E1, spec, cfg, cfg.dt);
  PhaseGrid out(state.geom, state.n_species);
  advect_x(mid, out, spec, cfg, 0.5 * cfg.dt);
  return out;
}

PhaseGrid step_semilag_frozen(const PhaseGrid& state, const std::vector<double>& E1,
                              const SystemSpec& spec, const StepperConfig& cfg, double dt) {
  PhaseGrid mid(state.geom, state.n_species);
  advect_x(state, mid, spec, cfg, 0.5 * dt);
  advect_v1(mid, E1, spec, cfg, dt);
  PhaseGrid out(state.geom, state.n_species);
  advect_x(mid, out, spec, cfg, 0.5 * dt);
  return out;
}

double Particles::total_weight() const {
  double acc = 0.0;
  for (double v : w) acc += v;
  return acc;
}

Particles quiet_start(const SystemSpec& spec, long target_count) {
  if (target_count < 1) throw InvalidValue("particle count must be positive");
  Particles out;
  long per_species = std::max<long>(1, target_count / static_cast<long>(spec.species.size()));
  for (std::size_t s = 0; s < spec.species.size(); ++s) {
    const InitialProfile& p = spec.species[s].profile;
    double ax = 2.0 * p.x_halfwidth, av1 = 2.0 * p.v1_halfwidth, av2 = 2.0 * p.v2_halfwidth;
    double c = std::cbrt(static_cast<double>(per_species) / (ax * av1 * av2));
    long px = std::max<long>(2, std::lround(c * ax));
    long pv1 = std::max<long>(2, std::lround(c * av1));
    long pv2 = std::max<long>(2, std::lround(c * av2));
    double hx = ax / px, hv1 = av1 / pv1, hv2 = av2 / pv2;
    double vol = hx * hv1 * hv2;
    for (long i = 0; i < px; ++i)
      for (long j = 0; j < pv1; ++j)
        for (long k = 0; k < pv2; ++k) {
          double x = p.x_center - p.x_halfwidth + (i + 0.5) * hx;
          double v1 = p.v1_center - p.v1_halfwidth + (j + 0.5) * hv1;
          double v2 = -p.v2_halfwidth + (k + 0.5) * hv2;
          double w = p.value(x, v1, v2) * vol;
          if (w <= 0.0) continue;
          out.x.push_back(x);
          out.v1.push_back(v1);
          out.v2.push_back(v2);
          out.w.push_back(w);
          out.species.push_back(static_cast<int>(s));
        }
  }
  return out;
}

namespace {

void drift_particles(Particles& p, const SystemSpec& spec, const GridGeometry& g, double h) {
  std::size_t n = p.size();
  par::parallel_for_ranges(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      p.x[i] += spec.transport_velocity(p.v1[i], p.v2[i]) * h;
  });
  for (std::size_t i = 0; i < n; ++i)
    if (p.x[i] < g.x_min || p.x[i] > g.x_max())
      throw ParticleLeftDomain("particle " + std::to_string(i) + " reached x = " +
                               std::to_string(p.x[i]));
}

std::vector<double> deposit_cic(const Particles& p, const SystemSpec& spec,
                                const GridGeometry& g) {
  std::vector<double> rho(g.nx, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    double q = spec.species[p.species[i]].charge * p.w[i] / g.dx;
    double u = (p.x[i] - g.x_min) / g.dx - 0.5;
    int i0 = static_cast<int>(std::floor(u));
    double f = u - i0;
    if (i0 >= 0 && i0 < g.nx) rho[i0] += q * (1.0 - f);
    if (i0 + 1 >= 0 && i0 + 1 < g.nx) rho[i0 + 1] += q * f;
  }
  return rho;
}

}  // namespace

void step_pic(Particles& particles, FieldState& field, const SystemSpec& spec,
              const GridGeometry& geom, const StepperConfig& cfg) {
  drift_particles(particles, spec, geom, 0.5 * cfg.dt);
  field.rho = deposit_cic(particles, spec, geom);
  field.E1 = solve_field(field.rho, geom.dx);
  field.M_signed = 0.0;
  for (double r : field.rho) field.M_signed += r;
  field.M_signed *= geom.dx;
  std::size_t n = particles.size();
  par::parallel_for_ranges(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      double e1 = lerp_profile(field.E1, geom, particles.x[i]);
      particles.v1[i] += spec.species[particles.species[i]].charge * e1 * cfg.dt;
    }
  });
  drift_particles(particles, spec, geom, 0.5 * cfg.dt);
}

PhaseGrid deposit_particles(const Particles& particles, const GridGeometry& geom,
                            int n_species) {
  PhaseGrid grid(geom, n_species);
  double inv_vol = 1.0 / geom.cell_volume();
  for (std::size_t i = 0; i < particles.size(); ++i) {
    int ix = static_cast<int>((particles.x[i] - geom.x_min) / geom.dx);
    int jv = static_cast<int>((particles.v1[i] - geom.v1_min) / geom.dv1);
    int kv = static_cast<int>((particles.v2[i] - geom.v2_min) / geom.dv2);
    ix = std::clamp(ix, 0, geom.nx - 1);
    jv = std::clamp(jv, 0, geom.nv1 - 1);
    kv = std::clamp(kv, 0, geom.nv2 - 1);
    grid.at(particles.species[i], ix, jv, kv) += particles.w[i] * inv_vol;
  }
  return grid;
}

double FieldHistory::E1_at(double t, double x) const {
  if (times.empty()) return 0.0;
  if (times.size() == 1 || t <= times.front()) return lerp_profile(E1.front(), geom, x);
  if (t >= times.back()) return lerp_profile(E1.back(), geom, x);
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - times.begin());
  std::size_t lo = hi - 1;
  double th = (t - times[lo]) / (times[hi] - times[lo]);
  return (1.0 - th) * lerp_profile(E1[lo], geom, x) + th * lerp_profile(E1[hi], geom, x);
}

double FieldHistory::dxE1_at(double t, double x) const {
  if (times.empty() || rho.empty()) return 0.0;
  auto sample = [&](std::size_t idx) -> double {
    // charge density is the field gradient; zero outside the support
    double u = (x - geom.x_min) / geom.dx - 0.5;
    if (u <= -1.0 || u >= static_cast<double>(geom.nx)) return 0.0;
    return lerp_profile(rho[idx], geom, x);
  };
  if (times.size() == 1 || t <= times.front()) return sample(0);
  if (t >= times.back()) return sample(times.size() - 1);
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - times.begin());
  std::size_t lo = hi - 1;
  double th = (t - times[lo]) / (times[hi] - times[lo]);
  return (1.0 - th) * sample(lo) + th * sample(hi);
}

std::vector<CharacteristicState> trace_characteristic(const FieldHistory& history,
                                                      const SystemSpec& spec,
                                                      CharacteristicState start,
                                                      double t_target) {
  if (history.times.empty()) throw TimeOutOfRange("field history is empty");
  double lo = history.t_min() - 1e-9, hi = history.t_max() + 1e-9;
  if (start.t < lo || start.t > hi || t_target < lo || t_target > hi)
    throw TimeOutOfRange("trace interval [" + std::to_string(start.t) + ", " +
                         std::to_string(t_target) + "] leaves the recorded span");
  if (start.species < 0 || start.species >= static_cast<int>(spec.species.size()))
    throw InvalidValue("species index out of range");
  double e = spec.species[start.species].charge;
  bool rel = spec.relativistic();
  double v2 = start.V2;

  double span = t_target - start.t;
  double base = history.dt > 0.0 ? history.dt : std::abs(span);
  int n = std::max(1, static_cast<int>(std::ceil(std::abs(span) / (0.25 * base) - 1e-12)));
  double ds = span / n;

  struct Y {
    double X, V1, P, W;
  };
  auto deriv = [&](double s, const Y& y) -> Y {
    Y d;
    d.X = rel ? relativistic_velocity(y.V1, v2) : y.V1;
    d.V1 = e * history.E1_at(s, y.X);
    double gamma = rel ? (1.0 + v2 * v2) * std::pow(1.0 + y.V1 * y.V1 + v2 * v2, -1.5) : 1.0;
    d.P = gamma * y.W;
    d.W = e * history.dxE1_at(s, y.X) * y.P;
    return d;
  };
  auto axpy = [](const Y& y, double a, const Y& d) -> Y {
    return {y.X + a * d.X, y.V1 + a * d.V1, y.P + a * d.P, y.W + a * d.W};
  };

  std::vector<CharacteristicState> path;
  path.reserve(n + 1);
  Y y{start.X, start.V1, start.dX_dv1, start.dV1_dv1};
  double s = start.t;
  auto record = [&](double t, const Y& yy) {
    CharacteristicState c = start;
    c.t = t;
    c.X = yy.X;
    c.V1 = yy.V1;
    c.dX_dv1 = yy.P;
    c.dV1_dv1 = yy.W;
    path.push_back(c);
  };
  record(s, y);
  for (int i = 0; i < n; ++i) {
    Y k1 = deriv(s, y);
    Y k2 = deriv(s + 0.5 * ds, axpy(y, 0.5 * ds, k1));
    Y k3 = deriv(s + 0.5 * ds, axpy(y, 0.5 * ds, k2));
    Y k4 = deriv(s + ds, axpy(y, ds, k3));
    y.X += ds / 6.0 * (k1.X + 2.0 * k2.X + 2.0 * k3.X + k4.X);
    y.V1 += ds / 6.0 * (k1.V1 + 2.0 * k2.V1 + 2.0 * k3.V1 + k4.V1);
    y.P += ds / 6.0 * (k1.P + 2.0 * k2.P + 2.0 * k3.P + k4.P);
    y.W += ds / 6.0 * (k1.W + 2.0 * k2.W + 2.0 * k3.W + k4.W);
    s = start.t + (i + 1) * ds;
    record(s, y);
  }
  return path;
}

RunResult run(const SystemSpec& spec, const GridGeometry& geom, const StepperConfig& cfg,
              const DiagnosticsConfig& diag, const RunSinks* sinks) {
  spec.validate();
  cfg.validate();
  geom.validate();

  RunResult R;
  int nsteps = 0;
  double dt = cfg.dt;
  if (cfg.t_end > 0.0) {
    nsteps = std::max(1, static_cast<int>(std::lround(cfg.t_end / cfg.dt)));
    dt = cfg.t_end / nsteps;  // keep steps uniform over the exact horizon
  }
  StepperConfig c2 = cfg;
  c2.dt = dt;

  PhaseGrid sampled = sample_initial(spec, geom);
  check_neutrality(spec, sampled);
  R.ceiling_bound = density_ceiling_bound(sampled, spec);

  bool pic = cfg.backend == Backend::pic;
  Particles parts;
  PhaseGrid grid;
  double w0 = 0.0;
  if (pic) {
    parts = quiet_start(spec, cfg.pic_particle_count);
    w0 = parts.total_weight();
    grid = deposit_particles(parts, geom, static_cast<int>(spec.species.size()));
  } else {
    grid = std::move(sampled);
  }

  FieldState field = compute_field(grid, spec);
  R.history.geom = geom;
  R.history.dt = dt;
  R.history.times.push_back(0.0);
  R.history.E1.push_back(field.E1);
  R.history.rho.push_back(field.rho);

  std::vector<double> m0(grid.n_species);
  for (int s = 0; s < grid.n_species; ++s) m0[s] = grid.species_mass(s);

  bool do_cone = spec.neutral() && spec.relativistic();
  ConeLedger ledger;
  ledger.apex = diag.cone_apex;
  EnergyProfile prof_prev, prof_cur;
  if (do_cone) {
    prof_prev = energy_profile(grid, spec, field.E1);
    prof_cur = prof_prev;
  }

  auto emit = [&](double t, const FieldState& fs) {
    DiagnosticsRecord rec = compute_record(grid, fs, spec, t, diag, R.ceiling_bound);
    R.records.push_back(rec);
    if (sinks && sinks->on_record) sinks->on_record(rec);
    if (do_cone) {
      cone_top_update(ledger, t, prof_cur, geom);
      R.cone.push_back(ledger);
      if (sinks && sinks->on_cone) sinks->on_cone(ledger);
    }
  };

  emit(0.0, field);
  if (sinks && sinks->on_snapshot) sinks->on_snapshot(0, 0.0, grid);

  std::vector<double> prev_mass = m0;
  for (int step = 1; step <= nsteps; ++step) {
    double t = step * dt;
    bool at_output = (step % cfg.output_every == 0) || step == nsteps;
    if (pic) {
      step_pic(parts, field, spec, geom, c2);
      double w = parts.total_weight();
      if (w != w0) throw Error("particle weight sum changed");
      R.history.times.push_back(t - 0.5 * dt);
      R.history.E1.push_back(field.E1);
      R.history.rho.push_back(field.rho);
      for (double v : parts.v1)
        if (!std::isfinite(v)) throw NumericalBlowup("non-finite particle momentum");
      for (double v : parts.x)
        if (!std::isfinite(v)) throw NumericalBlowup("non-finite particle position");
      if (at_output || step == nsteps || do_cone) {
        grid = deposit_particles(parts, geom, grid.n_species);
        field = compute_field(grid, spec);
      }
    } else {
      grid = step_semilag(grid, field, spec, c2);
      R.history.times.push_back(t - 0.5 * dt);
      R.history.E1.push_back(field.E1);
      R.history.rho.push_back(field.rho);
      AuditResult a = audit(grid);
      if (!a.finite) {
        if (sinks && sinks->on_blowup) sinks->on_blowup(t, grid);
        throw NumericalBlowup("non-finite density at t = " + std::to_string(t));
      }
      if (a.peak > 0.0 && a.boundary > 1e-14 * a.peak) {
        if (sinks && sinks->on_blowup) sinks->on_blowup(t, grid);
        throw BoundaryMassLeak("support reached the grid boundary at t = " + std::to_string(t));
      }
      for (int s = 0; s < grid.n_species; ++s) {
        double drift = std::abs(a.masses[s] - prev_mass[s]) / m0[s];
        if (drift > 1e-10)
          throw Error("per-step mass drift " + std::to_string(drift) + " for species " +
                      std::to_string(s));
        R.max_mass_drift = std::max(R.max_mass_drift, std::abs(a.masses[s] - m0[s]) / m0[s]);
        prev_mass[s] = a.masses[s];
      }
      if (at_output || do_cone) field = compute_field(grid, spec);
    }
    if (do_cone) {
      prof_cur = energy_profile(grid, spec, field.E1);
      cone_accumulate(ledger, geom, t - dt, prof_prev, t, prof_cur);
      prof_prev = prof_cur;
    }
    if (at_output) {
      emit(t, field);
      if (sinks && sinks->on_snapshot) sinks->on_snapshot(step, t, grid);
    }
  }

  if (nsteps > 0) {
    R.history.times.push_back(nsteps * dt);
    R.history.E1.push_back(field.E1);
    R.history.rho.push_back(field.rho);
  }
  R.state = std::move(grid);
  R.particles = std::move(parts);
  R.steps = nsteps;
  return R;
}

}  // namespace vp
