#include <cmath>
#include <vector>

#include "doctest.h"
#include "vp/diagnostics.hpp"
#include "vp/model.hpp"
#include "vp/parallel.hpp"
#include "vp/solver.hpp"

using namespace vp;

static SystemSpec rvp() {
  SystemSpec s;
  s.kind = SystemKind::RVP;
  s.species = {{"e", 1.0, InitialProfile{}}};
  return s;
}

static SystemSpec neutral_pair(SystemKind kind) {
  SystemSpec s;
  s.kind = kind;
  s.species = {{"plus", 1.0, InitialProfile{}}, {"minus", -1.0, InitialProfile{}}};
  return s;
}

static GridGeometry dyadic_box(double xh, int nx, double vh, int nv1, int nv2) {
  GridGeometry g;
  g.nx = nx;
  g.nv1 = nv1;
  g.nv2 = nv2;
  g.x_min = -xh;
  g.dx = 2.0 * xh / nx;
  g.v1_min = -vh;
  g.dv1 = 2.0 * vh / nv1;
  g.v2_min = -vh;
  g.dv2 = 2.0 * vh / nv2;
  return g;
}

static FieldHistory zero_history(const GridGeometry& g, double t0, double t1, double e_level) {
  FieldHistory h;
  h.geom = g;
  h.dt = t1 - t0;
  h.times = {t0, 0.5 * (t0 + t1), t1};
  h.E1.assign(3, std::vector<double>(g.nx, e_level));
  h.rho.assign(3, std::vector<double>(g.nx, 0.0));
  return h;
}

TEST_CASE("a zero-length split step is the identity") {
  SystemSpec s = rvp();
  GridGeometry g = dyadic_box(1.25, 16, 1.25, 16, 8);
  PhaseGrid grid = sample_initial(s, g);
  FieldState field = compute_field(grid, s);
  StepperConfig cfg;
  cfg.dt = 0.0;
  PhaseGrid next = step_semilag(grid, field, s, cfg);
  CHECK(next.values == grid.values);
}

TEST_CASE("frozen-field steps reverse within scheme truncation") {
  SystemSpec s = rvp();
  GridGeometry g = dyadic_box(1.25, 32, 1.25, 32, 8);
  PhaseGrid grid = sample_initial(s, g);
  std::vector<double> E1(g.nx, 0.3);
  StepperConfig cfg;
  double dt = 0.05;
  PhaseGrid fwd = step_semilag_frozen(grid, E1, s, cfg, dt);
  PhaseGrid back = step_semilag_frozen(fwd, E1, s, cfg, -dt);
  double mass0 = grid.species_mass(0);
  CHECK(back.species_mass(0) == doctest::Approx(mass0).epsilon(1e-12));
  double l1 = 0.0;
  for (std::size_t i = 0; i < grid.values.size(); ++i)
    l1 += std::abs(back.values[i] - grid.values[i]);
  l1 *= g.cell_volume();
  CHECK(l1 <= 0.15 * mass0);
}

TEST_CASE("cancelling species free-stream with an exactly zero field") {
  SystemSpec s = neutral_pair(SystemKind::VPN);
  GridGeometry g = dyadic_box(5.0, 40, 1.2, 16, 8);
  PhaseGrid grid = sample_initial(s, g);

  // per-column sums along x are the conserved v1-v2 marginal
  auto v_marginal = [&](const PhaseGrid& p) {
    std::vector<double> m(2 * p.plane(), 0.0);
    for (int sp = 0; sp < 2; ++sp)
      for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nv1; ++j)
          for (int k = 0; k < g.nv2; ++k)
            m[sp * p.plane() + j * g.nv2 + k] += p.at(sp, i, j, k);
    return m;
  };
  auto before = v_marginal(grid);

  FieldState field = compute_field(grid, s);
  StepperConfig cfg;
  cfg.dt = 0.3;
  for (int step = 0; step < 4; ++step) {
    grid = step_semilag(grid, field, s, cfg);
    for (double e : field.E1) CHECK(e == 0.0);
  }
  auto after = v_marginal(grid);
  for (std::size_t c = 0; c < before.size(); ++c)
    CHECK(after[c] == doctest::Approx(before[c]).epsilon(1e-12));
  CHECK(grid.boundary_max() == 0.0);
}

TEST_CASE("characteristics free-stream at the relativistic velocity") {
  SystemSpec s = rvp();
  GridGeometry g = dyadic_box(4.0, 16, 2.0, 8, 8);
  FieldHistory h = zero_history(g, 0.0, 2.0, 0.0);
  CharacteristicState st;
  st.t = 0.0;
  st.X = 0.2;
  st.V1 = 1.0;
  st.V2 = std::sqrt(2.0);
  auto path = trace_characteristic(h, s, st, 2.0);
  const CharacteristicState& end = path.back();
  CHECK(end.t == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(end.X == doctest::Approx(0.2 + 0.5 * 2.0).epsilon(1e-12));
  CHECK(end.V1 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(end.V2 == st.V2);
  CHECK(end.dV1_dv1 == doctest::Approx(1.0).epsilon(1e-13));
  // velocity slope in v1 at fixed v2: (1 + v2^2) (1 + |v|^2)^(-3/2) = 3/8
  CHECK(end.dX_dv1 == doctest::Approx(2.0 * 3.0 / 8.0).epsilon(1e-12));
}

TEST_CASE("classical characteristics in a constant field are parabolas") {
  SystemSpec s;
  s.kind = SystemKind::VP;
  s.species = {{"e", 1.0, InitialProfile{}}};
  GridGeometry g = dyadic_box(16.0, 32, 4.0, 8, 8);
  FieldHistory h = zero_history(g, 0.0, 3.0, 0.4);
  CharacteristicState st;
  st.X = 0.0;
  st.V1 = 0.5;
  auto path = trace_characteristic(h, s, st, 3.0);
  const CharacteristicState& end = path.back();
  CHECK(end.V1 == doctest::Approx(0.5 + 0.4 * 3.0).epsilon(1e-12));
  CHECK(end.X == doctest::Approx(0.5 * 3.0 + 0.5 * 0.4 * 9.0).epsilon(1e-12));
  CHECK(end.dV1_dv1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(end.dX_dv1 == doctest::Approx(3.0).epsilon(1e-12));

  // retracing backward recovers the start
  auto rev = trace_characteristic(h, s, end, 0.0);
  CHECK(rev.back().X == doctest::Approx(0.0).epsilon(1e-11));
  CHECK(rev.back().V1 == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(trace_characteristic(h, s, st, 4.0), TimeOutOfRange);
  CharacteristicState early = st;
  early.t = -1.0;
  CHECK_THROWS_AS(trace_characteristic(h, s, early, 1.0), TimeOutOfRange);
}

TEST_CASE("free-stream traces keep their initial ordering gap") {
  SystemSpec s = rvp();
  GridGeometry g = dyadic_box(8.0, 16, 2.0, 8, 8);
  FieldHistory h = zero_history(g, 0.0, 4.0, 0.0);
  CharacteristicState a, b;
  a.X = -1.0;
  b.X = -0.25;
  a.V1 = b.V1 = 0.7;
  a.V2 = b.V2 = 0.1;
  auto pa = trace_characteristic(h, s, a, 4.0);
  auto pb = trace_characteristic(h, s, b, 4.0);
  CHECK(pb.back().X - pa.back().X == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(pb.back().V1 == pa.back().V1);
}

TEST_CASE("quiet start reproduces the analytic masses on its lattice") {
  SystemSpec s = rvp();
  Particles p = quiet_start(s, 200000);
  CHECK(p.size() >= 100000);
  CHECK(p.size() <= 400000);
  double want = s.species[0].profile.mass();
  CHECK(p.total_weight() == doctest::Approx(want).epsilon(1e-3));
  int outside = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p.species[i] == 0);
    CHECK(p.w[i] > 0.0);
    if (std::abs(p.x[i]) >= 1.0 || std::abs(p.v1[i]) >= 1.0 || std::abs(p.v2[i]) >= 1.0)
      ++outside;
  }
  CHECK(outside == 0);

  SystemSpec pair = neutral_pair(SystemKind::RVPN);
  Particles q = quiet_start(pair, 100000);
  double m0 = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) (q.species[i] == 0 ? m0 : m1) += q.w[i];
  CHECK(m0 == doctest::Approx(pair.species[0].profile.mass()).epsilon(1e-3));
  CHECK(m1 == doctest::Approx(pair.species[1].profile.mass()).epsilon(1e-3));
}

TEST_CASE("separated opposite sheets feel exactly half the pair charge") {
  SystemSpec s = neutral_pair(SystemKind::VPN);
  GridGeometry g = dyadic_box(2.0, 16, 2.0, 8, 8);
  Particles p;
  double w = 0.6;
  double xa = g.x_center(5), xb = g.x_center(10);
  p.x = {xa, xb};
  p.v1 = {0.0, 0.0};
  p.v2 = {0.0, 0.0};
  p.w = {w, w};
  p.species = {0, 1};
  FieldState field;
  StepperConfig cfg;
  cfg.dt = 0.25;
  step_pic(p, field, s, g, cfg);
  // each sheet sees E1 = w/2 at its own position and drifts with its new v1
  CHECK(p.v1[0] == 0.5 * w * cfg.dt);
  CHECK(p.v1[1] == -0.5 * w * cfg.dt);
  CHECK(p.x[0] == doctest::Approx(xa + 0.5 * w * cfg.dt * 0.5 * cfg.dt).epsilon(1e-15));
  CHECK(p.x[1] == doctest::Approx(xb - 0.5 * w * cfg.dt * 0.5 * cfg.dt).epsilon(1e-15));
  CHECK(p.v2[0] == 0.0);
  CHECK(p.w[0] == w);
  CHECK(p.w[1] == w);
  CHECK(field.M_signed == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("co-located opposite sheets cancel and coast freely") {
  SystemSpec s = neutral_pair(SystemKind::RVPN);
  GridGeometry g = dyadic_box(2.0, 16, 2.0, 8, 8);
  Particles p;
  double x0 = g.x_center(6), v1 = 0.8, v2 = 0.6;
  p.x = {x0, x0};
  p.v1 = {v1, v1};
  p.v2 = {v2, v2};
  p.w = {0.5, 0.5};
  p.species = {0, 1};
  FieldState field;
  StepperConfig cfg;
  cfg.dt = 0.25;
  step_pic(p, field, s, g, cfg);
  double vhat = relativistic_velocity(v1, v2);
  for (int i = 0; i < 2; ++i) {
    CHECK(p.v1[i] == v1);
    CHECK(p.x[i] == doctest::Approx(x0 + vhat * cfg.dt).epsilon(1e-14));
  }
  for (double e : field.E1) CHECK(e == 0.0);
}

TEST_CASE("particles that leave the domain raise an error") {
  SystemSpec s;
  s.kind = SystemKind::VP;
  s.species = {{"e", 1.0, InitialProfile{}}};
  GridGeometry g = dyadic_box(2.0, 16, 2.0, 8, 8);
  Particles p;
  p.x = {g.x_center(15)};
  p.v1 = {50.0};
  p.v2 = {0.0};
  p.w = {0.1};
  p.species = {0};
  FieldState field;
  StepperConfig cfg;
  cfg.dt = 0.5;
  CHECK_THROWS_AS(step_pic(p, field, s, g, cfg), ParticleLeftDomain);
}

TEST_CASE("nearest-cell deposit drops each weight into one cell") {
  GridGeometry g = dyadic_box(2.0, 8, 2.0, 8, 4);
  Particles p;
  p.x = {g.x_center(3) + 0.1 * g.dx};
  p.v1 = {g.v1_center(2) - 0.2 * g.dv1};
  p.v2 = {g.v2_center(1)};
  p.w = {0.9};
  p.species = {0};
  PhaseGrid grid = deposit_particles(p, g, 1);
  CHECK(grid.at(0, 3, 2, 1) == doctest::Approx(0.9 / g.cell_volume()).epsilon(1e-14));
  CHECK(grid.species_mass(0) == doctest::Approx(0.9).epsilon(1e-13));
}

TEST_CASE("a zero horizon run emits exactly the initial record") {
  SystemSpec s = rvp();
  DomainBounds b = derive_domain_bounds(s, 0.0, 0.2);
  GridGeometry g = GridGeometry::cover(b, 16, 16, 8);
  StepperConfig cfg;
  cfg.dt = 0.1;
  cfg.t_end = 0.0;
  DiagnosticsConfig diag;
  RunResult res = run(s, g, cfg, diag);
  CHECK(res.steps == 0);
  CHECK(res.records.size() == 1);
  CHECK(res.records[0].t == 0.0);
  CHECK(res.history.times.front() == 0.0);
}

TEST_CASE("short kicked runs respect the output schedule and drift caps") {
  SystemSpec s = rvp();
  // wide margin: the guard zone in cells beats one cell of spread per pass
  DomainBounds b = derive_domain_bounds(s, 1.0, 1.0);
  GridGeometry g = GridGeometry::cover(b, 96, 48, 8);
  StepperConfig cfg;
  cfg.dt = 0.125;
  cfg.t_end = 1.0;
  cfg.output_every = 2;
  DiagnosticsConfig diag;
  RunResult res = run(s, g, cfg, diag);
  CHECK(res.steps == 8);
  CHECK(res.records.size() == 5);
  CHECK(res.records.back().t == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.max_mass_drift <= 1e-10);
  CHECK(res.ceiling_bound ==
        doctest::Approx(s.species[0].profile.peak_v_integral()).epsilon(1e-14));
  CHECK(res.cone.empty());
  for (const auto& rec : res.records) {
    CHECK(rec.extremes.p1 <= rec.extremes.P1 + 1e-12);
    CHECK(rec.extremes.P1 <= rec.extremes.Q1 + 1e-12);
    CHECK(rec.extremes.r <= rec.extremes.R + 1e-12);
    CHECK(rec.E1_max_abs <= 0.5 * res.records[0].charge_per_species[0] + 1e-10);
    CHECK(rec.has_sigma);
    CHECK(rec.sigma_ok);
  }
}

TEST_CASE("repeat runs and worker counts do not change a single bit") {
  SystemSpec s = rvp();
  DomainBounds b = derive_domain_bounds(s, 0.5, 0.2);
  GridGeometry g = GridGeometry::cover(b, 48, 32, 8);
  StepperConfig cfg;
  cfg.dt = 0.125;
  cfg.t_end = 0.5;
  DiagnosticsConfig diag;
  auto flatten = [](const RunResult& r) {
    std::vector<double> out;
    for (const auto& rec : r.records) {
      out.push_back(rec.t);
      out.push_back(rec.extremes.Q1);
      out.push_back(rec.extremes.p1);
      out.push_back(rec.extremes.R);
      out.push_back(rec.rho_L1);
      out.push_back(rec.rho_L2);
      out.push_back(rec.rho_Linf);
      out.push_back(rec.kinetic_K);
      out.push_back(rec.virial);
      out.push_back(rec.rho_E1sq);
      out.push_back(rec.E1_max_abs);
      for (double c : rec.charge_per_species) out.push_back(c);
    }
    return out;
  };
  RunResult a = run(s, g, cfg, diag);
  RunResult b2 = run(s, g, cfg, diag);
  CHECK(flatten(a) == flatten(b2));
  CHECK(a.state.values == b2.state.values);
  par::set_worker_limit(1);
  RunResult c = run(s, g, cfg, diag);
  par::set_worker_limit(0);
  CHECK(flatten(a) == flatten(c));
  CHECK(a.state.values == c.state.values);
}

TEST_CASE("support reaching the grid edge aborts the run") {
  SystemSpec s = rvp();
  DomainBounds b = derive_domain_bounds(s, 0.05, 0.0);
  GridGeometry g = GridGeometry::cover(b, 48, 32, 8);
  StepperConfig cfg;
  cfg.dt = 0.1;
  cfg.t_end = 2.0;
  DiagnosticsConfig diag;
  CHECK_THROWS_AS(run(s, g, cfg, diag), BoundaryMassLeak);
}

TEST_CASE("the subcycle cap rejects oversized shifts") {
  SystemSpec s = rvp();
  DomainBounds b = derive_domain_bounds(s, 1.0, 0.1);
  GridGeometry g = GridGeometry::cover(b, 256, 16, 8);
  StepperConfig cfg;
  cfg.dt = 1.0;
  cfg.t_end = 1.0;
  cfg.max_subcycles = 2;
  DiagnosticsConfig diag;
  CHECK_THROWS_AS(run(s, g, cfg, diag), CFLViolation);
}
