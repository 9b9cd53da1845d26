#include <cmath>

#include "doctest.h"
#include "vp/model.hpp"
#include "vp/phasespace.hpp"

using namespace vp;

// midpoint quadrature of the quartic bump over its support
static double bump_quad(double center, double halfwidth, int n) {
  double lo = center - halfwidth, h = 2.0 * halfwidth / n, s = 0.0;
  for (int i = 0; i < n; ++i) s += bump(lo + (i + 0.5) * h, center, halfwidth);
  return s * h;
}

static SpeciesSpec species(double charge, const InitialProfile& p) {
  SpeciesSpec s;
  s.name = charge >= 0.0 ? "pos" : "neg";
  s.charge = charge;
  s.profile = p;
  return s;
}

static InitialProfile unit_profile(double amplitude) {
  InitialProfile p;
  p.amplitude = amplitude;
  return p;
}

TEST_CASE("relativistic velocity hits the reference points") {
  CHECK(relativistic_velocity(0.0, 0.0) == 0.0);
  CHECK(relativistic_velocity(1.0, std::sqrt(2.0)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(relativistic_velocity(2.0, 2.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("relativistic velocity is odd in v1, even in v2, monotone, below light speed") {
  double prev = -2.0;
  for (int i = -40; i <= 40; ++i) {
    double v1 = 0.25 * i;
    for (int k = 0; k <= 8; ++k) {
      double v2 = 0.5 * k;
      double v = relativistic_velocity(v1, v2);
      CHECK(relativistic_velocity(-v1, v2) == -v);
      CHECK(relativistic_velocity(v1, -v2) == v);
      CHECK(std::abs(v) < 1.0);
    }
    double v = relativistic_velocity(v1, 1.0);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("bump is a unit-peak compact quartic with integral 16h/15") {
  CHECK(bump(0.3, 0.3, 0.7) == 1.0);
  CHECK(bump(1.0, 0.3, 0.7) == 0.0);
  CHECK(bump(-0.4, 0.3, 0.7) == 0.0);
  CHECK(bump(5.0, 0.3, 0.7) == 0.0);
  CHECK(bump(0.5, 0.3, 0.7) > 0.0);
  double q = bump_quad(0.3, 0.7, 200000);
  CHECK(q == doctest::Approx(bump_mass_per_halfwidth * 0.7).epsilon(1e-9));
}

TEST_CASE("profile value is the product of three bumps for both families") {
  InitialProfile p;
  p.amplitude = 2.5;
  p.x_center = 0.3;
  p.x_halfwidth = 1.7;
  p.v1_center = -0.4;
  p.v1_halfwidth = 0.9;
  p.v2_halfwidth = 0.6;
  for (auto fam : {InitialProfile::Family::product_bump,
                   InitialProfile::Family::shifted_product_bump}) {
    p.family = fam;
    double got = p.value(0.5, -0.1, 0.2);
    double want = 2.5 * bump(0.5, 0.3, 1.7) * bump(-0.1, -0.4, 0.9) * bump(0.2, 0.0, 0.6);
    CHECK(got == doctest::Approx(want).epsilon(1e-15));
    CHECK(p.value(2.1, 0.0, 0.0) == 0.0);
    CHECK(p.value(0.3, -0.4, 0.0) == 2.5);
  }
}

TEST_CASE("profile mass matches independent quadrature") {
  InitialProfile p;
  p.amplitude = 2.5;
  p.x_center = 0.3;
  p.x_halfwidth = 1.7;
  p.v1_center = -0.4;
  p.v1_halfwidth = 0.9;
  p.v2_halfwidth = 0.6;
  double q = 2.5 * bump_quad(0.3, 1.7, 40000) * bump_quad(-0.4, 0.9, 40000) *
             bump_quad(0.0, 0.6, 40000);
  CHECK(p.mass() == doctest::Approx(q).epsilon(1e-8));
  double c = bump_mass_per_halfwidth;
  CHECK(p.mass() == doctest::Approx(2.5 * c * 1.7 * c * 0.9 * c * 0.6).epsilon(1e-15));
}

TEST_CASE("peak v-integral is the closed-form sup over x") {
  InitialProfile p;
  p.amplitude = 3.0;
  p.v1_halfwidth = 0.9;
  p.v2_halfwidth = 0.6;
  double c = bump_mass_per_halfwidth;
  CHECK(p.peak_v_integral() == doctest::Approx(3.0 * c * 0.9 * c * 0.6).epsilon(1e-15));
  double q = 3.0 * bump_quad(0.0, 0.9, 40000) * bump_quad(0.0, 0.6, 40000);
  CHECK(p.peak_v_integral() == doctest::Approx(q).epsilon(1e-8));
}

TEST_CASE("profile validation rejects nonpositive sizes") {
  InitialProfile p;
  CHECK_NOTHROW(p.validate());
  p.amplitude = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidValue);
  p = InitialProfile{};
  p.x_halfwidth = -1.0;
  CHECK_THROWS_AS(p.validate(), InvalidValue);
  p = InitialProfile{};
  p.v1_halfwidth = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidValue);
  p = InitialProfile{};
  p.v2_halfwidth = -0.2;
  CHECK_THROWS_AS(p.validate(), InvalidValue);
}

TEST_CASE("kind helpers split the four families and round-trip names") {
  CHECK(is_relativistic(SystemKind::RVP));
  CHECK(is_relativistic(SystemKind::RVPN));
  CHECK_FALSE(is_relativistic(SystemKind::VP));
  CHECK_FALSE(is_relativistic(SystemKind::VPN));
  CHECK(is_neutral(SystemKind::RVPN));
  CHECK(is_neutral(SystemKind::VPN));
  CHECK_FALSE(is_neutral(SystemKind::RVP));
  CHECK_FALSE(is_neutral(SystemKind::VP));
  for (auto k : {SystemKind::RVP, SystemKind::VP, SystemKind::RVPN, SystemKind::VPN})
    CHECK(kind_from_name(kind_name(k)) == k);
  CHECK_THROWS_AS(kind_from_name("poisson"), InvalidValue);
}

TEST_CASE("transport velocity follows the family") {
  SystemSpec rel;
  rel.kind = SystemKind::RVP;
  SystemSpec cls;
  cls.kind = SystemKind::VP;
  CHECK(rel.transport_velocity(2.0, 2.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(cls.transport_velocity(2.0, 2.0) == 2.0);
}

TEST_CASE("monocharged specs take exactly one unit-positive species") {
  SystemSpec s;
  s.kind = SystemKind::RVP;
  s.species = {species(1.0, unit_profile(1.0))};
  CHECK_NOTHROW(s.validate());
  s.species.push_back(species(1.0, unit_profile(1.0)));
  CHECK_THROWS_AS(s.validate(), InvalidValue);
  s.species = {species(-1.0, unit_profile(1.0))};
  CHECK_THROWS_AS(s.validate(), InvalidValue);
  s.species = {};
  CHECK_THROWS_AS(s.validate(), InvalidValue);
}

TEST_CASE("neutral specs must cancel in closed form") {
  SystemSpec s;
  s.kind = SystemKind::RVPN;
  s.species = {species(1.0, unit_profile(1.0)), species(-1.0, unit_profile(1.0))};
  CHECK_NOTHROW(s.validate());

  // masses 2 and 1 against charges +1 and -2 still cancel
  s.species = {species(1.0, unit_profile(2.0)), species(-2.0, unit_profile(1.0))};
  CHECK_NOTHROW(s.validate());
  CHECK(s.signed_charge() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.abs_charge() == doctest::Approx(4.0 * std::pow(16.0 / 15.0, 3)).epsilon(1e-14));

  s.species = {species(1.0, unit_profile(2.0)), species(-1.0, unit_profile(1.0))};
  CHECK_THROWS_AS(s.validate(), NeutralityViolation);
  s.species = {species(1.0, unit_profile(1.0))};
  CHECK_THROWS_AS(s.validate(), InvalidValue);
  s.species = {species(0.0, unit_profile(1.0)), species(0.0, unit_profile(1.0))};
  CHECK_THROWS_AS(s.validate(), InvalidValue);
}

TEST_CASE("momentum bound drives the v1 extent of the domain") {
  // unit total charge, v1 support [-1, 1], horizon 40, padding 10 percent
  SystemSpec s;
  s.kind = SystemKind::VP;
  s.species = {species(1.0, unit_profile(std::pow(15.0 / 16.0, 3)))};
  CHECK(s.abs_charge() == doctest::Approx(1.0).epsilon(1e-14));
  DomainBounds b = derive_domain_bounds(s, 40.0, 0.1);
  CHECK(b.v1_max == doctest::Approx(1.1 * (1.0 + 20.0)).epsilon(1e-13));
  CHECK(b.m_abs == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b.t_end == 40.0);
  // classical transport moves at the padded momentum bound
  double half = 1.1 * (1.0 + b.v1_max * 40.0);
  CHECK(b.x_max == doctest::Approx(half).epsilon(1e-13));
  CHECK(b.x_min == doctest::Approx(-half).epsilon(1e-13));
}

TEST_CASE("relativistic x extent grows at most at light speed") {
  SystemSpec s;
  s.kind = SystemKind::RVP;
  s.species = {species(1.0, unit_profile(1.0))};
  DomainBounds b = derive_domain_bounds(s, 40.0, 0.0);
  CHECK(b.x_min == doctest::Approx(-41.0).epsilon(1e-14));
  CHECK(b.x_max == doctest::Approx(41.0).epsilon(1e-14));
}

TEST_CASE("zero horizon keeps the initial support plus padding") {
  SystemSpec s;
  s.kind = SystemKind::RVP;
  s.species = {species(1.0, unit_profile(1.0))};
  DomainBounds b = derive_domain_bounds(s, 0.0, 0.25);
  CHECK(b.v1_max == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(b.v2_max == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(b.x_max == doctest::Approx(1.25).epsilon(1e-14));
  CHECK_THROWS_AS(derive_domain_bounds(s, -1.0, 0.0), InvalidValue);
  CHECK_THROWS_AS(derive_domain_bounds(s, 1.0, -0.1), InvalidValue);
}

TEST_CASE("off-center supports widen about their own center") {
  SystemSpec s;
  s.kind = SystemKind::RVPN;
  InitialProfile plus = unit_profile(1.0);
  plus.x_center = -0.4;
  plus.v1_center = 0.3;
  InitialProfile minus = plus;
  minus.x_center = 0.4;
  minus.v1_center = -0.3;
  s.species = {species(1.0, plus), species(-1.0, minus)};
  DomainBounds b = derive_domain_bounds(s, 0.0, 0.0);
  CHECK(b.x_min == doctest::Approx(-1.4).epsilon(1e-14));
  CHECK(b.x_max == doctest::Approx(1.4).epsilon(1e-14));
  CHECK(b.v1_max == doctest::Approx(1.3).epsilon(1e-14));
}

TEST_CASE("sampled neutrality cancels for a balanced pair") {
  SystemSpec s;
  s.kind = SystemKind::RVPN;
  s.species = {species(1.0, unit_profile(1.0)), species(-1.0, unit_profile(1.0))};
  DomainBounds b = derive_domain_bounds(s, 0.0, 0.2);
  GridGeometry g = GridGeometry::cover(b, 32, 32, 16);
  PhaseGrid grid = sample_initial(s, g);
  double net = check_neutrality(s, grid);
  CHECK(std::abs(net) <= 1e-14);
}

TEST_CASE("sampled charge of a unit-mass species is one by quadrature") {
  SystemSpec s;
  s.kind = SystemKind::RVP;
  s.species = {species(1.0, unit_profile(std::pow(15.0 / 16.0, 3)))};
  DomainBounds b = derive_domain_bounds(s, 0.0, 0.1);
  GridGeometry g = GridGeometry::cover(b, 128, 128, 128);
  PhaseGrid grid = sample_initial(s, g);
  double net = check_neutrality(s, grid);
  CHECK(net == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("asymmetric charges cancel on the grid within tolerance") {
  SystemSpec s;
  s.kind = SystemKind::VPN;
  s.species = {species(1.0, unit_profile(2.0)), species(-2.0, unit_profile(1.0))};
  DomainBounds b = derive_domain_bounds(s, 0.0, 0.2);
  GridGeometry g = GridGeometry::cover(b, 48, 48, 24);
  PhaseGrid grid = sample_initial(s, g);
  double net = 0.0;
  CHECK_NOTHROW(net = check_neutrality(s, grid));
  CHECK(std::abs(net) <= 1e-10 * s.abs_charge());
}
