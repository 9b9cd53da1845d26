#pragma once
// System declaration: which of the four kinetic families is being run, the
// species list with signed charges, the initial data profiles, and a-priori
// bounds big enough to hold every characteristic up to the time horizon.

#include <stdexcept>
#include <string>
#include <vector>

namespace vp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NeutralityViolation : Error { using Error::Error; };
struct InvalidValue : Error { using Error::Error; };

// Four families: relativistic/classical transport crossed with
// monocharged/neutral species content.
enum class SystemKind { RVP, VP, RVPN, VPN };

bool is_relativistic(SystemKind k);
bool is_neutral(SystemKind k);
const char* kind_name(SystemKind k);
SystemKind kind_from_name(const std::string& name);  // throws InvalidValue

// v1 / sqrt(1 + v1^2 + v2^2): strictly increasing in v1, magnitude < 1.
double relativistic_velocity(double v1, double v2);

// C1 compact bump (1 - ((u-c)/h)^2)^2 on |u-c| < h, zero outside.
// Its integral over the support is (16/15)h.
double bump(double u, double center, double halfwidth);
inline constexpr double bump_mass_per_halfwidth = 16.0 / 15.0;

struct InitialProfile {
  enum class Family { product_bump, shifted_product_bump };
  Family family = Family::product_bump;
  double amplitude = 1.0;
  double x_center = 0.0;
  double x_halfwidth = 1.0;
  double v1_center = 0.0;
  double v1_halfwidth = 1.0;
  double v2_halfwidth = 1.0;

  // A * bump(x) * bump(v1) * bump(v2 about 0).
  double value(double x, double v1, double v2) const;
  // Closed-form integral over all of phase space.
  double mass() const;
  // Closed-form sup over x of the v-integral: A * (16b/15) * (16W2/15).
  double peak_v_integral() const;
  void validate() const;  // throws InvalidValue

  bool operator==(const InitialProfile&) const = default;
};

struct SpeciesSpec {
  std::string name;
  double charge = 1.0;
  InitialProfile profile;

  bool operator==(const SpeciesSpec&) const = default;
};

struct SystemSpec {
  SystemKind kind = SystemKind::RVP;
  std::vector<SpeciesSpec> species;

  bool relativistic() const { return is_relativistic(kind); }
  bool neutral() const { return is_neutral(kind); }

  // Transport speed of a characteristic: v1 itself, or its relativistic
  // counterpart, depending on the family.
  double transport_velocity(double v1, double v2) const;

  // Sum of |e_a| * analytic species mass; field magnitudes stay below half
  // of this for all time.
  double abs_charge() const;
  // Sum of e_a * analytic species mass.
  double signed_charge() const;

  // Species count versus kind, nonzero charges, positive profile widths,
  // and closed-form neutrality for the neutral kinds.
  void validate() const;  // throws InvalidValue, NeutralityViolation

  bool operator==(const SystemSpec&) const = default;
};

struct PhaseGrid;

// Signed total charge of the sampled data by quadrature. Neutral kinds must
// cancel to 1e-10 relative of the absolute charge or this throws.
double check_neutrality(const SystemSpec& spec, const PhaseGrid& sampled);

struct DomainBounds {
  double x_min = 0.0;
  double x_max = 0.0;
  double v1_max = 0.0;
  double v2_max = 0.0;
  double m_abs = 0.0;  // total absolute charge behind the kick bound
  double t_end = 0.0;
};

// Bounds that contain the initial support plus the worst-case drift over
// [0, t_end]: v1 grows at most (m_abs/2) per unit time, x moves at most at
// speed 1 (relativistic) or v1_max (classical). The margin multiplier
// (1 + margin) widens each half-extent about the support center.
DomainBounds derive_domain_bounds(const SystemSpec& spec, double t_end, double margin);

}  // namespace vp
