#include "vp/model.hpp"

#include <cmath>

namespace vp {

bool is_relativistic(SystemKind k) {
  return k == SystemKind::RVP || k == SystemKind::RVPN;
}

bool is_neutral(SystemKind k) {
  return k == SystemKind::RVPN || k == SystemKind::VPN;
}

const char* kind_name(SystemKind k) {
  switch (k) {
    case SystemKind::RVP: return "rvp";
    case SystemKind::VP: return "vp";
    case SystemKind::RVPN: return "rvpn";
    case SystemKind::VPN: return "vpn";
  }
  return "?";
}

SystemKind kind_from_name(const std::string& name) {
  if (name == "rvp") return SystemKind::RVP;
  if (name == "vp") return SystemKind::VP;
  if (name == "rvpn") return SystemKind::RVPN;
  if (name == "vpn") return SystemKind::VPN;
  throw InvalidValue("unknown system kind '" + name + "' (expected rvp, vp, rvpn, or vpn)");
}

double relativistic_velocity(double v1, double v2) {
  return v1 / std::sqrt(1.0 + v1 * v1 + v2 * v2);
}

double bump(double u, double center, double halfwidth) {
  if (halfwidth <= 0.0) return 0.0;
  double s = (u - center) / halfwidth;
  double q = 1.0 - s * s;
  return q > 0.0 ? q * q : 0.0;
}

double InitialProfile::value(double x, double v1, double v2) const {
  return amplitude * bump(x, x_center, x_halfwidth) * bump(v1, v1_center, v1_halfwidth) *
         bump(v2, 0.0, v2_halfwidth);
}

double InitialProfile::mass() const {
  double c = bump_mass_per_halfwidth;
  return amplitude * (c * x_halfwidth) * (c * v1_halfwidth) * (c * v2_halfwidth);
}

double InitialProfile::peak_v_integral() const {
  double c = bump_mass_per_halfwidth;
  return amplitude * (c * v1_halfwidth) * (c * v2_halfwidth);
}

void InitialProfile::validate() const {
  if (!(amplitude > 0.0)) throw InvalidValue("profile amplitude must be positive");
  if (!(x_halfwidth > 0.0)) throw InvalidValue("profile x_halfwidth must be positive");
  if (!(v1_halfwidth > 0.0)) throw InvalidValue("profile v1_halfwidth must be positive");
  if (!(v2_halfwidth > 0.0)) throw InvalidValue("profile v2_halfwidth must be positive");
}

double SystemSpec::transport_velocity(double v1, double v2) const {
  return relativistic() ? relativistic_velocity(v1, v2) : v1;
}

double SystemSpec::abs_charge() const {
  double total = 0.0;
  for (const auto& s : species) total += std::abs(s.charge) * s.profile.mass();
  return total;
}

double SystemSpec::signed_charge() const {
  double total = 0.0;
  for (const auto& s : species) total += s.charge * s.profile.mass();
  return total;
}

void SystemSpec::validate() const {
  if (species.empty()) throw InvalidValue("system needs at least one species");
  if (!neutral()) {
    if (species.size() != 1)
      throw InvalidValue("monocharged kinds take exactly one species");
    if (species[0].charge != 1.0)
      throw InvalidValue("monocharged kinds require charge +1");
  } else if (species.size() < 2) {
    throw InvalidValue("neutral kinds need at least two species");
  }
  for (const auto& s : species) {
    if (s.charge == 0.0) throw InvalidValue("species charge must be nonzero");
    s.profile.validate();
  }
  if (neutral()) {
    double net = signed_charge();
    if (std::abs(net) > 1e-10 * abs_charge())
      throw NeutralityViolation("signed charges do not cancel: net " + std::to_string(net));
  }
}

DomainBounds derive_domain_bounds(const SystemSpec& spec, double t_end, double margin) {
  if (t_end < 0.0) throw InvalidValue("t_end must be nonnegative");
  if (margin < 0.0) throw InvalidValue("margin must be nonnegative");
  double x_lo = 0.0, x_hi = 0.0, v1_bound = 0.0, w2 = 0.0;
  bool first = true;
  for (const auto& s : spec.species) {
    const auto& p = s.profile;
    double lo = p.x_center - p.x_halfwidth, hi = p.x_center + p.x_halfwidth;
    if (first || lo < x_lo) x_lo = lo;
    if (first || hi > x_hi) x_hi = hi;
    double b1 = std::abs(p.v1_center) + p.v1_halfwidth;
    if (b1 > v1_bound) v1_bound = b1;
    if (p.v2_halfwidth > w2) w2 = p.v2_halfwidth;
    first = false;
  }

  DomainBounds b;
  b.m_abs = spec.abs_charge();
  b.t_end = t_end;
  // Field magnitude never exceeds m_abs/2, so momenta drift at most that fast.
  b.v1_max = (1.0 + margin) * (v1_bound + 0.5 * b.m_abs * t_end);
  b.v2_max = (1.0 + margin) * w2;
  double speed = spec.relativistic() ? 1.0 : b.v1_max;
  double center = 0.5 * (x_lo + x_hi);
  double half = (1.0 + margin) * (0.5 * (x_hi - x_lo) + speed * t_end);
  b.x_min = center - half;
  b.x_max = center + half;
  return b;
}

}  // namespace vp
