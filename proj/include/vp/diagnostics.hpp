#pragma once
// Observables computed from a frozen state: support extremes, density norms,
// energies, the virial pair, the light-cone ledger, and moments.

#include <vector>

#include "vp/field.hpp"
#include "vp/phasespace.hpp"

namespace vp {

struct EmptySupport : Error { using Error::Error; };
struct WrongSystemKind : Error { using Error::Error; };

struct SupportExtremes {
  double Q1 = 0.0;  // largest |v1| on the occupied set
  double p1 = 0.0;  // largest v1 at the rightmost occupied x-column
  double P1 = 0.0;  // largest v1 anywhere on the occupied set
  double R = 0.0;   // rightmost occupied x
  double r = 0.0;   // rightmost x whose column reaches v1 = P1 (within one cell)
  double W2 = 0.0;  // largest |v2|
  double support_threshold = 0.0;
};

// Occupied set = cells where the summed species density exceeds
// threshold_rel times the current max cell value. Extremes are cell centers.
SupportExtremes support_extremes(const PhaseGrid& grid, double threshold_rel);

// (sum |rho_i|^p dx)^(1/p); pass p = infinity for the max norm.
double lp_norm(const std::vector<double>& rho, double p, double dx);

struct EnergyDensities {
  std::vector<double> e;            // sqrt(1+|v|^2) moment plus E1^2/2
  std::vector<double> m;            // v1 moment (momentum density)
  std::vector<double> k;            // sqrt(1+|v|^2) moment alone
  std::vector<double> sigma_minus;  // (sqrt(1+|v|^2) - v1) moment
  std::vector<double> sigma_plus;   // (sqrt(1+|v|^2) + v1) moment
};

// Relativistic runs only; species summed unweighted. Pointwise
// sigma_minus + sigma_plus = 2k and e = k + E1^2/2 hold exactly.
EnergyDensities energy_densities(const PhaseGrid& grid, const SystemSpec& spec,
                                 const std::vector<double>& E1);

struct SigmaCheck {
  double worst_minus = 0.0;  // max over x of (density) / (3 sqrt(sigma_minus k))
  double worst_plus = 0.0;
  bool ok = false;           // both ratios <= 1 + 1e-12
};

SigmaCheck check_sigma_inequality(const PhaseGrid& grid, const SystemSpec& spec);

struct VirialValues {
  double virial = 0.0;     // sum over phase space of v1 E1 f
  double rho_E1sq = 0.0;   // integral of rho E1^2 in x
};

VirialValues virial(const PhaseGrid& grid, const FieldState& field, const SystemSpec& spec);

// Cell-centered energy density e (kinetic plus field) and momentum density m
// along x, the flux pair of the local balance law d/dt e + d/dx m = 0.
struct EnergyProfile {
  std::vector<double> e;
  std::vector<double> m;
};

EnergyProfile energy_profile(const PhaseGrid& grid, const SystemSpec& spec,
                             const std::vector<double>& E1);

// e and m at one position by linear interpolation between cell centers,
// fading to zero one cell outside the outermost centers.
struct RayPoint {
  double e = 0.0;
  double m = 0.0;
};

RayPoint profile_at(const EnergyProfile& prof, const GridGeometry& g, double x);

struct ConeLedger {
  double apex = 0.0;
  double T = 0.0;
  double I_plus = 0.0;   // accumulated (e - m) along the right-going ray
  double I_minus = 0.0;  // accumulated (e + m) along the left-going ray
  double cone_top = 0.0; // integral of e over [apex - T, apex + T] at time T
};

// Advance the ray integrals from t0 to t1. The integrand blends the two
// bracketing profiles linearly in time and linearly in x along the moving
// rays, so it is piecewise quadratic in t between ray and cell-center
// crossings; Simpson on each piece integrates the blend exactly.
void cone_accumulate(ConeLedger& ledger, const GridGeometry& g, double t0,
                     const EnergyProfile& p0, double t1, const EnergyProfile& p1);
// Fresh cone_top: overlap-weighted sum of e over [apex - T, apex + T].
void cone_top_update(ConeLedger& ledger, double T, const EnergyProfile& prof,
                     const GridGeometry& g);

struct MomentValues {
  double x2_moment = 0.0;   // x^2 moment of the summed densities
  double kinetic_K = 0.0;   // |v|^2 moment of the summed densities
  double v1sq = 0.0;        // v1^2 moment
  double E1sq = 0.0;        // integral of E1^2 in x
  double d2dt2_rhs = 0.0;   // 2*v1sq - E1sq, the second-derivative identity source
};

MomentValues x2_moment_and_K(const PhaseGrid& grid, const FieldState& field,
                             const SystemSpec& spec);

struct DiagnosticsRecord {
  double t = 0.0;
  SupportExtremes extremes;
  double rho_L1 = 0.0, rho_L2 = 0.0, rho_Linf = 0.0;
  std::vector<double> rho_Lp_extra;  // matches the configured extra p list
  std::vector<double> charge_per_species;
  double kinetic_K = 0.0;
  bool has_total_energy = false;
  double total_energy = 0.0;  // neutral kinds only
  double virial = 0.0;
  double rho_E1sq = 0.0;
  double x2_moment = 0.0;
  double E1_at_r = 0.0;
  double E1_max_abs = 0.0;
  double rho_ceiling_bound = 0.0;  // initial-data ceiling, constant per run
  bool has_sigma = false;
  bool sigma_ok = false;  // relativistic kinds only
};

struct DiagnosticsConfig {
  double support_threshold = 1e-6;
  std::vector<double> extra_ps;
  double cone_apex = 0.0;

  bool operator==(const DiagnosticsConfig&) const = default;
};

DiagnosticsRecord compute_record(const PhaseGrid& grid, const FieldState& field,
                                 const SystemSpec& spec, double t,
                                 const DiagnosticsConfig& cfg, double ceiling_bound);

// Ceiling on the density for all time: integral over v of the x-sup of the
// initial data, which is the closed-form peak v-integral summed over species.
double density_ceiling_bound(const PhaseGrid& initial, const SystemSpec& spec);

}  // namespace vp
