#pragma once
// Turns diagnostic series, cone ledgers, and characteristic traces into
// pass/fail reports with fitted growth exponents.

#include <map>
#include <string>
#include <vector>

#include "vp/diagnostics.hpp"
#include "vp/solver.hpp"

namespace vp {

struct InsufficientPoints : Error { using Error::Error; };
struct NonpositiveValues : Error { using Error::Error; };
struct IncompatibleSystemKind : Error { using Error::Error; };

struct ExponentFit {
  double t_lo = 0.0, t_hi = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
};

// Least-squares slope of log y against log t over the trailing window
// t >= (1 - window_fraction) * t_max. Needs 5 points and positive values.
ExponentFit fit_growth_exponent(const std::vector<double>& t, const std::vector<double>& y,
                                double window_fraction = 0.5);

struct TheoremReport {
  std::string id;
  bool passed = false;
  std::map<std::string, double> measured;
  std::map<std::string, double> tolerances;
  std::string notes;
};

// Density norms never fall below floor_fraction of their initial values
// (p = 1, 2, infinity).
TheoremReport check_thm1_density_floor(const std::vector<DiagnosticsRecord>& series,
                                       double floor_fraction);

// (a) Backward traces from final-time support points keep dV1_dv1 >= 1-1e-6.
// (b) The density sup stays below the initial-data ceiling with 1% slack.
TheoremReport check_thm2_jacobian_and_ceiling(const FieldHistory& history,
                                              const SystemSpec& spec,
                                              const PhaseGrid& final_state,
                                              const std::vector<DiagnosticsRecord>& series,
                                              int samples, unsigned long long seed = 12345);

// Forward traces of ordered pairs (x <= x*, v1 <= v1*, |v2| >= |v2*|) never
// cross in X or V1, within a small slack.
TheoremReport check_lemma1_order(const FieldHistory& history, const SystemSpec& spec,
                                 int pairs, unsigned long long seed = 54321);

// (a) p1 interval increments >= M/2 * dt - (0.02 M dt + dv1);
// (b) E1 at r(t) nondecreasing within 1e-6 M; (c) final E1 at r >= 0.4 M.
TheoremReport check_lemma2_lemma3_corollary(const std::vector<DiagnosticsRecord>& series,
                                            double m_abs, double dv1);

// Fitted Q1 exponent in [0.9, 1.05] and the end slope Q1(t_end)/t_end inside
// the kick-bound band.
TheoremReport check_thm3_thm5_linear(const std::vector<DiagnosticsRecord>& series,
                                     double m_abs);

// Fitted Q1 exponent <= 0.6 and Q1 <= C sqrt(1+t) with C calibrated at the
// window start plus 10% slack.
TheoremReport check_thm4_thm6_sqrt(const std::vector<DiagnosticsRecord>& series);

// Every virial interval slope >= M^3/12 * 0.95 and rho E1^2 stays at
// M^3/12 within 0.5%.
TheoremReport check_virial_rate(const std::vector<DiagnosticsRecord>& series);

// The pointwise momentum-weighted density inequality must have held at every
// x and output; relativistic runs record it per row as sigma_ok.
TheoremReport check_sigma_series(const std::vector<DiagnosticsRecord>& series);

// |I_plus + I_minus - cone_top| <= 1% of total energy at every output; ray
// integrals bounded by the initial energy + 1%; total energy drift <= 1%.
TheoremReport check_cone_identity(const std::vector<ConeLedger>& ledgers,
                                  const std::vector<DiagnosticsRecord>& series);

// (a) x2 moment <= A + B(1+t^2) with run-calibrated B; (b) the centered
// second difference of the moment matches 2*v1sq - E1sq within 1% of its
// scale. v1sq and E1sq are reconstructed from K, the constant v2 spread, and
// the total energy.
TheoremReport check_moment_identity(const std::vector<DiagnosticsRecord>& series,
                                    const SystemSpec& spec);

// |E1(t,x)| <= C_E min(1, (1+t^2)/x^2) pointwise at every recorded output
// after the calibration time t_end/4, with 10% slack.
TheoremReport check_envelope(const FieldHistory& history,
                             const std::vector<DiagnosticsRecord>& series);

// Informational only: fitted decay exponent of the density sup (the cited
// classical t^-1 decay); never gates.
TheoremReport informational_decay(const std::vector<DiagnosticsRecord>& series);

}  // namespace vp
