#pragma once
// Time integration: a split-step semi-Lagrangian grid stepper, a particle
// backend, the recorded field history, and characteristic tracing with the
// variational sensitivities.

#include <functional>
#include <vector>

#include "vp/diagnostics.hpp"
#include "vp/field.hpp"
#include "vp/phasespace.hpp"

namespace vp {

struct CFLViolation : Error { using Error::Error; };
struct BoundaryMassLeak : Error { using Error::Error; };
struct ParticleLeftDomain : Error { using Error::Error; };
struct NumericalBlowup : Error { using Error::Error; };
struct TimeOutOfRange : Error { using Error::Error; };

enum class Backend { semilag, pic };
const char* backend_name(Backend b);
Backend backend_from_name(const std::string& name);  // throws InvalidValue

struct StepperConfig {
  double dt = 0.1;
  double t_end = 1.0;
  Scheme scheme = Scheme::linear_conservative;
  int output_every = 1;
  Backend backend = Backend::semilag;
  long pic_particle_count = 200000;
  unsigned long long rng_seed = 0;  // reserved for optional start jitter
  int max_subcycles = 64;
  void validate() const;

  bool operator==(const StepperConfig&) const = default;
};

// Field samples over the run: the initial field, every mid-step field (where
// the split step applies its kick), and the final field. rho is kept next to
// E1 so the field gradient is available without differencing.
struct FieldHistory {
  GridGeometry geom;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> E1;
  std::vector<std::vector<double>> rho;

  double t_min() const { return times.empty() ? 0.0 : times.front(); }
  double t_max() const { return times.empty() ? 0.0 : times.back(); }
  // Linear in t between samples, linear in x between cell centers, clamped
  // to the end profiles outside.
  double E1_at(double t, double x) const;
  // d(E1)/dx equals the charge density, interpolated the same way.
  double dxE1_at(double t, double x) const;
};

struct CharacteristicState {
  double t = 0.0;
  double X = 0.0;
  double V1 = 0.0;
  double V2 = 0.0;     // constant: no v2 force in any of the four systems
  double dX_dv1 = 0.0;
  double dV1_dv1 = 1.0;
  int species = 0;
};

// Fourth-order integration of the characteristic and its v1-sensitivities
// through the recorded fields, from start.t to t_target (either direction),
// with internal step dt/4. Sensitivities start at (0, 1) at start.t. The
// returned path includes both endpoints.
std::vector<CharacteristicState> trace_characteristic(const FieldHistory& history,
                                                      const SystemSpec& spec,
                                                      CharacteristicState start,
                                                      double t_target);

struct Particles {
  std::vector<double> x, v1, v2, w;
  std::vector<int> species;
  std::size_t size() const { return x.size(); }
  double total_weight() const;
};

// Deterministic lattice start: per species, particles sit at the cell
// centers of a regular sublattice of the support box with weights
// f0 * lattice cell volume. Aspect ratios follow the support extents.
Particles quiet_start(const SystemSpec& spec, long target_count);

// One split step of the grid backend: half x-transport, field solve from the
// mid-state, full v1 kick, half x-transport. `field` is replaced by the
// mid-step field that applied the kick.
PhaseGrid step_semilag(const PhaseGrid& state, FieldState& field, const SystemSpec& spec,
                       const StepperConfig& cfg);

// Same splitting with a frozen kick field and an explicit (possibly
// negative) dt; no field solve. Used by reversibility tests.
PhaseGrid step_semilag_frozen(const PhaseGrid& state, const std::vector<double>& E1,
                              const SystemSpec& spec, const StepperConfig& cfg, double dt);

// One split step of the particle backend; cloud-in-cell charge deposit in x,
// field linearly interpolated at particle positions. Weights never change.
void step_pic(Particles& particles, FieldState& field, const SystemSpec& spec,
              const GridGeometry& geom, const StepperConfig& cfg);

// Nearest-cell deposit of particles onto a grid for diagnostics.
PhaseGrid deposit_particles(const Particles& particles, const GridGeometry& geom,
                            int n_species);

struct RunSinks {
  std::function<void(const DiagnosticsRecord&)> on_record;
  std::function<void(const ConeLedger&)> on_cone;
  std::function<void(int step, double t, const PhaseGrid&)> on_snapshot;
  std::function<void(double t, const PhaseGrid&)> on_blowup;
};

struct RunResult {
  PhaseGrid state;      // final grid state (deposited view for pic)
  Particles particles;  // pic backend only
  FieldHistory history;
  std::vector<DiagnosticsRecord> records;
  std::vector<ConeLedger> cone;  // neutral relativistic runs, one per output
  double ceiling_bound = 0.0;
  double max_mass_drift = 0.0;  // worst per-species relative drift seen
  int steps = 0;
};

// Full integration loop; deterministic for a fixed config, independent of
// worker count. Diagnostics are emitted at step 0, every output_every steps,
// and at the final step.
RunResult run(const SystemSpec& spec, const GridGeometry& geom, const StepperConfig& cfg,
              const DiagnosticsConfig& diag, const RunSinks* sinks = nullptr);

}  // namespace vp
