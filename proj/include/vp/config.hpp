#pragma once
// Run configuration: a flat "section.key = value" text format with strict
// unknown-key rejection, line-cited errors, and a lossless serializer.

#include <string>

#include "vp/diagnostics.hpp"
#include "vp/model.hpp"
#include "vp/solver.hpp"

namespace vp {

struct ParseError : Error { using Error::Error; };
struct UnknownKey : Error { using Error::Error; };

struct RunConfig {
  SystemSpec system;
  int nx = 256, nv1 = 128, nv2 = 16;
  double margin = 0.1;  // relative padding of the derived domain bounds
  StepperConfig stepper;
  DiagnosticsConfig diagnostics;
  bool emit_snapshots = false;
  bool emit_fields = true;

  GridGeometry make_geometry() const;
  void validate() const;  // throws InvalidValue with the dotted key name

  bool operator==(const RunConfig&) const = default;
};

// Strict parse of the documented key set; defaults fill everything a file
// omits. Errors cite the offending line and key.
RunConfig parse_config(const std::string& text);

// Every key in a fixed order; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& c);

// Bundled demo configurations: rvp_small, vp_small, rvpn_pair, vpn_pair,
// freestream_sanity. Throws InvalidValue for other names.
RunConfig demo_config(const std::string& name);
std::string demo_config_text(const std::string& name);

}  // namespace vp
