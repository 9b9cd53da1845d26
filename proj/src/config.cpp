#include "vp/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

namespace vp {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct Entry {
  int line = 0;
  std::string value;
  bool used = false;
};

using Table = std::map<std::string, Entry>;

Table tokenize(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::string s = trim(raw);
    if (s.empty()) continue;
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ParseError("line " + std::to_string(line) + ": expected key = value, got \"" + s +
                       "\"");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty())
      throw ParseError("line " + std::to_string(line) + ": missing key before '='");
    auto [it, fresh] = t.emplace(key, Entry{line, value, false});
    if (!fresh)
      throw ParseError("line " + std::to_string(line) + ": duplicate key \"" + key +
                       "\" (first set on line " + std::to_string(it->second.line) + ")");
  }
  return t;
}

std::string cite(const std::string& key, const Entry& e) {
  return "line " + std::to_string(e.line) + ": " + key + " = " + e.value;
}

double as_double(const std::string& key, const Entry& e) {
  const char* b = e.value.data();
  const char* end = b + e.value.size();
  if (b != end && *b == '+') ++b;
  double out = 0.0;
  auto [p, ec] = std::from_chars(b, end, out);
  if (ec != std::errc() || p != end)
    throw InvalidValue(cite(key, e) + " is not a number");
  return out;
}

long as_long(const std::string& key, const Entry& e) {
  const char* b = e.value.data();
  const char* end = b + e.value.size();
  if (b != end && *b == '+') ++b;
  long out = 0;
  auto [p, ec] = std::from_chars(b, end, out);
  if (ec != std::errc() || p != end)
    throw InvalidValue(cite(key, e) + " is not an integer");
  return out;
}

int as_int(const std::string& key, const Entry& e) {
  long v = as_long(key, e);
  if (v < -2000000000L || v > 2000000000L)
    throw InvalidValue(cite(key, e) + " is out of range");
  return static_cast<int>(v);
}

bool as_bool(const std::string& key, const Entry& e) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  throw InvalidValue(cite(key, e) + " is not true/false");
}

std::vector<double> as_double_list(const std::string& key, const Entry& e) {
  std::vector<double> out;
  std::string v = e.value;
  if (trim(v).empty()) return out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    std::size_t comma = v.find(',', pos);
    std::string piece = trim(comma == std::string::npos ? v.substr(pos)
                                                        : v.substr(pos, comma - pos));
    Entry pe{e.line, piece, false};
    out.push_back(as_double(key, pe));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

// Looks the key up and marks it consumed; absent keys keep the default.
template <typename F>
void take(Table& t, const std::string& key, F&& apply) {
  auto it = t.find(key);
  if (it == t.end()) return;
  it->second.used = true;
  apply(key, it->second);
}

InitialProfile::Family family_from_name(const std::string& key, const Entry& e) {
  if (e.value == "product_bump") return InitialProfile::Family::product_bump;
  if (e.value == "shifted_product_bump") return InitialProfile::Family::shifted_product_bump;
  throw InvalidValue(cite(key, e) + " is not a profile family");
}

const char* family_name(InitialProfile::Family f) {
  return f == InitialProfile::Family::product_bump ? "product_bump" : "shifted_product_bump";
}

}  // namespace

GridGeometry RunConfig::make_geometry() const {
  DomainBounds b = derive_domain_bounds(system, stepper.t_end, margin);
  return GridGeometry::cover(b, nx, nv1, nv2);
}

void RunConfig::validate() const {
  system.validate();
  stepper.validate();
  if (nx < 4 || nv1 < 4 || nv2 < 4)
    throw InvalidValue("grid.nx, grid.nv1, grid.nv2 must each be at least 4");
  if (!(margin >= 0.0)) throw InvalidValue("grid.margin must be nonnegative");
  if (!(diagnostics.support_threshold > 0.0 && diagnostics.support_threshold < 1.0))
    throw InvalidValue("diagnostics.support_threshold must lie in (0, 1)");
  for (double p : diagnostics.extra_ps)
    if (!(p >= 1.0)) throw InvalidValue("diagnostics.extra_ps entries must be >= 1");
  if (!std::isfinite(diagnostics.cone_apex))
    throw InvalidValue("diagnostics.cone_apex must be finite");
}

RunConfig parse_config(const std::string& text) {
  Table t = tokenize(text);
  RunConfig c;

  take(t, "system.kind", [&](const std::string& k, const Entry& e) {
    try {
      c.system.kind = kind_from_name(e.value);
    } catch (const InvalidValue&) {
      throw InvalidValue(cite(k, e) + " is not a system kind (rvp, vp, rvpn, vpn)");
    }
  });

  int count = c.system.neutral() ? 2 : 1;
  take(t, "species.count", [&](const std::string& k, const Entry& e) {
    count = as_int(k, e);
    if (count < 1) throw InvalidValue(cite(k, e) + " must be at least 1");
    if (count > 64) throw InvalidValue(cite(k, e) + " is unreasonably large (max 64)");
  });

  c.system.species.resize(count);
  for (int i = 0; i < count; ++i) {
    SpeciesSpec& s = c.system.species[i];
    s.name = "s" + std::to_string(i);
    if (c.system.neutral()) s.charge = (i % 2 == 0) ? 1.0 : -1.0;
    std::string p = "species." + std::to_string(i) + ".";
    take(t, p + "name", [&](const std::string&, const Entry& e) { s.name = e.value; });
    take(t, p + "charge", [&](const std::string& k, const Entry& e) { s.charge = as_double(k, e); });
    take(t, p + "family",
         [&](const std::string& k, const Entry& e) { s.profile.family = family_from_name(k, e); });
    take(t, p + "amplitude", [&](const std::string& k, const Entry& e) {
      s.profile.amplitude = as_double(k, e);
    });
    take(t, p + "x_center", [&](const std::string& k, const Entry& e) {
      s.profile.x_center = as_double(k, e);
    });
    take(t, p + "x_halfwidth", [&](const std::string& k, const Entry& e) {
      s.profile.x_halfwidth = as_double(k, e);
    });
    take(t, p + "v1_center", [&](const std::string& k, const Entry& e) {
      s.profile.v1_center = as_double(k, e);
    });
    take(t, p + "v1_halfwidth", [&](const std::string& k, const Entry& e) {
      s.profile.v1_halfwidth = as_double(k, e);
    });
    take(t, p + "v2_halfwidth", [&](const std::string& k, const Entry& e) {
      s.profile.v2_halfwidth = as_double(k, e);
    });
  }

  take(t, "grid.nx", [&](const std::string& k, const Entry& e) { c.nx = as_int(k, e); });
  take(t, "grid.nv1", [&](const std::string& k, const Entry& e) { c.nv1 = as_int(k, e); });
  take(t, "grid.nv2", [&](const std::string& k, const Entry& e) { c.nv2 = as_int(k, e); });
  take(t, "grid.margin", [&](const std::string& k, const Entry& e) { c.margin = as_double(k, e); });

  take(t, "time.dt", [&](const std::string& k, const Entry& e) {
    c.stepper.dt = as_double(k, e);
    if (!(c.stepper.dt > 0.0)) throw InvalidValue(cite(k, e) + ": dt must be positive");
  });
  take(t, "time.t_end", [&](const std::string& k, const Entry& e) {
    c.stepper.t_end = as_double(k, e);
    if (!(c.stepper.t_end >= 0.0)) throw InvalidValue(cite(k, e) + ": t_end must be nonnegative");
  });
  take(t, "time.output_every", [&](const std::string& k, const Entry& e) {
    c.stepper.output_every = as_int(k, e);
  });

  take(t, "numerics.scheme", [&](const std::string& k, const Entry& e) {
    try {
      c.stepper.scheme = scheme_from_name(e.value);
    } catch (const InvalidValue&) {
      throw InvalidValue(cite(k, e) + " is not a scheme (linear_conservative, cubic)");
    }
  });
  take(t, "numerics.backend", [&](const std::string& k, const Entry& e) {
    try {
      c.stepper.backend = backend_from_name(e.value);
    } catch (const InvalidValue&) {
      throw InvalidValue(cite(k, e) + " is not a backend (semilag, pic)");
    }
  });
  take(t, "numerics.pic_particles", [&](const std::string& k, const Entry& e) {
    c.stepper.pic_particle_count = as_long(k, e);
  });
  take(t, "numerics.seed", [&](const std::string& k, const Entry& e) {
    long v = as_long(k, e);
    if (v < 0) throw InvalidValue(cite(k, e) + " must be nonnegative");
    c.stepper.rng_seed = static_cast<unsigned long long>(v);
  });
  take(t, "numerics.max_subcycles", [&](const std::string& k, const Entry& e) {
    c.stepper.max_subcycles = as_int(k, e);
  });

  take(t, "diagnostics.support_threshold", [&](const std::string& k, const Entry& e) {
    c.diagnostics.support_threshold = as_double(k, e);
  });
  take(t, "diagnostics.extra_ps", [&](const std::string& k, const Entry& e) {
    c.diagnostics.extra_ps = as_double_list(k, e);
  });
  take(t, "diagnostics.cone_apex", [&](const std::string& k, const Entry& e) {
    c.diagnostics.cone_apex = as_double(k, e);
  });

  take(t, "output.snapshots",
       [&](const std::string& k, const Entry& e) { c.emit_snapshots = as_bool(k, e); });
  take(t, "output.fields",
       [&](const std::string& k, const Entry& e) { c.emit_fields = as_bool(k, e); });

  for (const auto& [key, e] : t)
    if (!e.used)
      throw UnknownKey("line " + std::to_string(e.line) + ": unknown key \"" + key + "\"");

  c.validate();
  return c;
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  auto num = [](double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
  };
  out << "system.kind = " << kind_name(c.system.kind) << "\n";
  out << "species.count = " << c.system.species.size() << "\n";
  for (std::size_t i = 0; i < c.system.species.size(); ++i) {
    const SpeciesSpec& s = c.system.species[i];
    std::string p = "species." + std::to_string(i) + ".";
    out << p << "name = " << s.name << "\n";
    out << p << "charge = " << num(s.charge) << "\n";
    out << p << "family = " << family_name(s.profile.family) << "\n";
    out << p << "amplitude = " << num(s.profile.amplitude) << "\n";
    out << p << "x_center = " << num(s.profile.x_center) << "\n";
    out << p << "x_halfwidth = " << num(s.profile.x_halfwidth) << "\n";
    out << p << "v1_center = " << num(s.profile.v1_center) << "\n";
    out << p << "v1_halfwidth = " << num(s.profile.v1_halfwidth) << "\n";
    out << p << "v2_halfwidth = " << num(s.profile.v2_halfwidth) << "\n";
  }
  out << "grid.nx = " << c.nx << "\n";
  out << "grid.nv1 = " << c.nv1 << "\n";
  out << "grid.nv2 = " << c.nv2 << "\n";
  out << "grid.margin = " << num(c.margin) << "\n";
  out << "time.dt = " << num(c.stepper.dt) << "\n";
  out << "time.t_end = " << num(c.stepper.t_end) << "\n";
  out << "time.output_every = " << c.stepper.output_every << "\n";
  out << "numerics.scheme = " << scheme_name(c.stepper.scheme) << "\n";
  out << "numerics.backend = " << backend_name(c.stepper.backend) << "\n";
  out << "numerics.pic_particles = " << c.stepper.pic_particle_count << "\n";
  out << "numerics.seed = " << c.stepper.rng_seed << "\n";
  out << "numerics.max_subcycles = " << c.stepper.max_subcycles << "\n";
  out << "diagnostics.support_threshold = " << num(c.diagnostics.support_threshold) << "\n";
  out << "diagnostics.extra_ps =";
  for (std::size_t i = 0; i < c.diagnostics.extra_ps.size(); ++i)
    out << (i ? "," : " ") << num(c.diagnostics.extra_ps[i]);
  out << "\n";
  out << "diagnostics.cone_apex = " << num(c.diagnostics.cone_apex) << "\n";
  out << "output.snapshots = " << (c.emit_snapshots ? "true" : "false") << "\n";
  out << "output.fields = " << (c.emit_fields ? "true" : "false") << "\n";
  return out.str();
}

namespace {

SpeciesSpec make_species(const std::string& name, double charge, double A, double xc, double a,
                         double v1c, double b, double w2, InitialProfile::Family fam) {
  SpeciesSpec s;
  s.name = name;
  s.charge = charge;
  s.profile.family = fam;
  s.profile.amplitude = A;
  s.profile.x_center = xc;
  s.profile.x_halfwidth = a;
  s.profile.v1_center = v1c;
  s.profile.v1_halfwidth = b;
  s.profile.v2_halfwidth = w2;
  return s;
}

}  // namespace

RunConfig demo_config(const std::string& name) {
  using Fam = InitialProfile::Family;
  RunConfig c;
  if (name == "rvp_small") {
    c.system.kind = SystemKind::RVP;
    c.system.species = {make_species("s0", 1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0,
                                     Fam::product_bump)};
    c.nx = 256;
    c.nv1 = 128;
    c.nv2 = 16;
    c.margin = 0.2;
    c.stepper.dt = 40.0 / 52.0;
    c.stepper.t_end = 40.0;
    c.stepper.output_every = 2;
    c.emit_snapshots = true;
  } else if (name == "vp_small") {
    c.system.kind = SystemKind::VP;
    c.system.species = {make_species("s0", 1.0, 0.5, 0.0, 4.0, 0.0, 0.25, 1.0,
                                     Fam::product_bump)};
    c.nx = 1280;
    c.nv1 = 512;
    c.nv2 = 8;
    c.margin = 0.2;
    c.stepper.dt = 20.0 / 208.0;
    c.stepper.t_end = 20.0;
    c.stepper.output_every = 8;
  } else if (name == "rvpn_pair") {
    c.system.kind = SystemKind::RVPN;
    c.system.species = {
        make_species("plus", 1.0, 0.15, -0.4, 1.2, 0.3, 0.6, 0.5, Fam::shifted_product_bump),
        make_species("minus", -1.0, 0.15, 0.4, 1.2, -0.3, 0.6, 0.5, Fam::shifted_product_bump)};
    c.nx = 2048;
    c.nv1 = 320;
    c.nv2 = 8;
    c.margin = 0.2;
    c.stepper.dt = 0.5;
    c.stepper.t_end = 60.0;
    c.stepper.output_every = 1;
    c.diagnostics.cone_apex = 0.0;
  } else if (name == "vpn_pair") {
    c.system.kind = SystemKind::VPN;
    c.system.species = {
        make_species("plus", 1.0, 0.15, -0.4, 1.2, 0.3, 0.6, 0.5, Fam::shifted_product_bump),
        make_species("minus", -1.0, 0.15, 0.4, 1.2, -0.3, 0.6, 0.5, Fam::shifted_product_bump)};
    c.nx = 4096;
    c.nv1 = 128;
    c.nv2 = 8;
    c.margin = 0.2;
    c.stepper.dt = 0.125;
    c.stepper.t_end = 60.0;
    c.stepper.output_every = 4;
  } else if (name == "freestream_sanity") {
    c.system.kind = SystemKind::RVPN;
    c.system.species = {
        make_species("plus", 1.0, 0.2, 0.0, 1.0, 0.0, 1.0, 0.5, Fam::product_bump),
        make_species("minus", -1.0, 0.2, 0.0, 1.0, 0.0, 1.0, 0.5, Fam::product_bump)};
    c.nx = 256;
    c.nv1 = 64;
    c.nv2 = 8;
    c.margin = 0.3;
    c.stepper.dt = 0.05;
    c.stepper.t_end = 10.0;
    c.stepper.output_every = 20;
  } else {
    throw InvalidValue("unknown demo \"" + name +
                       "\" (rvp_small, vp_small, rvpn_pair, vpn_pair, freestream_sanity)");
  }
  c.validate();
  return c;
}

std::string demo_config_text(const std::string& name) {
  return serialize_config(demo_config(name));
}

}  // namespace vp
