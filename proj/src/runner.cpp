#include "vp/runner.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "vp/io.hpp"
#include "vp/verify.hpp"

namespace vp {
namespace {

namespace fs = std::filesystem;

std::string iso_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// A time-only marker row: every column after t stays empty.
std::string abort_marker_row(double t, int n_species) {
  std::string row = format_double(t);
  for (int i = 0; i < 17 + n_species; ++i) row += ',';
  row += '\n';
  return row;
}

struct CheckInputs {
  RunConfig cfg;
  std::vector<DiagnosticsRecord> series;
  std::vector<ConeLedger> cone;
  fs::path dir;

  FieldHistory history() const { return read_field_history(dir / "fields.bin"); }
  PhaseGrid final_state() const { return read_snapshot(dir / "snapshot_final.bin"); }
};

TheoremReport run_named_check(const std::string& name, const CheckInputs& in) {
  const SystemSpec& spec = in.cfg.system;
  SystemKind kind = spec.kind;
  auto need = [&](bool ok, const char* what) {
    if (!ok)
      throw IncompatibleSystemKind("check \"" + name + "\" needs " + what + ", run is " +
                                   kind_name(kind));
  };
  double m_abs = spec.abs_charge();
  if (name == "thm1") {
    need(kind == SystemKind::RVP, "a monocharged relativistic run");
    return check_thm1_density_floor(in.series, 0.1);
  }
  if (name == "thm2") {
    need(kind == SystemKind::RVP, "a monocharged relativistic run");
    return check_thm2_jacobian_and_ceiling(in.history(), spec, in.final_state(), in.series, 100);
  }
  if (name == "lem1") {
    need(kind == SystemKind::RVP, "a monocharged relativistic run");
    return check_lemma1_order(in.history(), spec, 100);
  }
  if (name == "lem2") {
    need(kind == SystemKind::RVP, "a monocharged relativistic run");
    return check_lemma2_lemma3_corollary(in.series, m_abs, in.cfg.make_geometry().dv1);
  }
  if (name == "thm3") {
    need(kind == SystemKind::RVP || kind == SystemKind::VP, "a monocharged run");
    return check_thm3_thm5_linear(in.series, m_abs);
  }
  if (name == "virial") {
    need(kind == SystemKind::VP, "a classical monocharged run");
    return check_virial_rate(in.series);
  }
  if (name == "thm4") {
    need(spec.neutral(), "a neutral run");
    return check_thm4_thm6_sqrt(in.series);
  }
  if (name == "lem4") {
    need(spec.relativistic(), "a relativistic run");
    return check_sigma_series(in.series);
  }
  if (name == "cone") {
    need(kind == SystemKind::RVPN, "a neutral relativistic run");
    return check_cone_identity(in.cone, in.series);
  }
  if (name == "moment") {
    need(kind == SystemKind::VPN, "a classical neutral run");
    return check_moment_identity(in.series, spec);
  }
  if (name == "envelope") {
    need(kind == SystemKind::VPN, "a classical neutral run");
    return check_envelope(in.history(), in.series);
  }
  if (name == "decay") return informational_decay(in.series);
  throw InvalidValue("unknown check \"" + name +
                     "\" (thm1, thm2, thm3, thm4, lem1, lem2, lem4, virial, cone, moment, "
                     "envelope, decay)");
}

std::vector<std::string> default_checks(SystemKind kind) {
  switch (kind) {
    case SystemKind::RVP:
      return {"thm1", "thm2", "lem1", "lem2", "thm3", "lem4"};
    case SystemKind::VP:
      return {"thm3", "virial", "decay"};
    case SystemKind::RVPN:
      return {"thm4", "lem4", "cone"};
    case SystemKind::VPN:
      return {"thm4", "moment", "envelope"};
  }
  return {};
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t comma = csv.find(',', pos);
    std::string piece =
        comma == std::string::npos ? csv.substr(pos) : csv.substr(pos, comma - pos);
    std::size_t a = piece.find_first_not_of(" \t");
    if (a != std::string::npos) {
      std::size_t b = piece.find_last_not_of(" \t");
      out.push_back(piece.substr(a, b - a + 1));
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  RunConfig cfg;
  try {
    cfg = parse_config(read_file(config_path));
  } catch (const Error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  fs::path dir = out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::is_directory(dir)) {
    std::fprintf(stderr, "cannot create output directory %s\n", dir.string().c_str());
    return 2;
  }

  std::string started = iso_now();
  int n_species = static_cast<int>(cfg.system.species.size());
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, const std::string& bytes) {
    atomic_write(dir / name, bytes);
    files.push_back(name);
  };

  GridGeometry geom;
  try {
    geom = cfg.make_geometry();
  } catch (const Error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  std::vector<DiagnosticsRecord> records;
  std::vector<ConeLedger> cone;
  bool blew_up = false;
  double blowup_t = 0.0;
  RunSinks sinks;
  sinks.on_record = [&](const DiagnosticsRecord& r) { records.push_back(r); };
  sinks.on_cone = [&](const ConeLedger& l) { cone.push_back(l); };
  sinks.on_blowup = [&](double t, const PhaseGrid&) {
    blew_up = true;
    blowup_t = t;
  };

  emit("config.cfg", serialize_config(cfg));
  if (cfg.emit_snapshots) {
    write_snapshot(dir / "snapshot_initial.bin", sample_initial(cfg.system, geom));
    files.push_back("snapshot_initial.bin");
  }

  RunResult result;
  std::string failure;
  try {
    result = run(cfg.system, geom, cfg.stepper, cfg.diagnostics, &sinks);
  } catch (const NumericalBlowup& e) {
    blew_up = true;
    failure = e.what();
  } catch (const Error& e) {
    failure = e.what();
    std::string csv = series_csv(records, n_species);
    emit("series.csv", csv);
    emit("manifest.json",
         manifest_json(cfg, dir, files, started, iso_now(), std::string("failed: ") + failure));
    std::fprintf(stderr, "run failed: %s\n", failure.c_str());
    return 3;
  }

  std::string csv = series_csv(records, n_species);
  if (blew_up) csv += abort_marker_row(blowup_t, n_species);
  emit("series.csv", csv);
  if (!cfg.diagnostics.extra_ps.empty())
    emit("extra_norms.csv", extra_norms_csv(records, cfg.diagnostics.extra_ps));
  if (!cone.empty()) emit("cone.csv", cone_csv(cone));
  if (!blew_up) {
    if (cfg.emit_fields) {
      write_field_history(dir / "fields.bin", result.history);
      files.push_back("fields.bin");
    }
    if (cfg.emit_snapshots) {
      write_snapshot(dir / "snapshot_final.bin", result.state);
      files.push_back("snapshot_final.bin");
    }
  }
  std::string status = blew_up ? std::string("aborted: ") + failure : "complete";
  emit("manifest.json", manifest_json(cfg, dir, files, started, iso_now(), status));
  if (blew_up) {
    std::fprintf(stderr, "run aborted: %s\n", failure.c_str());
    return 3;
  }
  std::printf("run complete: %d steps, %zu outputs, worst mass drift %s\n", result.steps,
              records.size(), format_double(result.max_mass_drift).c_str());
  return 0;
}

int cmd_check(const std::string& run_dir, const std::string& theorems) {
  CheckInputs in;
  in.dir = run_dir;
  try {
    std::string manifest = read_file(in.dir / "manifest.json");
    nlohmann::json j = nlohmann::json::parse(manifest);
    std::string status = j.value("status", "");
    if (status != "complete") {
      std::fprintf(stderr, "run directory is not complete (status \"%s\")\n", status.c_str());
      return 2;
    }
    in.cfg = parse_config(j.at("config").get<std::string>());
    int n_species = 0;
    in.series = parse_series_csv(read_file(in.dir / "series.csv"), n_species);
    if (n_species != static_cast<int>(in.cfg.system.species.size()))
      throw FormatError("series species count does not match the config echo");
    double ceiling = density_ceiling_bound(PhaseGrid{}, in.cfg.system);
    for (auto& r : in.series) r.rho_ceiling_bound = ceiling;
    if (fs::exists(in.dir / "cone.csv"))
      in.cone = parse_cone_csv(read_file(in.dir / "cone.csv"));
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "manifest error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "cannot load run directory: %s\n", e.what());
    return 2;
  }

  std::vector<std::string> names =
      theorems.empty() ? default_checks(in.cfg.system.kind) : split_list(theorems);
  std::vector<TheoremReport> reports;
  for (const auto& name : names) {
    try {
      reports.push_back(run_named_check(name, in));
    } catch (const IncompatibleSystemKind& e) {
      std::fprintf(stderr, "%s\n", e.what());
      return 2;
    } catch (const Error& e) {
      std::fprintf(stderr, "check \"%s\" failed to run: %s\n", name.c_str(), e.what());
      return 2;
    }
  }
  try {
    atomic_write(in.dir / "report.json", report_json(reports));
    std::string txt = report_txt(reports);
    atomic_write(in.dir / "report.txt", txt);
    std::fputs(txt.c_str(), stdout);
  } catch (const Error& e) {
    std::fprintf(stderr, "cannot write report: %s\n", e.what());
    return 2;
  }
  for (const auto& r : reports)
    if (!r.passed) return 1;
  return 0;
}

int cmd_plot(const std::string& run_dir, const std::string& quantity, const std::string& out) {
  try {
    fs::path dir = run_dir;
    int n_species = 0;
    std::vector<DiagnosticsRecord> series =
        parse_series_csv(read_file(dir / "series.csv"), n_species);
    std::string svg = render_series_svg(series, n_species, quantity);
    fs::path target = out.empty() ? dir / ("plot_" + quantity + ".svg") : fs::path(out);
    atomic_write(target, svg);
    std::printf("wrote %s\n", target.string().c_str());
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "plot error: %s\n", e.what());
    return 2;
  }
}

int cmd_demo(const std::string& name, const std::string& out) {
  try {
    std::string text = demo_config_text(name);
    fs::path target = out.empty() ? fs::path(name + ".cfg") : fs::path(out);
    atomic_write(target, text);
    std::printf("wrote %s\n", target.string().c_str());
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "demo error: %s\n", e.what());
    return 2;
  }
}

}  // namespace vp
