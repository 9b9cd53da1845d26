#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "vp/config.hpp"
#include "vp/io.hpp"

using namespace vp;
namespace fs = std::filesystem;

static const char* kDemos[] = {"rvp_small", "vp_small", "rvpn_pair", "vpn_pair",
                               "freestream_sanity"};

static fs::path fresh_dir(const std::string& leaf) {
  fs::path d = fs::temp_directory_path() / "vp_io_tests" / leaf;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

static bool mentions(const Error& e, const std::string& needle) {
  return std::string(e.what()).find(needle) != std::string::npos;
}

static bool same_geom(const GridGeometry& a, const GridGeometry& b) {
  return a.nx == b.nx && a.nv1 == b.nv1 && a.nv2 == b.nv2 && a.x_min == b.x_min &&
         a.dx == b.dx && a.v1_min == b.v1_min && a.dv1 == b.dv1 && a.v2_min == b.v2_min &&
         a.dv2 == b.dv2;
}

TEST_CASE("demo configurations serialize and parse losslessly") {
  for (const char* name : kDemos) {
    RunConfig c = demo_config(name);
    CHECK_NOTHROW(c.validate());
    CHECK(parse_config(serialize_config(c)) == c);
    CHECK(parse_config(demo_config_text(name)) == c);
  }
  CHECK_THROWS_AS(demo_config("nope"), InvalidValue);
}

TEST_CASE("a minimal config fills every default") {
  RunConfig c = parse_config("system.kind = rvp\n");
  CHECK(c.system.kind == SystemKind::RVP);
  REQUIRE(c.system.species.size() == 1);
  CHECK(c.system.species[0].name == "s0");
  CHECK(c.system.species[0].charge == 1.0);
  CHECK(c.nx == 256);
  CHECK(c.nv1 == 128);
  CHECK(c.nv2 == 16);
  CHECK(c.margin == 0.1);
  CHECK(c.stepper == StepperConfig{});
  CHECK_FALSE(c.emit_snapshots);
  CHECK(c.emit_fields);

  // neutral kinds default to an alternating pair
  RunConfig n = parse_config("system.kind = vpn\n");
  REQUIRE(n.system.species.size() == 2);
  CHECK(n.system.species[0].charge == 1.0);
  CHECK(n.system.species[1].charge == -1.0);

  // comments and blank lines are ignored
  RunConfig k = parse_config("# leading note\n\nsystem.kind = rvp\n");
  CHECK(k == c);
}

TEST_CASE("config errors cite the offending line and key") {
  try {
    parse_config("system.kind = rvp\ntime.dt = -1\n");
    FAIL("negative dt accepted");
  } catch (const InvalidValue& e) {
    CHECK(mentions(e, "time.dt"));
    CHECK(mentions(e, "line 2"));
  }
  try {
    parse_config("system.kind = rvp\ndx = 0.1\n");
    FAIL("stray key accepted");
  } catch (const UnknownKey& e) {
    CHECK(mentions(e, "dx"));
    CHECK(mentions(e, "line 2"));
  }
  try {
    parse_config("grid.nx = 64\ngrid.nx = 32\n");
    FAIL("duplicate key accepted");
  } catch (const ParseError& e) {
    CHECK(mentions(e, "duplicate"));
  }
  CHECK_THROWS_AS(parse_config("grid.nx = abc\n"), InvalidValue);
  CHECK_THROWS_AS(parse_config("time.dt = 1.2.3\n"), InvalidValue);
  CHECK_THROWS_AS(parse_config("just words\n"), ParseError);
  CHECK_THROWS_AS(parse_config("= 5\n"), ParseError);
  CHECK_THROWS_AS(parse_config("time.output_every = -2\n"), InvalidValue);
  CHECK_THROWS_AS(parse_config("numerics.scheme = quartic\n"), InvalidValue);
  CHECK_THROWS_AS(parse_config("system.kind = poisson\n"), InvalidValue);
}

// strtod handles subnormals without the out-of-range throw stod would raise
static double parse_back(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

TEST_CASE("the shortest decimal form reads back to the same bits") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e300, 12345.678901234567, 0.0, 2.0}) {
    CHECK(parse_back(format_double(v)) == v);
  }
  std::mt19937_64 rng(7);
  int checked = 0;
  while (checked < 500) {
    std::uint64_t bits = rng();
    double v;
    static_assert(sizeof bits == sizeof v);
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    CHECK(parse_back(format_double(v)) == v);
    ++checked;
  }
}

TEST_CASE("sha256 matches the published test vectors") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  CHECK(sha256_hex(std::string(1000000, 'a')) ==
        "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

static DiagnosticsRecord filled_row(double t, bool energy, bool sigma) {
  DiagnosticsRecord r;
  r.t = t;
  r.extremes = {1.1 + t, 0.3 + t, 0.9 + t, 2.2 + t, 0.1 + t, 0.7, 1e-6};
  r.rho_L1 = 2.0 + t;
  r.rho_L2 = 1.5 + t;
  r.rho_Linf = 1.0 + t;
  r.charge_per_species = {0.6, 0.6 + 0.01 * t};
  r.kinetic_K = 3.0 + t;
  r.has_total_energy = energy;
  r.total_energy = 4.0 + t;
  r.virial = 0.25 * t;
  r.rho_E1sq = 0.01 + t;
  r.x2_moment = 5.0 + t;
  r.E1_at_r = 0.2;
  r.E1_max_abs = 0.3;
  r.rho_ceiling_bound = 9.0;
  r.has_sigma = sigma;
  r.sigma_ok = sigma && t < 1.5;
  return r;
}

TEST_CASE("series csv round trips every populated column") {
  std::vector<DiagnosticsRecord> rows = {filled_row(0.0, true, true),
                                         filled_row(1.0, true, true),
                                         filled_row(2.0, false, false)};
  std::string text = series_csv(rows, 2);
  std::string header = text.substr(0, text.find('\n'));
  CHECK(header ==
        "t,Q1,p1,P1,R,r,W2,rho_L1,rho_L2,rho_Linf,charge_s0,charge_s1,K,"
        "total_energy,virial,rho_E1sq,x2_moment,E1_at_r,E1_max_abs,sigma_ok");

  int ns = 0;
  std::vector<DiagnosticsRecord> back = parse_series_csv(text, ns);
  CHECK(ns == 2);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const DiagnosticsRecord &a = rows[i], &b = back[i];
    CHECK(b.t == a.t);
    CHECK(b.extremes.Q1 == a.extremes.Q1);
    CHECK(b.extremes.p1 == a.extremes.p1);
    CHECK(b.extremes.P1 == a.extremes.P1);
    CHECK(b.extremes.R == a.extremes.R);
    CHECK(b.extremes.r == a.extremes.r);
    CHECK(b.extremes.W2 == a.extremes.W2);
    CHECK(b.rho_L1 == a.rho_L1);
    CHECK(b.rho_L2 == a.rho_L2);
    CHECK(b.rho_Linf == a.rho_Linf);
    CHECK(b.charge_per_species == a.charge_per_species);
    CHECK(b.kinetic_K == a.kinetic_K);
    CHECK(b.has_total_energy == a.has_total_energy);
    if (a.has_total_energy) CHECK(b.total_energy == a.total_energy);
    CHECK(b.virial == a.virial);
    CHECK(b.rho_E1sq == a.rho_E1sq);
    CHECK(b.x2_moment == a.x2_moment);
    CHECK(b.E1_at_r == a.E1_at_r);
    CHECK(b.E1_max_abs == a.E1_max_abs);
    CHECK(b.has_sigma == a.has_sigma);
    if (a.has_sigma) CHECK(b.sigma_ok == a.sigma_ok);
  }

  // an abort marker row carries only the time and is skipped on read
  std::string marked = text + "9.5" + std::string(19, ',') + "\n";
  std::vector<DiagnosticsRecord> trimmed = parse_series_csv(marked, ns);
  CHECK(trimmed.size() == rows.size());

  CHECK_THROWS_AS(parse_series_csv("", ns), FormatError);
  CHECK_THROWS_AS(parse_series_csv("a,b,c\n", ns), FormatError);
  std::string short_row = header + "\n1.0,2.0\n";
  CHECK_THROWS_AS(parse_series_csv(short_row, ns), FormatError);
}

TEST_CASE("extra norm csv lists one column per exponent") {
  DiagnosticsRecord a = filled_row(0.0, true, true);
  DiagnosticsRecord b = filled_row(0.5, true, true);
  a.rho_Lp_extra = {1.25, 0.5};
  b.rho_Lp_extra = {1.125, 0.375};
  std::string text = extra_norms_csv({a, b}, {3.0, 4.0});
  CHECK(text == "t,rho_L3,rho_L4\n0,1.25,0.5\n0.5,1.125,0.375\n");
}

TEST_CASE("snapshots restore grids bit for bit") {
  fs::path dir = fresh_dir("snap");
  GridGeometry g;
  g.nx = 6;
  g.nv1 = 4;
  g.nv2 = 4;
  g.x_min = -1.5;
  g.dx = 0.5;
  g.v1_min = -1.0;
  g.dv1 = 0.5;
  g.v2_min = -1.0;
  g.dv2 = 0.5;
  PhaseGrid grid(g, 2);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : grid.values) v = u(rng);

  fs::path p = dir / "state.bin";
  write_snapshot(p, grid);
  PhaseGrid back = read_snapshot(p);
  CHECK(back.n_species == grid.n_species);
  CHECK(same_geom(back.geom, grid.geom));
  CHECK(back.values == grid.values);

  std::string bytes = read_file(p);
  atomic_write(dir / "cut.bin", bytes.substr(0, bytes.size() - 8));
  CHECK_THROWS_AS(read_snapshot(dir / "cut.bin"), FormatError);
  atomic_write(dir / "junk.bin", "NOTAGRID\n" + bytes);
  CHECK_THROWS_AS(read_snapshot(dir / "junk.bin"), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("cone ledger csv round trips the recorded columns") {
  ConeLedger a;
  a.T = 1.25;
  a.I_plus = 0.375;
  a.I_minus = 0.25;
  a.cone_top = 0.625;
  ConeLedger b;
  b.T = 2.5;
  b.I_plus = 0.7;
  b.I_minus = 0.6;
  b.cone_top = 1.29;
  std::string text = cone_csv({a, b});
  CHECK(text.substr(0, text.find('\n')) == "T,I_plus,I_minus,cone_top,residual");
  auto back = parse_cone_csv(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].T == a.T);
  CHECK(back[0].I_plus == a.I_plus);
  CHECK(back[0].I_minus == a.I_minus);
  CHECK(back[0].cone_top == a.cone_top);
  CHECK(back[1].cone_top == b.cone_top);
  CHECK_THROWS_AS(parse_cone_csv(""), FormatError);
  CHECK_THROWS_AS(parse_cone_csv("T,I_plus,I_minus,cone_top,residual\n1,2\n"), FormatError);
}

TEST_CASE("field histories restore bit for bit") {
  fs::path dir = fresh_dir("fields");
  GridGeometry g;
  g.nx = 5;
  g.nv1 = 4;
  g.nv2 = 4;
  g.x_min = -1.25;
  g.dx = 0.5;
  g.v1_min = -1.0;
  g.dv1 = 0.5;
  g.v2_min = -1.0;
  g.dv2 = 0.5;
  FieldHistory h;
  h.geom = g;
  h.dt = 0.25;
  h.times = {0.0, 0.125, 0.375};
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 3; ++k) {
    std::vector<double> e(g.nx), r(g.nx);
    for (double& v : e) v = u(rng);
    for (double& v : r) v = u(rng);
    h.E1.push_back(e);
    h.rho.push_back(r);
  }
  fs::path p = dir / "fields.bin";
  write_field_history(p, h);
  FieldHistory back = read_field_history(p);
  CHECK(same_geom(back.geom, h.geom));
  CHECK(back.dt == h.dt);
  CHECK(back.times == h.times);
  CHECK(back.E1 == h.E1);
  CHECK(back.rho == h.rho);

  std::string bytes = read_file(p);
  atomic_write(dir / "cut.bin", bytes.substr(0, bytes.size() - 4));
  CHECK_THROWS_AS(read_field_history(dir / "cut.bin"), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("reports render to json and text") {
  TheoremReport ok;
  ok.id = "A";
  ok.passed = true;
  ok.measured["slope"] = 1.5;
  ok.tolerances["slack"] = 0.1;
  ok.notes = "fine";
  TheoremReport bad;
  bad.id = "B";
  bad.passed = false;
  bad.measured["gap"] = -0.25;

  nlohmann::json j = nlohmann::json::parse(report_json({ok, bad}));
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 2);
  CHECK(j[0]["id"] == "A");
  CHECK(j[0]["passed"] == true);
  CHECK(j[0]["measured"]["slope"] == 1.5);
  CHECK(j[0]["tolerances"]["slack"] == 0.1);
  CHECK(j[0]["notes"] == "fine");
  CHECK(j[1]["id"] == "B");
  CHECK(j[1]["passed"] == false);

  std::string txt = report_txt({ok, bad});
  CHECK(txt.find("PASS  A") != std::string::npos);
  CHECK(txt.find("FAIL  B") != std::string::npos);
  CHECK(txt.find("slope = 1.5") != std::string::npos);
  CHECK(txt.find("CHECK FAILURES PRESENT") != std::string::npos);
  CHECK(report_txt({ok}).find("ALL CHECKS PASSED") != std::string::npos);
}

TEST_CASE("the manifest digests the files it names") {
  fs::path dir = fresh_dir("manifest");
  atomic_write(dir / "series.csv", "t,Q1\n0,1\n");
  atomic_write(dir / "report.txt", "ALL CHECKS PASSED\n");
  RunConfig cfg = demo_config("rvp_small");
  std::string text = manifest_json(cfg, dir, {"series.csv", "report.txt"},
                                   "2026-01-02T03:04:05Z", "2026-01-02T03:09:10Z", "complete");
  nlohmann::json j = nlohmann::json::parse(text);
  CHECK(j["format"] == "vp-run-manifest-1");
  CHECK(j["status"] == "complete");
  CHECK(j["started"] == "2026-01-02T03:04:05Z");
  CHECK(j["seed"] == cfg.stepper.rng_seed);
  CHECK(parse_config(j["config"].get<std::string>()) == cfg);
  REQUIRE(j["files"].size() == 2);
  CHECK(j["files"][0]["name"] == "series.csv");
  CHECK(j["files"][0]["bytes"] == std::string("t,Q1\n0,1\n").size());
  CHECK(j["files"][0]["sha256"] == sha256_hex("t,Q1\n0,1\n"));
  fs::remove_all(dir);
}

TEST_CASE("series plots render as standalone svg") {
  std::vector<DiagnosticsRecord> rows;
  for (int i = 0; i <= 8; ++i) rows.push_back(filled_row(0.5 + 0.5 * i, true, true));
  std::string svg = render_series_svg(rows, 2, "rho_Linf");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("rho_Linf") != std::string::npos);

  // growth quantities annotate a log-log fit
  std::string growth = render_series_svg(rows, 2, "Q1");
  CHECK(growth.find("log-log") != std::string::npos);

  CHECK_THROWS_AS(render_series_svg(rows, 2, "nope"), UnknownQuantity);
  CHECK_THROWS_AS(render_series_svg({rows[0]}, 2, "Q1"), EmptySeries);
  CHECK_THROWS_AS(render_series_svg({}, 2, "Q1"), EmptySeries);
}

TEST_CASE("atomic writes land complete and reads fail loudly") {
  fs::path dir = fresh_dir("atomic");
  fs::path p = dir / "note.txt";
  atomic_write(p, "first");
  CHECK(read_file(p) == "first");
  atomic_write(p, "second");
  CHECK(read_file(p) == "second");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);  // no temp litter
  CHECK_THROWS_AS(read_file(dir / "missing.txt"), FormatError);
  fs::remove_all(dir);
}
