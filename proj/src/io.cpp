#include "vp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace vp {
namespace {

constexpr const char* kSnapshotMagic = "VPGRID1\n";
constexpr const char* kFieldMagic = "VPFIELD1\n";

void append_le64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double take_le64(const std::string& in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw FormatError("truncated binary payload");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += 8;
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = line.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
}

double parse_double_field(const std::string& s, const char* what) {
  const char* b = s.data();
  const char* end = b + s.size();
  double v = 0.0;
  auto [p, ec] = std::from_chars(b, end, v);
  if (ec != std::errc() || p != end)
    throw FormatError(std::string("bad numeric field for ") + what + ": \"" + s + "\"");
  return v;
}

// SHA-256, FIPS 180-4.
struct Sha256 {
  std::uint32_t h[8] = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                        0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
  unsigned char buf[64];
  std::size_t fill = 0;
  std::uint64_t total = 0;

  static std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

  void block(const unsigned char* p) {
    static const std::uint32_t K[64] = {
        0x428a2f98u, 0x71374491u, 0xb5c0fbcfu, 0xe9b5dba5u, 0x3956c25bu, 0x59f111f1u,
        0x923f82a4u, 0xab1c5ed5u, 0xd807aa98u, 0x12835b01u, 0x243185beu, 0x550c7dc3u,
        0x72be5d74u, 0x80deb1feu, 0x9bdc06a7u, 0xc19bf174u, 0xe49b69c1u, 0xefbe4786u,
        0x0fc19dc6u, 0x240ca1ccu, 0x2de92c6fu, 0x4a7484aau, 0x5cb0a9dcu, 0x76f988dau,
        0x983e5152u, 0xa831c66du, 0xb00327c8u, 0xbf597fc7u, 0xc6e00bf3u, 0xd5a79147u,
        0x06ca6351u, 0x14292967u, 0x27b70a85u, 0x2e1b2138u, 0x4d2c6dfcu, 0x53380d13u,
        0x650a7354u, 0x766a0abbu, 0x81c2c92eu, 0x92722c85u, 0xa2bfe8a1u, 0xa81a664bu,
        0xc24b8b70u, 0xc76c51a3u, 0xd192e819u, 0xd6990624u, 0xf40e3585u, 0x106aa070u,
        0x19a4c116u, 0x1e376c08u, 0x2748774cu, 0x34b0bcb5u, 0x391c0cb3u, 0x4ed8aa4au,
        0x5b9cca4fu, 0x682e6ff3u, 0x748f82eeu, 0x78a5636fu, 0x84c87814u, 0x8cc70208u,
        0x90befffau, 0xa4506cebu, 0xbef9a3f7u, 0xc67178f2u};
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i)
      w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
             (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
    for (int i = 16; i < 64; ++i) {
      std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3];
    std::uint32_t e = h[4], f = h[5], g = h[6], hh = h[7];
    for (int i = 0; i < 64; ++i) {
      std::uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      std::uint32_t ch = (e & f) ^ (~e & g);
      std::uint32_t t1 = hh + S1 + ch + K[i] + w[i];
      std::uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      std::uint32_t t2 = S0 + maj;
      hh = g;
      g = f;
      f = e;
      e = d + t1;
      d = c;
      c = b;
      b = a;
      a = t1 + t2;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
    h[5] += f;
    h[6] += g;
    h[7] += hh;
  }

  void update(const unsigned char* p, std::size_t n) {
    total += n;
    while (n > 0) {
      std::size_t room = 64 - fill;
      std::size_t take = std::min(room, n);
      std::memcpy(buf + fill, p, take);
      fill += take;
      p += take;
      n -= take;
      if (fill == 64) {
        block(buf);
        fill = 0;
      }
    }
  }

  std::string hex() {
    std::uint64_t bits = total * 8;
    unsigned char pad = 0x80;
    update(&pad, 1);
    unsigned char zero = 0;
    while (fill != 56) update(&zero, 1);
    unsigned char len[8];
    for (int i = 0; i < 8; ++i) len[i] = static_cast<unsigned char>(bits >> (56 - 8 * i));
    update(len, 8);
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (std::uint32_t v : h)
      for (int i = 28; i >= 0; i -= 4) out.push_back(digits[(v >> i) & 0xf]);
    return out;
  }
};

}  // namespace

std::string format_double(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(const std::string& bytes) {
  Sha256 s;
  s.update(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
  return s.hex();
}

std::string series_csv(const std::vector<DiagnosticsRecord>& series, int n_species) {
  std::ostringstream out;
  out << "t,Q1,p1,P1,R,r,W2,rho_L1,rho_L2,rho_Linf";
  for (int s = 0; s < n_species; ++s) out << ",charge_s" << s;
  out << ",K,total_energy,virial,rho_E1sq,x2_moment,E1_at_r,E1_max_abs,sigma_ok\n";
  for (const auto& r : series) {
    out << format_double(r.t);
    out << ',' << format_double(r.extremes.Q1) << ',' << format_double(r.extremes.p1) << ','
        << format_double(r.extremes.P1) << ',' << format_double(r.extremes.R) << ','
        << format_double(r.extremes.r) << ',' << format_double(r.extremes.W2);
    out << ',' << format_double(r.rho_L1) << ',' << format_double(r.rho_L2) << ','
        << format_double(r.rho_Linf);
    for (int s = 0; s < n_species; ++s) {
      out << ',';
      if (s < static_cast<int>(r.charge_per_species.size()))
        out << format_double(r.charge_per_species[s]);
    }
    out << ',' << format_double(r.kinetic_K);
    out << ',';
    if (r.has_total_energy) out << format_double(r.total_energy);
    out << ',' << format_double(r.virial) << ',' << format_double(r.rho_E1sq) << ','
        << format_double(r.x2_moment) << ',' << format_double(r.E1_at_r) << ','
        << format_double(r.E1_max_abs);
    out << ',';
    if (r.has_sigma) out << (r.sigma_ok ? "true" : "false");
    out << "\n";
  }
  return out.str();
}

std::vector<DiagnosticsRecord> parse_series_csv(const std::string& text, int& n_species) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty series file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split(line, ',');
  n_species = 0;
  for (const auto& h : header)
    if (h.rfind("charge_s", 0) == 0) ++n_species;
  std::size_t expect = 18 + static_cast<std::size_t>(n_species);
  if (header.size() != expect || header[0] != "t" || header[1] != "Q1")
    throw FormatError("unexpected series header: " + line);
  std::vector<DiagnosticsRecord> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split(line, ',');
    if (f.size() != expect)
      throw FormatError("series row has " + std::to_string(f.size()) + " fields, expected " +
                        std::to_string(expect));
    DiagnosticsRecord r;
    r.t = parse_double_field(f[0], "t");
    if (f[1].empty()) continue;  // abort marker row carries only the time
    r.extremes.Q1 = parse_double_field(f[1], "Q1");
    r.extremes.p1 = parse_double_field(f[2], "p1");
    r.extremes.P1 = parse_double_field(f[3], "P1");
    r.extremes.R = parse_double_field(f[4], "R");
    r.extremes.r = parse_double_field(f[5], "r");
    r.extremes.W2 = parse_double_field(f[6], "W2");
    r.rho_L1 = parse_double_field(f[7], "rho_L1");
    r.rho_L2 = parse_double_field(f[8], "rho_L2");
    r.rho_Linf = parse_double_field(f[9], "rho_Linf");
    std::size_t c = 10;
    for (int s = 0; s < n_species; ++s)
      r.charge_per_species.push_back(parse_double_field(f[c++], "charge"));
    r.kinetic_K = parse_double_field(f[c++], "K");
    if (!f[c].empty()) {
      r.has_total_energy = true;
      r.total_energy = parse_double_field(f[c], "total_energy");
    }
    ++c;
    r.virial = parse_double_field(f[c++], "virial");
    r.rho_E1sq = parse_double_field(f[c++], "rho_E1sq");
    r.x2_moment = parse_double_field(f[c++], "x2_moment");
    r.E1_at_r = parse_double_field(f[c++], "E1_at_r");
    r.E1_max_abs = parse_double_field(f[c++], "E1_max_abs");
    if (!f[c].empty()) {
      r.has_sigma = true;
      if (f[c] != "true" && f[c] != "false")
        throw FormatError("sigma_ok must be true/false, got \"" + f[c] + "\"");
      r.sigma_ok = f[c] == "true";
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string extra_norms_csv(const std::vector<DiagnosticsRecord>& series,
                            const std::vector<double>& ps) {
  std::ostringstream out;
  out << "t";
  for (double p : ps) out << ",rho_L" << format_double(p);
  out << "\n";
  for (const auto& r : series) {
    out << format_double(r.t);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      out << ',';
      if (i < r.rho_Lp_extra.size()) out << format_double(r.rho_Lp_extra[i]);
    }
    out << "\n";
  }
  return out.str();
}

void write_snapshot(const std::filesystem::path& path, const PhaseGrid& grid) {
  const GridGeometry& g = grid.geom;
  std::string out = kSnapshotMagic;
  std::ostringstream head;
  head << grid.n_species << ' ' << g.nx << ' ' << g.nv1 << ' ' << g.nv2 << ' '
       << format_double(g.x_min) << ' ' << format_double(g.dx) << ' ' << format_double(g.v1_min)
       << ' ' << format_double(g.dv1) << ' ' << format_double(g.v2_min) << ' '
       << format_double(g.dv2) << "\n";
  out += head.str();
  out.reserve(out.size() + grid.values.size() * 8);
  for (double v : grid.values) append_le64(out, v);
  atomic_write(path, out);
}

PhaseGrid read_snapshot(const std::filesystem::path& path) {
  std::string in = read_file(path);
  std::size_t magic_len = std::strlen(kSnapshotMagic);
  if (in.compare(0, magic_len, kSnapshotMagic) != 0)
    throw FormatError(path.string() + " is not a grid snapshot");
  std::size_t nl = in.find('\n', magic_len);
  if (nl == std::string::npos) throw FormatError("snapshot header line missing");
  std::istringstream head(in.substr(magic_len, nl - magic_len));
  int ns = 0;
  GridGeometry g;
  head >> ns >> g.nx >> g.nv1 >> g.nv2 >> g.x_min >> g.dx >> g.v1_min >> g.dv1 >> g.v2_min >>
      g.dv2;
  if (!head) throw FormatError("snapshot header is malformed");
  g.validate();
  if (ns < 1) throw FormatError("snapshot species count must be positive");
  PhaseGrid grid(g, ns);
  std::size_t pos = nl + 1;
  for (double& v : grid.values) v = take_le64(in, pos);
  if (pos != in.size()) throw FormatError("snapshot has trailing bytes");
  return grid;
}

std::string cone_csv(const std::vector<ConeLedger>& ledgers) {
  std::ostringstream out;
  out << "T,I_plus,I_minus,cone_top,residual\n";
  for (const auto& l : ledgers)
    out << format_double(l.T) << ',' << format_double(l.I_plus) << ','
        << format_double(l.I_minus) << ',' << format_double(l.cone_top) << ','
        << format_double(l.I_plus + l.I_minus - l.cone_top) << "\n";
  return out.str();
}

std::vector<ConeLedger> parse_cone_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty cone file");
  std::vector<ConeLedger> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split(line, ',');
    if (f.size() != 5) throw FormatError("cone row needs 5 fields");
    ConeLedger l;
    l.T = parse_double_field(f[0], "T");
    l.I_plus = parse_double_field(f[1], "I_plus");
    l.I_minus = parse_double_field(f[2], "I_minus");
    l.cone_top = parse_double_field(f[3], "cone_top");
    out.push_back(l);
  }
  return out;
}

void write_field_history(const std::filesystem::path& path, const FieldHistory& h) {
  const GridGeometry& g = h.geom;
  std::string out = kFieldMagic;
  std::ostringstream head;
  head << h.times.size() << ' ' << g.nx << ' ' << g.nv1 << ' ' << g.nv2 << ' '
       << format_double(g.x_min) << ' ' << format_double(g.dx) << ' ' << format_double(g.v1_min)
       << ' ' << format_double(g.dv1) << ' ' << format_double(g.v2_min) << ' '
       << format_double(g.dv2) << ' ' << format_double(h.dt) << "\n";
  out += head.str();
  std::size_t nt = h.times.size();
  out.reserve(out.size() + 8 * nt * (1 + 2 * static_cast<std::size_t>(g.nx)));
  for (double t : h.times) append_le64(out, t);
  for (const auto& prof : h.E1)
    for (double v : prof) append_le64(out, v);
  for (const auto& prof : h.rho)
    for (double v : prof) append_le64(out, v);
  atomic_write(path, out);
}

FieldHistory read_field_history(const std::filesystem::path& path) {
  std::string in = read_file(path);
  std::size_t magic_len = std::strlen(kFieldMagic);
  if (in.compare(0, magic_len, kFieldMagic) != 0)
    throw FormatError(path.string() + " is not a field history");
  std::size_t nl = in.find('\n', magic_len);
  if (nl == std::string::npos) throw FormatError("field header line missing");
  std::istringstream head(in.substr(magic_len, nl - magic_len));
  std::size_t nt = 0;
  FieldHistory h;
  head >> nt >> h.geom.nx >> h.geom.nv1 >> h.geom.nv2 >> h.geom.x_min >> h.geom.dx >>
      h.geom.v1_min >> h.geom.dv1 >> h.geom.v2_min >> h.geom.dv2 >> h.dt;
  if (!head) throw FormatError("field header is malformed");
  h.geom.validate();
  std::size_t pos = nl + 1;
  h.times.resize(nt);
  for (double& t : h.times) t = take_le64(in, pos);
  h.E1.assign(nt, std::vector<double>(h.geom.nx));
  for (auto& prof : h.E1)
    for (double& v : prof) v = take_le64(in, pos);
  h.rho.assign(nt, std::vector<double>(h.geom.nx));
  for (auto& prof : h.rho)
    for (double& v : prof) v = take_le64(in, pos);
  if (pos != in.size()) throw FormatError("field history has trailing bytes");
  return h;
}

namespace {

nlohmann::json report_to_json(const TheoremReport& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["passed"] = r.passed;
  j["measured"] = nlohmann::json::object();
  for (const auto& [k, v] : r.measured) j["measured"][k] = v;
  j["tolerances"] = nlohmann::json::object();
  for (const auto& [k, v] : r.tolerances) j["tolerances"][k] = v;
  j["notes"] = r.notes;
  return j;
}

}  // namespace

std::string report_json(const std::vector<TheoremReport>& reports) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : reports) j.push_back(report_to_json(r));
  return j.dump(2) + "\n";
}

std::string report_txt(const std::vector<TheoremReport>& reports) {
  std::ostringstream out;
  for (const auto& r : reports) {
    out << (r.passed ? "PASS" : "FAIL") << "  " << r.id << "\n";
    for (const auto& [k, v] : r.measured)
      out << "      " << k << " = " << format_double(v) << "\n";
    for (const auto& [k, v] : r.tolerances)
      out << "      tol " << k << " = " << format_double(v) << "\n";
    if (!r.notes.empty()) out << "      " << r.notes << "\n";
  }
  bool all = std::all_of(reports.begin(), reports.end(),
                         [](const TheoremReport& r) { return r.passed; });
  out << (all ? "ALL CHECKS PASSED" : "CHECK FAILURES PRESENT") << "\n";
  return out.str();
}

std::string manifest_json(const RunConfig& cfg, const std::filesystem::path& dir,
                          const std::vector<std::string>& files, const std::string& started,
                          const std::string& finished, const std::string& status) {
  nlohmann::json j;
  j["format"] = "vp-run-manifest-1";
  j["version"] = "vp1d5 0.1.0";
  j["status"] = status;
  j["started"] = started;
  j["finished"] = finished;
  j["seed"] = cfg.stepper.rng_seed;
  j["config"] = serialize_config(cfg);
  j["files"] = nlohmann::json::array();
  for (const auto& name : files) {
    std::string bytes = read_file(dir / name);
    nlohmann::json f;
    f["name"] = name;
    f["bytes"] = bytes.size();
    f["sha256"] = sha256_hex(bytes);
    j["files"].push_back(f);
  }
  return j.dump(2) + "\n";
}

namespace {

bool series_value(const DiagnosticsRecord& r, const std::string& q, double& out) {
  if (q == "t") out = r.t;
  else if (q == "Q1") out = r.extremes.Q1;
  else if (q == "p1") out = r.extremes.p1;
  else if (q == "P1") out = r.extremes.P1;
  else if (q == "R") out = r.extremes.R;
  else if (q == "r") out = r.extremes.r;
  else if (q == "W2") out = r.extremes.W2;
  else if (q == "rho_L1") out = r.rho_L1;
  else if (q == "rho_L2") out = r.rho_L2;
  else if (q == "rho_Linf") out = r.rho_Linf;
  else if (q == "K") out = r.kinetic_K;
  else if (q == "total_energy") {
    if (!r.has_total_energy) return false;
    out = r.total_energy;
  } else if (q == "virial") out = r.virial;
  else if (q == "rho_E1sq") out = r.rho_E1sq;
  else if (q == "x2_moment") out = r.x2_moment;
  else if (q == "E1_at_r") out = r.E1_at_r;
  else if (q == "E1_max_abs") out = r.E1_max_abs;
  else if (q == "sigma_ok") {
    if (!r.has_sigma) return false;
    out = r.sigma_ok ? 1.0 : 0.0;
  } else if (q.rfind("charge_s", 0) == 0) {
    std::size_t idx = 0;
    try {
      idx = std::stoul(q.substr(8));
    } catch (...) {
      throw UnknownQuantity("unknown series quantity \"" + q + "\"");
    }
    if (idx >= r.charge_per_species.size()) return false;
    out = r.charge_per_species[idx];
  } else {
    throw UnknownQuantity("unknown series quantity \"" + q + "\"");
  }
  return true;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

std::string render_series_svg(const std::vector<DiagnosticsRecord>& series, int n_species,
                              const std::string& quantity) {
  (void)n_species;
  bool loglog = quantity == "Q1" || quantity == "p1" || quantity == "P1" || quantity == "R" ||
                quantity == "r";
  std::vector<double> ts, ys;
  {
    double probe = 0.0;
    if (!series.empty()) series_value(series.front(), quantity, probe);  // validates the name
    else series_value(DiagnosticsRecord{}, quantity, probe);
  }
  for (const auto& rec : series) {
    double v = 0.0;
    if (!series_value(rec, quantity, v)) continue;
    if (!std::isfinite(v)) continue;
    if (loglog && (!(rec.t > 0.0) || !(v > 0.0))) continue;
    ts.push_back(rec.t);
    ys.push_back(v);
  }
  if (ts.size() < 2) throw EmptySeries("not enough plottable rows for \"" + quantity + "\"");

  auto tx = [&](double v) { return loglog ? std::log10(v) : v; };
  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    x_lo = std::min(x_lo, tx(ts[i]));
    x_hi = std::max(x_hi, tx(ts[i]));
    y_lo = std::min(y_lo, tx(ys[i]));
    y_hi = std::max(y_hi, tx(ys[i]));
  }
  if (x_hi - x_lo < 1e-12) x_hi = x_lo + 1.0;
  if (y_hi - y_lo < 1e-12) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }

  const double W = 720, H = 460, ml = 84, mr = 28, mt = 44, mb = 58;
  auto X = [&](double v) { return ml + (tx(v) - x_lo) / (x_hi - x_lo) * (W - ml - mr); };
  auto Y = [&](double v) { return H - mb - (tx(v) - y_lo) / (y_hi - y_lo) * (H - mt - mb); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W
    << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H
    << "\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
       "font-family=\"monospace\" font-size=\"16\">"
    << quantity << (loglog ? " (log-log)" : "") << "</text>\n";
  // frame
  s << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\""
    << H - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n";
  // ticks
  for (int i = 0; i <= 4; ++i) {
    double fx = x_lo + (x_hi - x_lo) * i / 4.0;
    double fy = y_lo + (y_hi - y_lo) * i / 4.0;
    double vx = loglog ? std::pow(10.0, fx) : fx;
    double vy = loglog ? std::pow(10.0, fy) : fy;
    double pxx = ml + (W - ml - mr) * i / 4.0;
    double pyy = H - mb - (H - mt - mb) * i / 4.0;
    s << "<line x1=\"" << px(pxx) << "\" y1=\"" << H - mb << "\" x2=\"" << px(pxx) << "\" y2=\""
      << H - mb + 6 << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << px(pxx) << "\" y=\"" << H - mb + 22
      << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">"
      << tick_label(vx) << "</text>\n";
    s << "<line x1=\"" << ml - 6 << "\" y1=\"" << px(pyy) << "\" x2=\"" << ml << "\" y2=\""
      << px(pyy) << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << ml - 10 << "\" y=\"" << px(pyy + 4)
      << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"12\">" << tick_label(vy)
      << "</text>\n";
  }
  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 14
    << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\">t</text>\n";
  // data
  s << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.6\" points=\"";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (i) s << ' ';
    s << px(X(ts[i])) << ',' << px(Y(ys[i]));
  }
  s << "\"/>\n";
  // fitted slope annotation for growth quantities
  if (loglog && ts.size() >= 5) {
    try {
      ExponentFit fit = fit_growth_exponent(ts, ys, 0.5);
      char buf[64];
      std::snprintf(buf, sizeof(buf), "fitted slope %.3f", fit.slope);
      s << "<text x=\"" << W - mr - 8 << "\" y=\"" << mt + 18
        << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"13\">" << buf
        << "</text>\n";
    } catch (const Error&) {
      // annotation only
    }
  }
  if (quantity == "rho_Linf") {
    double floor_v = *std::min_element(ys.begin(), ys.end());
    s << "<line x1=\"" << ml << "\" y1=\"" << px(Y(floor_v)) << "\" x2=\"" << W - mr
      << "\" y2=\"" << px(Y(floor_v))
      << "\" stroke=\"#b03030\" stroke-dasharray=\"6,4\" stroke-width=\"1\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace vp
