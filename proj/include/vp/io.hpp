#pragma once
// Stable on-disk formats: the series CSV, raw grid snapshots, the cone
// ledger, the recorded field history, verification reports, the run
// manifest, and standalone SVG plots. All writes are temp-then-rename.

#include <filesystem>
#include <string>
#include <vector>

#include "vp/config.hpp"
#include "vp/solver.hpp"
#include "vp/verify.hpp"

namespace vp {

struct UnknownQuantity : Error { using Error::Error; };
struct EmptySeries : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };

// Shortest decimal that reads back to the identical binary64.
std::string format_double(double v);

void atomic_write(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);  // FormatError if unreadable
std::string sha256_hex(const std::string& bytes);

// One row per output time; fixed column set, empty fields where a quantity
// does not apply to the system kind. Extra density norms, when configured,
// go to a separate extra_norms.csv to keep this schema fixed.
std::string series_csv(const std::vector<DiagnosticsRecord>& series, int n_species);
std::vector<DiagnosticsRecord> parse_series_csv(const std::string& text, int& n_species);

std::string extra_norms_csv(const std::vector<DiagnosticsRecord>& series,
                            const std::vector<double>& ps);

// Raw grid dump: "VPGRID1\n", one ASCII header line, then the cell values
// as little-endian binary64 in (species, x, v1, v2) order, v2 fastest.
void write_snapshot(const std::filesystem::path& path, const PhaseGrid& grid);
PhaseGrid read_snapshot(const std::filesystem::path& path);

std::string cone_csv(const std::vector<ConeLedger>& ledgers);
std::vector<ConeLedger> parse_cone_csv(const std::string& text);

// Recorded fields: "VPFIELD1\n", one ASCII header line with the geometry
// and step, then times, all E1 profiles, all rho profiles as binary64.
void write_field_history(const std::filesystem::path& path, const FieldHistory& h);
FieldHistory read_field_history(const std::filesystem::path& path);

std::string report_json(const std::vector<TheoremReport>& reports);
std::string report_txt(const std::vector<TheoremReport>& reports);

// Config echo, version, wall-clock stamps, seed, and content digests of the
// named files (paths relative to dir). Written last: its presence marks a
// complete run directory.
std::string manifest_json(const RunConfig& cfg, const std::filesystem::path& dir,
                          const std::vector<std::string>& files, const std::string& started,
                          const std::string& finished, const std::string& status);

// Standalone SVG 1.1 line plot of one series column over time. Growth
// quantities draw on log-log axes with a fitted-slope annotation.
std::string render_series_svg(const std::vector<DiagnosticsRecord>& series, int n_species,
                              const std::string& quantity);

}  // namespace vp
