#pragma once

#include <string>
#include <vector>

#include "bhtlab/config.hpp"
#include "bhtlab/inequalities.hpp"

namespace bhtlab {

inline const char* kArtifactVersion = "1.0.0";
inline const int kManifestSchemaVersion = 1;

/// 17 significant digits: decimal text that round-trips IEEE doubles.
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

/// Velocity coefficient table: header k1,k2,ux_re,ux_im,uy_re,uy_im; one row
/// per retained mode with a nonzero coefficient, ordered by (k2, k1).
std::string velocity_csv(const VectorField& u);

/// Binary snapshot of the same table (magic BHTV, version, n, row count,
/// then per row two int32 and four little-endian f64).
std::string velocity_blob(const VectorField& u);
VectorField velocity_from_blob(const std::string& blob);

/// Ensemble shell statistics: header shell,count,mean,variance,field,weight,
/// rows ordered by (field, weight, shell). Coefficient-sum units.
std::string spectrum_csv(const EnsembleStats& stats);

/// Oracle comparison for the far-band first iterate (gradient shells).
std::string oracle_csv(const EnsembleStats& stats, const OracleSpectrum& oracle, int m);

std::string remainder_csv(const RemainderReport& rep);

std::string bound_reports_csv(const std::vector<BoundReport>& reports);

// ---------------------------------------------------------------------------
// Command drivers (shared by the CLI and the tests)
// ---------------------------------------------------------------------------

/// Write the velocity files and manifest for one seed. Returns the run id.
std::string cmd_gen_velocity(const RunConfig& cfg, std::uint64_t seed,
                             const std::string& out_dir);

/// One full decomposition at the given member seed: solver reports, single-
/// realization spectra, manifest.
std::string cmd_solve(const RunConfig& cfg, std::uint64_t seed, const std::string& out_dir);

/// Full ensemble: spectra, oracle comparison, remainder report, fits,
/// scalar stats, manifest. All outputs are computed before anything is
/// written, so a solver failure leaves no partial files.
std::string cmd_ensemble(const RunConfig& cfg, const std::string& out_dir);

/// Inequality suite; writes the report table and measured constants, compares
/// against a baseline file when given. Returns true when every check passes
/// and no pinned constant drifted more than 5%.
bool cmd_verify(const VerificationOptions& opt, const std::string& baseline_path,
                const std::string& out_dir);

/// Plot-ready bundle from a finished ensemble run directory: log-log tables
/// with BHT reference-line columns. Validates the manifest inventory first.
void cmd_report(const std::string& run_dir, const std::string& out_dir);

/// Manifest integrity: every inventoried file exists with a matching digest
/// and no orphan data files sit in the directory. Throws on violations.
void validate_run_dir(const std::string& run_dir);

}  // namespace bhtlab
