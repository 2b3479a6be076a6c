#pragma once

#include "mfsp/greedy.hpp"
#include "mfsp/iterative.hpp"
#include "mfsp/model.hpp"
#include "mfsp/reconstruct.hpp"
#include "mfsp/reduced_basis.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace mfsp::io {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// MFSM binary matrix format
//
//   offset  size  field
//   0       4     magic "MFSM"
//   4       4     version, uint32 little-endian (currently 1)
//   8       8     rows, uint64 little-endian
//   16      8     cols, uint64 little-endian
//   24      8*r*c payload, IEEE-754 binary64 little-endian, column-major
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kMfsmVersion = 1;
inline constexpr std::size_t kMfsmHeaderSize = 24;

std::string encode_mfsm(const Matrix& m);
Matrix decode_mfsm(std::string_view bytes);

void write_mfsm(const fs::path& path, const Matrix& m);
Matrix read_mfsm(const fs::path& path);

/// Headerless CSV, one matrix row per line, comma separated.
Matrix parse_csv(std::string_view text);
std::string format_csv(const Matrix& m);

Matrix read_csv(const fs::path& path);
void write_csv(const fs::path& path, const Matrix& m);

enum class MatrixFormat { csv, mfsm };

/// ".csv" and ".txt" map to CSV, everything else to MFSM.
MatrixFormat format_from_path(const fs::path& path);
MatrixFormat parse_format(std::string_view name);

Matrix load_matrix(const fs::path& path, std::optional<MatrixFormat> format = std::nullopt);
void save_matrix(const fs::path& path, const Matrix& m,
                 std::optional<MatrixFormat> format = std::nullopt);

/// Raw snapshot data (N x p, uncentered).
SnapshotMatrix load_snapshots(const fs::path& path, std::optional<MatrixFormat> format = std::nullopt);

/// Candidate mask: N x 1 matrix, nonzero entries mark candidate locations.
IndexSet load_candidate_mask(const fs::path& path);

// ---------------------------------------------------------------------------
// Model directory: phi.mfsm, sing_vals.mfsm, prior_var.mfsm, mean.mfsm, model.json
// ---------------------------------------------------------------------------

void save_model(const fs::path& dir, const ReducedModel& model);
ReducedModel load_model(const fs::path& dir);

// ---------------------------------------------------------------------------
// Design files (JSON)
// ---------------------------------------------------------------------------

/// Hex FNV-1a digest of the A matrices together with the problem parameters.
std::string instance_fingerprint(const ProblemInstance& inst);

struct DesignFile {
  DesignResult result;
  FidelityClass cheap;
  FidelityClass exp;
  std::string fingerprint;
};

std::string design_to_json(const DesignFile& design);
DesignFile design_from_json(std::string_view text);

void write_design(const fs::path& path, const DesignFile& design);
DesignFile read_design(const fs::path& path);

/// Rebuilds the instance for `design` from `model` and throws InvalidInput if its
/// fingerprint differs from the one stored in the file.
ProblemInstance instance_for_design(const ReducedModel& model, const DesignFile& design);

// ---------------------------------------------------------------------------
// Run configuration (key = value, '#' starts a comment)
// ---------------------------------------------------------------------------

struct RunConfig {
  std::optional<double> lambda;
  std::optional<double> energy;
  std::optional<double> train_frac;
  std::optional<double> cost_cheap;
  std::optional<double> cost_exp;
  std::optional<double> sigma_cheap;
  std::optional<double> sigma_exp;
  std::optional<double> budget;
  std::optional<std::string> algorithm;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_iters;
  std::optional<bool> center;
  std::optional<std::string> candidate_mask;
  std::optional<std::string> energy_measure;
  std::optional<unsigned> threads;
};

inline constexpr double kDefaultLambda = 0.01;
inline constexpr double kDefaultEnergy = 0.99;
inline constexpr double kDefaultTrainFrac = 0.70;
inline constexpr std::size_t kDefaultMaxIters = 20;

RunConfig parse_config(std::string_view text);
RunConfig load_config(const fs::path& path);

// ---------------------------------------------------------------------------
// Comparison outputs
// ---------------------------------------------------------------------------

/// Columns: design,k_ch,k_exp,spend,phi_d,mean_rel_err (empty when not evaluated).
std::string format_comparison_csv(const Comparison& cmp);

/// Columns: bin_lo,bin_hi,count. Design Phi_D values are emitted first as
/// "# marker,<name>,<phi_d>" comment lines.
std::string format_histogram_csv(const Comparison& cmp);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, std::string_view text);

/// Shortest decimal form that round-trips a binary64 value.
std::string format_double(double v);

}  // namespace mfsp::io
