#pragma once

#include "isplines/collocation.hpp"
#include "isplines/metrics.hpp"
#include "isplines/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace isplines::io {

/// Malformed or unreadable input file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Masks: binary (P5) or ASCII (P2) PGM, nonzero = inside. Written as P5 with
// inside = 255.
BinaryMask read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const BinaryMask& mask);
/// Raw unsigned 8-bit, `rows` x `cols` row-major, nonzero = inside.
BinaryMask read_raw_mask(const std::filesystem::path& path, int rows, int cols);

// ISPL1 coefficient files:
//   "ISPL1\n" "O=<int> p=<int>\n" then O*O little-endian float64, row-major.
std::string encode_coefficients(const CoefficientGrid& grid);
CoefficientGrid decode_coefficients(std::string_view bytes);
void write_coefficients(const std::filesystem::path& path, const CoefficientGrid& grid);
CoefficientGrid read_coefficients(const std::filesystem::path& path);

// SDF1 dumps:
//   "SDF1 I=<int>\n" then I*I little-endian float64, row-major.
std::string encode_sdf(const Field& field);
Field decode_sdf(std::string_view bytes);
void write_sdf(const std::filesystem::path& path, const Field& field);
Field read_sdf(const std::filesystem::path& path);

/**
 * Volume manifest: one slice path per line, relative paths resolved against
 * the manifest's directory. Blank lines and lines starting with '#' are
 * skipped. An optional line "spacing <sx> <sy> <sz>" sets the voxel step.
 */
struct VolumeManifest {
  std::vector<std::filesystem::path> slices;
  Spacing spacing;
};
VolumeManifest read_manifest(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

/// Parses "sx,sy,sz"; throws std::invalid_argument.
Spacing parse_spacing(std::string_view text);

/// One metric row of an evaluation report.
struct MetricRow {
  std::string volume;
  VolumeScores scores;
};

inline constexpr std::string_view kReportHeader = "volume,accuracy,dice,jaccard,hausdorff";

/// CSV with kReportHeader; an undefined Hausdorff distance is an empty field.
void write_report_csv(std::ostream& out, const std::vector<MetricRow>& rows);
/// One JSON object per line; an undefined Hausdorff distance is null.
void write_report_jsonl(std::ostream& out, const std::vector<MetricRow>& rows);

/// "iter,loss" CSV of a loss history.
void write_loss_history(std::ostream& out, const std::vector<double>& history);

}  // namespace isplines::io
