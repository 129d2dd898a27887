#include "isplines/io.hpp"

#include "json.hpp"

#include <atomic>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace isplines::io {
namespace fs = std::filesystem;

namespace {

void append_f64_le(std::string& out, double value) {
  auto bits = std::bit_cast<std::uint64_t>(value);
  for (int b = 0; b < 8; ++b) {
    out.push_back(static_cast<char>(bits & 0xffU));
    bits >>= 8;
  }
}

double read_f64_le(const char* p) {
  std::uint64_t bits = 0;
  for (int b = 7; b >= 0; --b) bits = (bits << 8) | static_cast<unsigned char>(p[b]);
  return std::bit_cast<double>(bits);
}

// Splits off one '\n'-terminated line starting at `pos`.
std::string_view take_line(std::string_view bytes, std::size_t& pos, std::string_view what) {
  const auto end = bytes.find('\n', pos);
  if (end == std::string_view::npos) throw FormatError(std::string(what) + ": truncated header");
  const auto line = bytes.substr(pos, end - pos);
  pos = end + 1;
  return line;
}

int parse_int_field(std::string_view token, std::string_view key, std::string_view what) {
  if (token.substr(0, key.size()) != key) {
    throw FormatError(std::string(what) + ": expected '" + std::string(key) + "<int>' in header");
  }
  int value = 0;
  const auto digits = token.substr(key.size());
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) {
    throw FormatError(std::string(what) + ": bad integer in header field '" + std::string(token) + "'");
  }
  return value;
}

// Next whitespace-delimited PGM header token, skipping '#' comments.
std::string pgm_token(std::string_view bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  if (start == pos) throw FormatError("PGM: truncated header");
  return std::string(bytes.substr(start, pos - start));
}

int pgm_int(std::string_view bytes, std::size_t& pos) {
  const auto token = pgm_token(bytes, pos);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || value < 0) {
    throw FormatError("PGM: bad header value '" + token + "'");
  }
  return value;
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  static std::atomic<unsigned> counter{0};
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw FormatError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

BinaryMask read_pgm(const fs::path& path) {
  const std::string bytes = read_file(path);
  std::size_t pos = 0;
  const auto magic = pgm_token(bytes, pos);
  if (magic != "P5" && magic != "P2") throw FormatError(path.string() + ": not a PGM (P5/P2) file");
  const int cols = pgm_int(bytes, pos);
  const int rows = pgm_int(bytes, pos);
  const int maxval = pgm_int(bytes, pos);
  if (cols <= 0 || rows <= 0 || maxval <= 0 || maxval > 65535) {
    throw FormatError(path.string() + ": bad PGM dimensions or maxval");
  }
  BinaryMask mask(rows, cols);
  const auto total = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  if (magic == "P2") {
    for (std::size_t k = 0; k < total; ++k) mask.data()[k] = pgm_int(bytes, pos) != 0 ? 1 : 0;
    return mask;
  }
  ++pos;  // single whitespace after maxval
  const std::size_t width = maxval > 255 ? 2 : 1;
  if (bytes.size() < pos + total * width) throw FormatError(path.string() + ": truncated PGM raster");
  for (std::size_t k = 0; k < total; ++k) {
    bool inside = bytes[pos + k * width] != 0;
    if (width == 2) inside = inside || bytes[pos + k * width + 1] != 0;
    mask.data()[k] = inside ? 1 : 0;
  }
  return mask;
}

void write_pgm(const fs::path& path, const BinaryMask& mask) {
  std::string bytes = "P5\n" + std::to_string(mask.cols()) + " " + std::to_string(mask.rows()) + "\n255\n";
  bytes.reserve(bytes.size() + static_cast<std::size_t>(mask.size()));
  for (Eigen::Index k = 0; k < mask.size(); ++k) bytes.push_back(mask.data()[k] ? static_cast<char>(255) : 0);
  write_file_atomic(path, bytes);
}

BinaryMask read_raw_mask(const fs::path& path, int rows, int cols) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("raw mask dimensions must be positive");
  const std::string bytes = read_file(path);
  const auto total = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  if (bytes.size() != total) {
    throw FormatError(path.string() + ": expected " + std::to_string(total) + " bytes, found " +
                      std::to_string(bytes.size()));
  }
  BinaryMask mask(rows, cols);
  for (std::size_t k = 0; k < total; ++k) mask.data()[k] = bytes[k] != 0 ? 1 : 0;
  return mask;
}

std::string encode_coefficients(const CoefficientGrid& grid) {
  const int o = grid.space().basis_count();
  std::string out = "ISPL1\nO=" + std::to_string(o) + " p=" + std::to_string(grid.space().degree()) + "\n";
  out.reserve(out.size() + 8 * static_cast<std::size_t>(o) * static_cast<std::size_t>(o));
  const Matrix& v = grid.values();
  for (Eigen::Index k = 0; k < v.size(); ++k) append_f64_le(out, v.data()[k]);
  return out;
}

CoefficientGrid decode_coefficients(std::string_view bytes) {
  std::size_t pos = 0;
  if (bytes.substr(0, 6) != "ISPL1\n") throw FormatError("ISPL1: bad magic");
  pos = 6;
  const auto header = take_line(bytes, pos, "ISPL1");
  const auto space_at = header.find(' ');
  if (space_at == std::string_view::npos) throw FormatError("ISPL1: header must be 'O=<int> p=<int>'");
  const int o = parse_int_field(header.substr(0, space_at), "O=", "ISPL1");
  const int p = parse_int_field(header.substr(space_at + 1), "p=", "ISPL1");
  if (p < 0 || o < p + 1) throw FormatError("ISPL1: invalid spline space O=" + std::to_string(o) + " p=" + std::to_string(p));
  const auto count = static_cast<std::size_t>(o) * static_cast<std::size_t>(o);
  if (bytes.size() - pos != 8 * count) {
    throw FormatError("ISPL1: expected " + std::to_string(8 * count) + " payload bytes, found " +
                      std::to_string(bytes.size() - pos));
  }
  Matrix values(o, o);
  for (std::size_t k = 0; k < count; ++k) values.data()[k] = read_f64_le(bytes.data() + pos + 8 * k);
  if (!values.allFinite()) throw FormatError("ISPL1: non-finite coefficient");
  return {SplineSpace(o, p), std::move(values)};
}

void write_coefficients(const fs::path& path, const CoefficientGrid& grid) {
  write_file_atomic(path, encode_coefficients(grid));
}

CoefficientGrid read_coefficients(const fs::path& path) {
  try {
    return decode_coefficients(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string encode_sdf(const Field& field) {
  if (field.rows() != field.cols()) throw std::invalid_argument("SDF1 stores square fields only");
  std::string out = "SDF1 I=" + std::to_string(field.rows()) + "\n";
  for (Eigen::Index k = 0; k < field.size(); ++k) append_f64_le(out, field.data()[k]);
  return out;
}

Field decode_sdf(std::string_view bytes) {
  std::size_t pos = 0;
  const auto header = take_line(bytes, pos, "SDF1");
  if (header.substr(0, 5) != "SDF1 ") throw FormatError("SDF1: bad magic");
  const int n = parse_int_field(header.substr(5), "I=", "SDF1");
  if (n <= 0) throw FormatError("SDF1: I must be positive");
  const auto count = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  if (bytes.size() - pos != 8 * count) throw FormatError("SDF1: payload size does not match I");
  Field field(n, n);
  for (std::size_t k = 0; k < count; ++k) field.data()[k] = read_f64_le(bytes.data() + pos + 8 * k);
  return field;
}

void write_sdf(const fs::path& path, const Field& field) { write_file_atomic(path, encode_sdf(field)); }

Field read_sdf(const fs::path& path) {
  try {
    return decode_sdf(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

VolumeManifest read_manifest(const fs::path& path) {
  std::istringstream in(read_file(path));
  VolumeManifest manifest;
  const fs::path base = path.parent_path();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string entry = line.substr(first, last - first + 1);
    if (entry.rfind("spacing", 0) == 0 && (entry.size() == 7 || std::isspace(static_cast<unsigned char>(entry[7])))) {
      std::istringstream fields(entry.substr(7));
      Spacing s;
      if (!(fields >> s.x >> s.y >> s.z) || !(s.x > 0 && s.y > 0 && s.z > 0)) {
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": spacing needs three positive numbers");
      }
      manifest.spacing = s;
      continue;
    }
    fs::path slice(entry);
    if (slice.is_relative()) slice = base / slice;
    manifest.slices.push_back(slice);
  }
  if (manifest.slices.empty()) throw FormatError(path.string() + ": manifest lists no slices");
  return manifest;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

Spacing parse_spacing(std::string_view text) {
  double v[3];
  std::size_t pos = 0;
  for (int k = 0; k < 3; ++k) {
    const auto end = k < 2 ? text.find(',', pos) : text.size();
    if (end == std::string_view::npos) throw std::invalid_argument("spacing must be 'sx,sy,sz'");
    const auto token = text.substr(pos, end - pos);
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v[k]);
    if (ec != std::errc() || ptr != token.data() + token.size() || !(v[k] > 0.0)) {
      throw std::invalid_argument("spacing entries must be positive numbers (got '" + std::string(token) + "')");
    }
    pos = end + 1;
  }
  return {v[0], v[1], v[2]};
}

void write_report_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
  out << kReportHeader << '\n';
  for (const auto& row : rows) {
    out << row.volume << ',' << format_double(row.scores.accuracy) << ',' << format_double(row.scores.dice)
        << ',' << format_double(row.scores.jaccard) << ',';
    if (row.scores.hausdorff) out << format_double(*row.scores.hausdorff);
    out << '\n';
  }
}

void write_report_jsonl(std::ostream& out, const std::vector<MetricRow>& rows) {
  for (const auto& row : rows) {
    const auto& s = row.scores;
    out << "{\"volume\":" << nlohmann::json(row.volume).dump() << ",\"accuracy\":" << format_double(s.accuracy)
        << ",\"dice\":" << format_double(s.dice) << ",\"jaccard\":" << format_double(s.jaccard)
        << ",\"hausdorff\":" << (s.hausdorff ? format_double(*s.hausdorff) : std::string("null"))
        << ",\"tp\":" << s.counts.tp << ",\"tn\":" << s.counts.tn << ",\"fp\":" << s.counts.fp
        << ",\"fn\":" << s.counts.fn << "}\n";
  }
}

void write_loss_history(std::ostream& out, const std::vector<double>& history) {
  out << "iter,loss\n";
  for (std::size_t k = 0; k < history.size(); ++k) out << k << ',' << format_double(history[k]) << '\n';
}

}  // namespace isplines::io
