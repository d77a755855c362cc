#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sigma_collapse/field.h"

namespace sigma {

// 17 significant digits, round-trips every double. NaN is written as "nan".
std::string format_double(double x);

// Flat `key = value` text. '#' starts a comment; dotted keys are plain keys.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& source = "<string>");
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated list; a scalar value gives a one-element list.
  std::vector<std::string> get_list(const std::string& key) const;

  // Throws kConfig naming the first key outside `known`.
  void require_known(const std::vector<std::string>& known) const;

 private:
  std::map<std::string, std::string> values_;
  std::string source_;
};

// CSV with '.' decimals and LF line endings.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  // Cells already formatted.
  void row_cells(const std::vector<std::string>& cells);
  void close();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t width_;
};

std::vector<std::string> split(const std::string& s, char sep);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const;
};
CsvTable read_csv(const std::filesystem::path& path);

enum class SnapshotFormat { kBinary, kCsv };
SnapshotFormat parse_snapshot_format(const std::string& s);

// Binary layout (host byte order): "SCSNAP01", int32 k, double t,
// uint32 length + grid description, uint64 n, n + 1 faces, n phi, n phi_t.
// CSV: "# k=..", "# t=..", "# grid=.." lines, then r,phi,phi_t.
void write_snapshot(const std::filesystem::path& path, const FieldState& s, SnapshotFormat fmt);
// Grids that match `reuse` (same faces) share it.
FieldState read_snapshot(const std::filesystem::path& path, const GridPtr& reuse = nullptr);

// Sorted snapshot files (snap_*.bin or snap_*.csv) in a run directory.
std::vector<std::filesystem::path> list_snapshots(const std::filesystem::path& dir);

// Lowercase hex SHA-256 of a file.
std::string sha256_file(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace sigma
