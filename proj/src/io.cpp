#include "sigma_collapse/io.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "sigma_collapse/errors.h"

namespace sigma {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& text, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, what + ": '" + text + "' is not a number");
  }
}

long to_long(const std::string& text, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, what + ": '" + text + "' is not an integer");
  }
}

constexpr char kMagic[8] = {'S', 'C', 'S', 'N', 'A', 'P', '0', '1'};

template <class T>
void put(std::ofstream& o, const T& v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::filesystem::path& p) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw Error(ErrorCode::kIo, "truncated snapshot " + p.string());
  }
  return v;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

Config Config::parse(const std::string& text, const std::string& source) {
  Config c;
  c.source_ = source;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfig, source + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::kConfig, source + ":" + std::to_string(lineno) + ": empty key");
    if (c.values_.count(key)) {
      throw Error(ErrorCode::kConfig, source + ":" + std::to_string(lineno) + ": duplicate key " + key);
    }
    c.values_[key] = value;
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::string Config::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::kConfig, source_ + ": missing key " + key);
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double Config::get_double(const std::string& key) const { return to_double(get_string(key), key); }

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long Config::get_int(const std::string& key) const { return to_long(get_string(key), key); }

long Config::get_int(const std::string& key, long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto v = get_string(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::kConfig, key + ": '" + v + "' is not a boolean");
}

std::vector<std::string> Config::get_list(const std::string& key) const {
  std::vector<std::string> out;
  for (auto& item : split(get_string(key), ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  if (out.empty()) throw Error(ErrorCode::kConfig, key + ": empty list");
  return out;
}

void Config::require_known(const std::vector<std::string>& known) const {
  for (const auto& [k, v] : values_) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw Error(ErrorCode::kConfig, source_ + ": unknown key " + k);
    }
  }
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path), width_(header.size()) {
  if (!out_) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  row_cells(header);
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  row_cells(cells);
}

void CsvWriter::row_cells(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw Error(ErrorCode::kIo, "row width mismatch in " + path_.string());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

void CsvWriter::close() {
  out_.close();
  if (out_.fail()) throw Error(ErrorCode::kIo, "write failed for " + path_.string());
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(ErrorCode::kIo, "CSV has no column " + name);
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  CsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (t.header.empty()) {
      t.header = split(line, ',');
    } else {
      t.rows.push_back(split(line, ','));
    }
  }
  if (t.header.empty()) throw Error(ErrorCode::kIo, "empty CSV " + path.string());
  return t;
}

SnapshotFormat parse_snapshot_format(const std::string& s) {
  if (s == "binary") return SnapshotFormat::kBinary;
  if (s == "csv") return SnapshotFormat::kCsv;
  throw Error(ErrorCode::kConfig, "snapshot format must be binary or csv, got '" + s + "'");
}

void write_snapshot(const std::filesystem::path& path, const FieldState& s, SnapshotFormat fmt) {
  check_consistent(s);
  const auto& g = *s.grid;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  const std::string desc = g.spec().describe();
  if (fmt == SnapshotFormat::kBinary) {
    out.write(kMagic, sizeof kMagic);
    put<std::int32_t>(out, s.k.value());
    put<double>(out, s.t);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(desc.size()));
    out.write(desc.data(), static_cast<std::streamsize>(desc.size()));
    put<std::uint64_t>(out, g.size());
    const auto f = g.faces();
    out.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(s.phi.data()), static_cast<std::streamsize>(g.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(s.phi_t.data()), static_cast<std::streamsize>(g.size() * sizeof(double)));
  } else {
    out << "# k=" << s.k.value() << '\n' << "# t=" << format_double(s.t) << '\n' << "# grid=" << desc << '\n';
    out << "r,phi,phi_t\n";
    for (std::size_t i = 0; i < g.size(); ++i) {
      out << format_double(g.r(i)) << ',' << format_double(s.phi[i]) << ',' << format_double(s.phi_t[i]) << '\n';
    }
  }
  out.close();
  if (out.fail()) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

FieldState read_snapshot(const std::filesystem::path& path, const GridPtr& reuse) {
  FieldState s;
  if (path.extension() == ".bin") {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
      throw Error(ErrorCode::kIo, path.string() + " is not a snapshot");
    }
    s.k = HomotopyClass(get<std::int32_t>(in, path));
    s.t = get<double>(in, path);
    std::string desc(get<std::uint32_t>(in, path), '\0');
    in.read(desc.data(), static_cast<std::streamsize>(desc.size()));
    const auto n = get<std::uint64_t>(in, path);
    std::vector<double> faces(n + 1);
    s.phi.resize(n);
    s.phi_t.resize(n);
    in.read(reinterpret_cast<char*>(faces.data()), static_cast<std::streamsize>(faces.size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(s.phi.data()), static_cast<std::streamsize>(n * sizeof(double)));
    in.read(reinterpret_cast<char*>(s.phi_t.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw Error(ErrorCode::kIo, "truncated snapshot " + path.string());
    if (reuse && reuse->size() == n && std::equal(faces.begin(), faces.end(), reuse->faces().begin())) {
      s.grid = reuse;
    } else {
      s.grid = std::make_shared<const RadialGrid>(std::move(faces), GridSpec::parse(desc));
    }
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
    std::string line, desc;
    bool header = false;
    std::vector<double> r;
    while (std::getline(in, line)) {
      if (line.rfind("# k=", 0) == 0) {
        s.k = HomotopyClass(static_cast<int>(to_long(line.substr(4), "k")));
      } else if (line.rfind("# t=", 0) == 0) {
        s.t = to_double(line.substr(4), "t");
      } else if (line.rfind("# grid=", 0) == 0) {
        desc = line.substr(7);
      } else if (!header) {
        header = true;
      } else if (!line.empty()) {
        const auto c = split(line, ',');
        if (c.size() != 3) throw Error(ErrorCode::kIo, "bad snapshot row in " + path.string());
        r.push_back(to_double(c[0], "r"));
        s.phi.push_back(to_double(c[1], "phi"));
        s.phi_t.push_back(to_double(c[2], "phi_t"));
      }
    }
    const auto spec = GridSpec::parse(desc);
    if (reuse && reuse->size() == r.size() && std::equal(r.begin(), r.end(), reuse->nodes().begin())) {
      s.grid = reuse;
    } else {
      s.grid = make_grid(spec);
    }
    if (s.grid->size() != r.size()) throw Error(ErrorCode::kIo, "grid mismatch in " + path.string());
  }
  check_consistent(s);
  return s;
}

std::vector<std::filesystem::path> list_snapshots(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::kIo, dir.string() + " is not a directory");
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    const auto ext = e.path().extension();
    if (name.rfind("snap_", 0) == 0 && (ext == ".bin" || ext == ".csv")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  out.close();
  if (out.fail()) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace sigma
