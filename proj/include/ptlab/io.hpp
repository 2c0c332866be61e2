#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ptlab/common.hpp"
#include "ptlab/downfold.hpp"
#include "ptlab/serialize.hpp"

namespace ptlab {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Hashing and number formatting.

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Shortest text that parses back to the same double.
inline std::string fmt_double(double x) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

// ---------------------------------------------------------------------------
// Run manifest.

/// Everything needed to re-run a subcommand: its parameters, seed, thread
/// count and input file digests. The hash covers all of it except the list
/// of outputs.
struct RunManifest {
  std::string subcommand;
  json params = json::object();
  std::uint64_t seed = 0;
  unsigned threads = 1;
  json inputs = json::object();  // path -> fnv1a64 of contents
  std::vector<std::string> outputs;

  json core() const {
    return {{"version", kFormatVersion}, {"tool_version", kVersion}, {"subcommand", subcommand},
            {"params", params},          {"seed", seed},             {"threads", threads},
            {"inputs", inputs}};
  }

  std::string hash() const { return hex64(fnv1a64(core().dump())); }

  json to_json() const {
    json j = core();
    j["manifest_hash"] = hash();
    j["outputs"] = outputs;
    return j;
  }

  static RunManifest from_json(const json& j) {
    RunManifest m;
    try {
      if (j.at("version").get<int>() != kFormatVersion) throw InputError("manifest: unsupported version");
      m.subcommand = j.at("subcommand").get<std::string>();
      m.params = j.at("params");
      m.seed = j.at("seed").get<std::uint64_t>();
      m.threads = j.at("threads").get<unsigned>();
      m.inputs = j.value("inputs", json::object());
    } catch (const json::exception& e) {
      throw InputError(std::string("manifest: ") + e.what());
    }
    return m;
  }

  void add_input(const std::string& path) { inputs[path] = hex64(fnv1a64(read_file_bytes(path))); }

  /// Throws when an input file changed since the manifest was written.
  void verify_inputs() const {
    for (const auto& [path, digest] : inputs.items())
      if (hex64(fnv1a64(read_file_bytes(path))) != digest.get<std::string>())
        throw Error("replay: input '" + path + "' differs from the recorded digest");
  }
};

// ---------------------------------------------------------------------------
// Output files.

/// Output directory plus the manifest hash stamped into every file.
class OutputSink {
public:
  OutputSink(fs::path dir, std::string manifest_hash) : dir_(std::move(dir)), hash_(std::move(manifest_hash)) {
    fs::create_directories(dir_);
  }

  const fs::path& dir() const { return dir_; }
  const std::string& manifest_hash() const { return hash_; }
  const std::vector<std::string>& written() const { return written_; }

  std::ofstream open(const std::string& name, bool binary = false) {
    const auto path = dir_ / name;
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    written_.push_back(name);
    return out;
  }

  /// JSON document with version and manifest_hash fields added.
  void write_json(const std::string& name, json j) {
    j["version"] = kFormatVersion;
    j["manifest_hash"] = hash_;
    open(name) << j.dump(2) << '\n';
  }

private:
  fs::path dir_;
  std::string hash_;
  std::vector<std::string> written_;
};

/// CSV with a leading comment line carrying the format version and manifest
/// hash, then a header row. Units go in the column names.
class CsvWriter {
public:
  CsvWriter(OutputSink& sink, const std::string& name, const std::vector<std::string>& columns)
      : out_(sink.open(name)), columns_(columns.size()) {
    out_ << "# version=" << kFormatVersion << " manifest=" << sink.manifest_hash() << '\n';
    for (std::size_t k = 0; k < columns.size(); ++k) out_ << (k ? "," : "") << columns[k];
    out_ << '\n';
  }

  CsvWriter& cell(double x) { return raw(fmt_double(x)); }
  CsvWriter& cell(long long x) { return raw(std::to_string(x)); }
  CsvWriter& cell(unsigned long long x) { return raw(std::to_string(x)); }
  CsvWriter& cell(int x) { return raw(std::to_string(x)); }
  CsvWriter& cell(std::size_t x) { return raw(std::to_string(x)); }
  CsvWriter& cell(const std::string& s) { return raw(s); }
  CsvWriter& cell(const char* s) { return raw(s); }

  void end_row() {
    require(filled_ == columns_, "CsvWriter: row has wrong number of cells");
    out_ << '\n';
    filled_ = 0;
  }

  template <class... T>
  void row(const T&... cells) {
    (cell(cells), ...);
    end_row();
  }

private:
  CsvWriter& raw(const std::string& s) {
    require(filled_ < columns_, "CsvWriter: too many cells in row");
    out_ << (filled_ ? "," : "") << s;
    ++filled_;
    return *this;
  }

  std::ofstream out_;
  std::size_t columns_ = 0, filled_ = 0;
};

/// Histogram CSV: bin edges and weight; weights normalized to sum 1 when
/// `normalize` is set.
inline void write_histogram_csv(OutputSink& sink, const std::string& name, const std::vector<double>& edges,
                                std::vector<double> weights, const std::string& unit, bool normalize = true) {
  require(edges.size() == weights.size() + 1, "write_histogram_csv: edges must exceed weights by one");
  if (normalize) {
    double s = 0.0;
    for (double w : weights) s += w;
    if (s > 0.0)
      for (auto& w : weights) w /= s;
  }
  CsvWriter csv(sink, name, {"bin_lo_" + unit, "bin_hi_" + unit, "weight"});
  for (std::size_t b = 0; b < weights.size(); ++b) csv.row(edges[b], edges[b + 1], weights[b]);
}

/// Integer-indexed histogram (e.g. Hamming distance).
inline void write_index_histogram_csv(OutputSink& sink, const std::string& name, const std::string& index_name,
                                      std::vector<double> weights, bool normalize = true) {
  if (normalize) {
    double s = 0.0;
    for (double w : weights) s += w;
    if (s > 0.0)
      for (auto& w : weights) w /= s;
  }
  CsvWriter csv(sink, name, {index_name, "weight"});
  for (std::size_t d = 0; d < weights.size(); ++d) csv.row(d, weights[d]);
}

// ---------------------------------------------------------------------------
// Down-folded matrix export.

inline constexpr char kMatrixMagic[8] = {'P', 'T', 'L', 'M', 'A', 'T', '0', '1'};

/// <name>.bin: 8-byte magic, uint64 rows, uint64 cols, then row-major
/// little-endian float64; <name>.json: metadata; <name>.csv when M <= csv_limit.
inline void write_downfolded(OutputSink& sink, const std::string& name, const DownfoldedMatrix& m,
                             Eigen::Index csv_limit = 256) {
  static_assert(std::endian::native == std::endian::little, "binary export assumes a little-endian host");
  const auto M = m.size();
  {
    auto out = sink.open(name + ".bin", true);
    out.write(kMatrixMagic, 8);
    const std::uint64_t dims[2] = {static_cast<std::uint64_t>(M), static_cast<std::uint64_t>(M)};
    out.write(reinterpret_cast<const char*>(dims), sizeof dims);
    for (Eigen::Index i = 0; i < M; ++i)
      for (Eigen::Index j = 0; j < M; ++j) {
        const double x = m.H(i, j);
        out.write(reinterpret_cast<const char*>(&x), sizeof x);
      }
  }
  sink.write_json(name + ".json", {{"rows", M},
                                   {"cols", M},
                                   {"layout", "row-major little-endian float64 after 8-byte magic and two uint64 dims"},
                                   {"n", m.n},
                                   {"B_perp", m.B_perp},
                                   {"V_typ", m.V_typ},
                                   {"W", m.W},
                                   {"reference_energy", m.reference_energy},
                                   {"amplitude_mode", m.amplitude_mode},
                                   {"phase_mode", m.phase_mode},
                                   {"seed", m.seed}});
  if (M <= csv_limit) {
    CsvWriter csv(sink, name + ".csv", {"i", "j", "value"});
    for (Eigen::Index i = 0; i < M; ++i)
      for (Eigen::Index j = 0; j < M; ++j) csv.row(static_cast<long long>(i), static_cast<long long>(j), m.H(i, j));
  }
}

inline Eigen::MatrixXd read_downfolded_bin(const std::string& path) {
  const std::string bytes = read_file_bytes(path);
  if (bytes.size() < 24 || bytes.compare(0, 8, std::string(kMatrixMagic, 8)) != 0)
    throw InputError("'" + path + "' is not a matrix file");
  std::uint64_t dims[2];
  std::memcpy(dims, bytes.data() + 8, sizeof dims);
  if (bytes.size() != 24 + dims[0] * dims[1] * 8) throw InputError("'" + path + "' has the wrong size");
  Eigen::MatrixXd h(dims[0], dims[1]);
  const char* p = bytes.data() + 24;
  for (std::uint64_t i = 0; i < dims[0]; ++i)
    for (std::uint64_t j = 0; j < dims[1]; ++j, p += 8) std::memcpy(&h(i, j), p, 8);
  return h;
}

}  // namespace ptlab
