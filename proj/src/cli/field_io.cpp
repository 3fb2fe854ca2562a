#include "perimeter_phase/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "perimeter_phase/errors.hpp"

namespace perimeter_phase {

namespace fs = std::filesystem;

namespace {

fs::path sidecar_of(const fs::path& path) { return fs::path(path.string() + ".json"); }

std::uint64_t to_little(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(x);
  return x;
}

bool same_grid(const Domain& a, const Domain& b) { return a.to_json() == b.to_json(); }

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

FieldFormat field_format_for(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".csv") return FieldFormat::csv;
  if (ext == ".bin" || ext == ".f64") return FieldFormat::binary;
  fail(ErrorCode::config, "field path '" + path.string() + "' must end in .csv, .bin or .f64");
}

void write_field(const ScalarField& field, const fs::path& path) {
  write_field(field, path, field_format_for(path));
}

void write_field(const ScalarField& field, const fs::path& path, FieldFormat format) {
  const Domain& d = *field.domain;
  if (format == FieldFormat::csv) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::io, "cannot write " + path.string());
    out << (d.dim() == 1 ? "index,x,value\n" : "index,x,y,value\n");
    for (Index k = 0; k < field.size(); ++k) {
      const Point p = d.node(k);
      out << k << ',' << format_double(p.x()) << ',';
      if (d.dim() == 2) out << format_double(p.y()) << ',';
      out << format_double(field.values[k]) << '\n';
    }
    if (!out) fail(ErrorCode::io, "write failed for " + path.string());
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  for (Index k = 0; k < field.size(); ++k) {
    const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(field.values[k]));
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
  std::ofstream side(sidecar_of(path));
  side << d.to_json().dump(2) << '\n';
  if (!side) fail(ErrorCode::io, "cannot write " + sidecar_of(path).string());
}

ScalarField read_field(const fs::path& path, DomainPtr expected) {
  const FieldFormat format = field_format_for(path);
  std::ifstream in(path, format == FieldFormat::binary ? std::ios::binary : std::ios::in);
  if (!in) fail(ErrorCode::io, "cannot open field file " + path.string());

  if (format == FieldFormat::binary) {
    std::ifstream side(sidecar_of(path));
    if (!side) fail(ErrorCode::io, "missing sidecar " + sidecar_of(path).string());
    nlohmann::json header;
    try {
      header = nlohmann::json::parse(side);
    } catch (const std::exception& e) {
      fail(ErrorCode::io, "sidecar " + sidecar_of(path).string() + ": " + e.what());
    }
    DomainPtr domain;
    try {
      domain = Domain::from_json(header);
    } catch (const Error& e) {
      fail(ErrorCode::io, "sidecar " + sidecar_of(path).string() + ": " + e.what());
    }
    if (header.contains("h") && std::abs(header.at("h").get<double>() - domain->h()) > 1e-12 * domain->h()) {
      fail(ErrorCode::io, "sidecar spacing h disagrees with its shape and n");
    }
    if (expected) {
      if (!same_grid(*domain, *expected)) {
        fail(ErrorCode::io, "field " + path.string() + " lives on a different grid than configured");
      }
      domain = expected;
    }
    Eigen::ArrayXd v(domain->node_count());
    for (Index k = 0; k < v.size(); ++k) {
      std::uint64_t bits = 0;
      if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
        fail(ErrorCode::io, "field " + path.string() + " holds fewer than " +
                                std::to_string(v.size()) + " values");
      }
      v[k] = std::bit_cast<double>(to_little(bits));
    }
    if (in.peek() != std::char_traits<char>::eof()) {
      fail(ErrorCode::io, "field " + path.string() + " holds more values than its grid");
    }
    try {
      return ScalarField(domain, std::move(v));
    } catch (const Error& e) {
      fail(ErrorCode::io, "field " + path.string() + ": " + e.what());
    }
  }

  if (!expected) fail(ErrorCode::config, "reading CSV field " + path.string() + " needs a configured domain");
  const Domain& d = *expected;
  std::string line;
  std::getline(in, line);
  const std::string header = d.dim() == 1 ? "index,x,value" : "index,x,y,value";
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) fail(ErrorCode::io, "field " + path.string() + ": expected header '" + header + "'");
  Eigen::ArrayXd v(d.node_count());
  const double tol = 1e-9 * std::max(1.0, (d.hi() - d.lo()).norm());
  Index k = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (k >= v.size()) fail(ErrorCode::io, "field " + path.string() + " has more rows than grid nodes");
    std::istringstream row(line);
    std::string cell;
    std::vector<double> cols;
    try {
      while (std::getline(row, cell, ',')) cols.push_back(std::stod(cell));
    } catch (const std::exception&) {
      fail(ErrorCode::io, "field " + path.string() + ": unparsable row " + std::to_string(k + 2));
    }
    if (cols.size() != std::size_t(d.dim() + 2) || Index(cols[0]) != k) {
      fail(ErrorCode::io, "field " + path.string() + ": malformed row " + std::to_string(k + 2));
    }
    const Point p = d.node(k);
    if (std::abs(cols[1] - p.x()) > tol || (d.dim() == 2 && std::abs(cols[2] - p.y()) > tol)) {
      fail(ErrorCode::io, "field " + path.string() + ": node " + std::to_string(k) +
                              " coordinates do not match the configured grid");
    }
    v[k] = cols.back();
    ++k;
  }
  if (k != v.size()) {
    fail(ErrorCode::io, "field " + path.string() + " has " + std::to_string(k) + " rows, grid has " +
                            std::to_string(v.size()) + " nodes");
  }
  try {
    return ScalarField(expected, std::move(v));
  } catch (const Error& e) {
    fail(ErrorCode::io, "field " + path.string() + ": " + e.what());
  }
}

}  // namespace perimeter_phase
