#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rlxa/functionals.hpp"

namespace rlxa {

/// Binary sample table: magic "RLXA1\0", five little-endian u64 header
/// fields (dim, n_nodes, n_boundary, n_samples, n_columns), the column names
/// as u64 length + bytes, then n_samples × n_columns little-endian f64,
/// row-major.
struct Snapshot {
  std::uint64_t dim = 1;
  std::uint64_t n_nodes = 0;
  std::uint64_t n_boundary = 0;
  std::vector<std::string> columns;
  std::vector<double> data;

  [[nodiscard]] std::uint64_t n_samples() const { return columns.empty() ? 0 : data.size() / columns.size(); }
  [[nodiscard]] double at(std::size_t row, std::size_t col) const { return data[row * columns.size() + col]; }
  void add_row(const std::vector<double>& row);
};

std::string encode_snapshot(const Snapshot& s);
/// Throws std::runtime_error for a bad magic, truncated input or inconsistent sizes.
Snapshot decode_snapshot(const std::string& bytes);
void write_snapshot(const std::string& path, const Snapshot& s);
Snapshot read_snapshot(const std::string& path);

/// `t,<columns...>` header, values with 17 significant digits.
void write_csv(std::ostream& os, const EnergyLedger& ledger);
void write_csv(const std::string& path, const EnergyLedger& ledger);
/// Inverse of write_csv; the first column must be t.
EnergyLedger read_csv(std::istream& is, const std::string& source = "<csv>");
EnergyLedger read_csv(const std::string& path);

std::string format_double(double x);

}  // namespace rlxa
