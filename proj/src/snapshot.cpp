#include "rlxa/snapshot.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rlxa {

namespace {

constexpr char kMagic[6] = {'R', 'L', 'X', 'A', '1', '\0'};

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

struct Reader {
  const std::string& b;
  std::size_t pos = 0;

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  void need(std::size_t n) const {
    if (b.size() - pos < n) throw std::runtime_error("snapshot: truncated input");
  }
};

}  // namespace

void Snapshot::add_row(const std::vector<double>& row) {
  if (row.size() != columns.size()) throw std::invalid_argument("snapshot: row has wrong arity");
  data.insert(data.end(), row.begin(), row.end());
}

std::string encode_snapshot(const Snapshot& s) {
  if (!s.columns.empty() && s.data.size() % s.columns.size() != 0)
    throw std::invalid_argument("snapshot: payload is not a whole number of rows");
  if (s.columns.empty() && !s.data.empty()) throw std::invalid_argument("snapshot: payload without columns");
  std::string out(kMagic, sizeof kMagic);
  put_u64(out, s.dim);
  put_u64(out, s.n_nodes);
  put_u64(out, s.n_boundary);
  put_u64(out, s.n_samples());
  put_u64(out, s.columns.size());
  for (const auto& c : s.columns) {
    put_u64(out, c.size());
    out += c;
  }
  out.reserve(out.size() + 8 * s.data.size());
  for (double x : s.data) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    put_u64(out, bits);
  }
  return out;
}

Snapshot decode_snapshot(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("snapshot: bad magic");
  Reader r{bytes, sizeof kMagic};
  Snapshot s;
  s.dim = r.u64();
  s.n_nodes = r.u64();
  s.n_boundary = r.u64();
  const std::uint64_t rows = r.u64();
  const std::uint64_t cols = r.u64();
  if (cols > bytes.size()) throw std::runtime_error("snapshot: column count exceeds input size");
  for (std::uint64_t c = 0; c < cols; ++c) {
    const std::uint64_t len = r.u64();
    r.need(len);
    s.columns.emplace_back(bytes.substr(r.pos, len));
    r.pos += len;
  }
  if (cols == 0 && rows != 0) throw std::runtime_error("snapshot: rows without columns");
  const std::uint64_t count = rows * cols;
  if (cols != 0 && count / cols != rows) throw std::runtime_error("snapshot: size overflow");
  if ((bytes.size() - r.pos) != 8 * count) throw std::runtime_error("snapshot: payload length mismatch");
  s.data.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t bits = r.u64();
    std::memcpy(&s.data[i], &bits, 8);
  }
  return s;
}

void write_snapshot(const std::string& path, const Snapshot& s) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  const std::string bytes = encode_snapshot(s);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_snapshot(ss.str());
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(std::ostream& os, const EnergyLedger& ledger) {
  os << 't';
  for (const auto& c : ledger.columns()) os << ',' << c;
  os << '\n';
  for (std::size_t i = 0; i < ledger.rows(); ++i) {
    os << format_double(ledger.times()[i]);
    for (const auto& c : ledger.columns()) os << ',' << format_double(ledger.column(c)[i]);
    os << '\n';
  }
}

void write_csv(const std::string& path, const EnergyLedger& ledger) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_csv(out, ledger);
}

EnergyLedger read_csv(std::istream& is, const std::string& source) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(source + ": empty csv");
  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) names.push_back(cell);
  }
  if (names.empty() || names[0] != "t") throw std::runtime_error(source + ": first column must be t");
  EnergyLedger ledger(std::vector<std::string>(names.begin() + 1, names.end()));
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        row.push_back(std::stod(cell, &pos));
        if (pos != cell.size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw std::runtime_error(source + ":" + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != names.size())
      throw std::runtime_error(source + ":" + std::to_string(line_no) + ": wrong number of fields");
    try {
      ledger.add_row(row[0], std::vector<double>(row.begin() + 1, row.end()));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return ledger;
}

EnergyLedger read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_csv(in, path);
}

}  // namespace rlxa
