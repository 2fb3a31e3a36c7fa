#include "spectral/io.hpp"

#include <array>
#include <bit>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "spectral/error.hpp"

namespace spectral::io {

namespace {

constexpr std::array<char, 4> kMagic = {'S', 'P', 'L', '1'};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& field, double& out) {
  const std::string t = trim(field);
  if (t.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) fields.push_back(cur);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

bool get_u64(std::istream& in, std::uint64_t& v) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) return false;
  v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return true;
}

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  std::string hex() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
  }
};

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, "cannot write '" + path + "'");
  out << text;
  if (!out) fail(Errc::io, "write failed for '" + path + "'");
}

Matrix read_matrix_csv(std::istream& in, const std::string& name) {
  std::vector<double> values;
  std::size_t cols = 0, rows = 0, line_no = 0;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (first && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
      line.erase(0, 3);
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) numeric = numeric && parse_double(fields[i], row[i]);
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header
      }
      fail(Errc::io, name + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    first = false;
    if (rows == 0) cols = row.size();
    if (row.size() != cols)
      fail(Errc::io, name + ":" + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                         " columns, found " + std::to_string(row.size()));
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) fail(Errc::io, name + ": no data rows");
  return Matrix(rows, cols, std::move(values));
}

Matrix read_matrix_bin(std::istream& in, const std::string& name) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kMagic) fail(Errc::io, name + ": bad magic (expected SPL1)");
  std::uint64_t rows = 0, cols = 0;
  if (!get_u64(in, rows) || !get_u64(in, cols)) fail(Errc::io, name + ": truncated header");
  if (cols != 0 && rows > (std::uint64_t(1) << 40) / cols) fail(Errc::io, name + ": implausible shape");
  std::vector<double> values(rows * cols);
  for (double& v : values) {
    std::uint64_t bits = 0;
    if (!get_u64(in, bits)) fail(Errc::io, name + ": truncated data");
    v = std::bit_cast<double>(bits);
  }
  if (in.peek() != std::char_traits<char>::eof()) fail(Errc::io, name + ": trailing bytes after data");
  return Matrix(rows, cols, std::move(values));
}

Matrix read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open '" + path + "'");
  std::array<char, 4> head{};
  in.read(head.data(), 4);
  const bool is_bin = in.gcount() == 4 && head == kMagic;
  in.clear();
  in.seekg(0);
  return is_bin ? read_matrix_bin(in, path) : read_matrix_csv(in, path);
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

void write_matrix_bin(std::ostream& out, const Matrix& m) {
  out.write(kMagic.data(), 4);
  put_u64(out, m.rows());
  put_u64(out, m.cols());
  for (double v : m.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
}

void write_matrix(const std::string& path, const Matrix& m, MatrixFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, "cannot write '" + path + "'");
  if (format == MatrixFormat::bin)
    write_matrix_bin(out, m);
  else
    write_matrix_csv(out, m);
  if (!out) fail(Errc::io, "write failed for '" + path + "'");
}

std::vector<int> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open '" + path + "'");
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size()) {
      if (first) {
        first = false;
        continue;
      }
      fail(Errc::io, path + ":" + std::to_string(line_no) + ": label is not an integer");
    }
    first = false;
    if (v < 0) fail(Errc::contract, path + ":" + std::to_string(line_no) + ": negative label");
    labels.push_back(static_cast<int>(v));
  }
  if (labels.empty()) fail(Errc::io, path + ": no labels");
  return labels;
}

void write_labels(const std::string& path, const std::vector<int>& labels) {
  std::ostringstream ss;
  for (int y : labels) ss << y << '\n';
  write_text(path, ss.str());
}

std::string matrix_digest(const Matrix& m) {
  Fnv1a f;
  f.add(m.rows());
  f.add(m.cols());
  for (double v : m.data()) f.add(std::bit_cast<std::uint64_t>(v));
  return f.hex();
}

std::string labels_digest(const std::vector<int>& labels) {
  Fnv1a f;
  f.add(labels.size());
  for (int y : labels) f.add(static_cast<std::uint64_t>(y));
  return f.hex();
}

std::string text_digest(const std::string& text) {
  Fnv1a f;
  f.add(text.size());
  for (unsigned char c : text) f.add(c);
  return f.hex();
}

}  // namespace spectral::io
