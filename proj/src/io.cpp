#include "fsi/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fsi {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string CsvWriter::render() const {
  std::ostringstream os;
  os << header_comment << "\n";
  for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
  os << "\n";
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
    os << "\n";
  }
  return os.str();
}

void SummaryWriter::add(const std::string& k, double v) { entries.emplace_back(k, format_double(v)); }
void SummaryWriter::add(const std::string& k, long v) { entries.emplace_back(k, std::to_string(v)); }

std::string SummaryWriter::render() const {
  std::ostringstream os;
  for (const auto& [k, v] : entries) os << k << " = " << v << "\n";
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw std::runtime_error("cannot create directory " + path + ": " + ec.message());
}

}  // namespace fsi
