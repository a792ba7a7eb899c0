#pragma once

// CSV emission with a fixed %.17g format so reruns with identical config
// produce bit-identical files.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace physvac {

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            std::initializer_list<const char*> header)
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path.string());
    bool first = true;
    for (const char* h : header) {
      if (!first) out_ << ',';
      out_ << h;
      first = false;
    }
    out_ << '\n';
  }

  void row(std::span<const double> values) {
    char buf[32];
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", values[i]);
      if (i) out_ << ',';
      out_ << buf;
    }
    out_ << '\n';
  }

  void row(std::initializer_list<double> values) {
    row(std::span<const double>(values.begin(), values.size()));
  }

 private:
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw std::runtime_error("csv: missing column '" + name + "'");
  }
  std::vector<double> col(const std::string& name) const {
    const int c = column(name);
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r[c]);
    return v;
  }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("csv: empty file " + path.string());
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const auto c = line.find(',', pos);
    t.header.push_back(line.substr(pos, c - pos));
    if (c == std::string::npos) break;
    pos = c + 1;
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    pos = 0;
    while (pos <= line.size()) {
      const auto c = line.find(',', pos);
      row.push_back(std::stod(line.substr(pos, c - pos)));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace physvac
