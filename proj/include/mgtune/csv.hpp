#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgtune {

/// Minimal comma-separated writer. Doubles are rendered with "%.17g" so a
/// round-trip through text preserves the exact binary value, which is what
/// makes same-seed reruns byte-identical at the file level.
class CsvWriter {
 public:
  struct Cell {
    std::string text;
    Cell(double v) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      text = buf;
    }
    Cell(int v) : text(std::to_string(v)) {}
    Cell(unsigned long v) : text(std::to_string(v)) {}
    Cell(unsigned long long v) : text(std::to_string(v)) {}
    Cell(const char* s) : text(s) {}
    Cell(std::string s) : text(std::move(s)) {}
  };

  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("csv: cannot open " + path);
  }

  void row(const std::vector<Cell>& cells) {
    bool first = true;
    for (const Cell& c : cells) {
      if (!first) out_ << ',';
      out_ << c.text;
      first = false;
    }
    out_ << '\n';
  }
  void row(std::initializer_list<Cell> cells) {
    row(std::vector<Cell>(cells));
  }

 private:
  std::ofstream out_;
};

}  // namespace mgtune
