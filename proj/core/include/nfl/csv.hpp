#pragma once

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "nfl/errors.hpp"

namespace nfl {

// Round-trip-safe formatting; 17 significant digits keeps reruns
// byte-identical without printing noise like 0.30000000000000004 for
// values that have a shorter exact representation.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back == v) {
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[40];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      std::sscanf(shorter, "%lf", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot open for writing: " + path);
  }

  template <class Range>
  void header(const Range& cols) {
    bool first = true;
    for (const char* c : cols) {
      if (!first) out_ << ',';
      out_ << c;
      first = false;
    }
    out_ << '\n';
  }
  void header(std::initializer_list<const char*> cols) {
    header<std::initializer_list<const char*>>(cols);
  }

  template <class Range>
  void row(const Range& vals) {
    bool first = true;
    for (double v : vals) {
      if (!first) out_ << ',';
      out_ << format_double(v);
      first = false;
    }
    out_ << '\n';
  }
  void row(std::initializer_list<double> vals) {
    row<std::initializer_list<double>>(vals);
  }

 private:
  std::ofstream out_;
};

}  // namespace nfl
