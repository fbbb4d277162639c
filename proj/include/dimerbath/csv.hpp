#ifndef DIMERBATH_CSV_HPP
#define DIMERBATH_CSV_HPP

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace dimerbath {

/// Full-precision, locale-independent formatting ("%.17g" round-trips
/// every double through text).
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvFile {
 public:
  explicit CsvFile(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open output file " + path);
    path_ = path;
  }

  void header(const std::string& line) { out_ << line << "\n"; }

  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      if (!first) out_ << ',';
      out_ << format_double(v);
      first = false;
    }
    out_ << "\n";
  }

  void raw_row(const std::string& line) { out_ << line << "\n"; }

  void close() {
    out_.close();
    if (!out_) throw std::runtime_error("failed writing " + path_);
  }

 private:
  std::ofstream out_;
  std::string path_;
};

}  // namespace dimerbath

#endif
