#pragma once

#include "mdbmlab/report.hpp"

#include <ostream>
#include <string>

namespace mdbmlab {

/// Shortest round-trip text is not needed here; every float is written with
/// 17 significant digits and a '.' decimal point regardless of locale.
std::string format_double(double v);

/// Header `path,t,level,index,value` or `sample,level,index,value`.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void header(std::initializer_list<const char*> cols);
  void row_path(std::size_t path, double t, int level, int index, double value);
  void row_sample(std::size_t sample, int level, int index, double value);

 private:
  std::ostream& out_;
};

}  // namespace mdbmlab
