#include "mdbmlab/io.hpp"

#include <cstdio>

namespace mdbmlab {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Guard against a comma decimal separator from a foreign C locale.
  for (char* c = buf; *c; ++c)
    if (*c == ',') *c = '.';
  return buf;
}

void CsvWriter::header(std::initializer_list<const char*> cols) {
  bool first = true;
  for (const char* c : cols) {
    if (!first) out_ << ',';
    out_ << c;
    first = false;
  }
  out_ << '\n';
}

void CsvWriter::row_path(std::size_t path, double t, int level, int index, double value) {
  out_ << path << ',' << format_double(t) << ',' << level << ',' << index << ',' << format_double(value)
       << '\n';
}

void CsvWriter::row_sample(std::size_t sample, int level, int index, double value) {
  out_ << sample << ',' << level << ',' << index << ',' << format_double(value) << '\n';
}

Json to_json(const TestReport& r, bool with_timing) {
  Json j;
  j["name"] = r.name;
  j["statistic"] = r.statistic;
  j["threshold"] = r.threshold;
  j["pass"] = r.pass;
  j["n_samples"] = r.n_samples;
  j["seeds"] = r.seeds;
  if (with_timing && r.runtime_seconds)
    j["runtime_seconds"] = *r.runtime_seconds;
  else
    j["runtime_seconds"] = nullptr;
  j["details"] = r.details;
  return j;
}

Json to_json(const std::vector<TestReport>& rs, bool with_timing) {
  Json j = Json::array();
  for (const auto& r : rs) j.push_back(to_json(r, with_timing));
  return j;
}

}  // namespace mdbmlab
