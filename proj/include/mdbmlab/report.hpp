#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mdbmlab {

using Json = nlohmann::ordered_json;

/// Outcome of one named verification. `details` holds free-form evidence in
/// insertion order so serialized reports are byte-stable.
struct TestReport {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::uint64_t n_samples = 0;
  std::vector<std::uint64_t> seeds;
  std::optional<double> runtime_seconds;
  Json details = Json::object();
};

/// Serialization used by the CLI. Wall-clock runtime is emitted only when
/// `with_timing` is set; otherwise the field is null and reruns are
/// byte-identical.
Json to_json(const TestReport& r, bool with_timing = false);
Json to_json(const std::vector<TestReport>& rs, bool with_timing = false);

}  // namespace mdbmlab
