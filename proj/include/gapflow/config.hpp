#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gapflow/number_field.hpp"
#include "gapflow/partition_volumes.hpp"
#include "gapflow/region.hpp"
#include "gapflow/unit_flow.hpp"

namespace gapflow {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// t values: an explicit list, an inclusive range start..stop by step, or
/// floor(base^(i / denominator)) for i = from..to.
struct Schedule {
  enum class Kind { list, range, log };
  Kind kind = Kind::list;
  std::vector<Rational> values;
  Rational start, stop, step = 1;
  long base = 10, denominator = 2, from = 1, to = 6;

  std::vector<Rational> expand() const;
  bool operator==(const Schedule&) const = default;

  /// "3,10,31", "10:300[:step]" or "log:from:to[:denominator[:base]]".
  static Schedule parse(const std::string& text);
  static Schedule log_grid(long from, long to, long denominator = 2, long base = 10);
};

struct RegionSpec {
  ConvexRegion::Kind kind = ConvexRegion::Kind::box;
  std::vector<Rational> lo, hi;                 // box
  std::vector<ConvexRegion::Halfspace> rows;    // halfspaces
  bool operator==(const RegionSpec& o) const;
};

struct VolumeSpec {
  VolumeMethod method = VolumeMethod::monte_carlo;
  std::size_t samples = std::size_t{1} << 20;
  std::size_t shifts = 16;
  std::size_t resolution = 512;
  std::uint64_t seed = 0x5eed;
  bool operator==(const VolumeSpec&) const = default;
  VolumeOptions options() const;
};

struct RunConfig {
  std::string name;
  FieldSpec field;
  std::vector<std::vector<Rational>> units;  // basis coordinates (n0, ..., nd)
  RegionSpec region;
  Schedule schedule;
  std::optional<Schedule> label_schedule;  // defaults to `schedule`
  unsigned precision_bits = 200;
  Rational tol_imag = Rational(1, 100000000);
  std::optional<Rational> alpha;
  std::optional<Rational> K_prime;
  VolumeSpec volume;
  std::size_t word_length = 1;
  std::string output_path = "-";
  std::string output_format = "csv";

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& c);

/// Objects built from a config, sharing one field.
struct Workspace {
  RunConfig config;
  std::shared_ptr<const NumberField> field;
  std::unique_ptr<ConvexRegion> region;
  std::optional<UnitSystem> units;  // empty when no generators are given

  static Workspace make(RunConfig config);
  const UnitSystem& unit_system() const;
};

}  // namespace gapflow
