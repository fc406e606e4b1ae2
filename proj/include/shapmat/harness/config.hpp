#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "shapmat/estimators/estimators.hpp"
#include "shapmat/harness/dataset.hpp"
#include "shapmat/locality/distance.hpp"
#include "shapmat/models/game.hpp"
#include "shapmat/selfval/selfval.hpp"

namespace shapmat {

struct DatasetSource {
  std::optional<std::string> path;
  std::optional<std::string> edges;
  std::optional<BlobSpec> synthetic;
  // Synthetic runs may attach a ring graph over all record ids.
  bool ring = false;
  std::size_t ring_chord = 0;
};

enum class StreamMode { kTask, kPlayer, kMixed };
enum class ReferenceMode { kNone, kExact, kGlobalMc };

const char* to_string(StreamMode mode) noexcept;
const char* to_string(ReferenceMode mode) noexcept;

struct StreamSpec {
  StreamMode mode = StreamMode::kTask;
  // Held-out records streamed after construction: an absolute count, or a
  // fraction of the dataset when count is unset.
  std::optional<std::size_t> count;
  std::optional<double> fraction;
};

struct ExperimentConfig {
  DatasetSource dataset;
  std::uint64_t seed = 0;
  GameConfig game;
  DistanceConfig distance;
  // Anchor budget: count wins over ratio (of the initial pool).
  std::optional<std::size_t> anchor_count;
  double anchor_ratio = 0.5;
  std::optional<std::uint64_t> fps_seed;
  double tau = 1.0;
  std::size_t k_interp = 6;
  std::size_t k_max = kDefaultExactLimit;
  std::size_t kappa = 3;
  SelfValOptions selfval{SelfValMode::kExactShared, SelfValScope::kSupport, {}, kDefaultExactLimit};
  StreamSpec stream;
  McConfig mc;
  ReferenceMode reference = ReferenceMode::kExact;
  std::optional<std::string> output_dir;

  // Throws kInvalidArgument; also checks that referenced files exist.
  void validate() const;
};

// JSON round trip. Missing fields keep their defaults; the distance kind
// defaults to the model family's natural profile.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

}  // namespace shapmat
