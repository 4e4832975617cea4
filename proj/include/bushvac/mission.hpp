#pragma once

#include <string>
#include <vector>

#include "bushvac/errors.hpp"
#include "bushvac/model.hpp"
#include "bushvac/solar.hpp"

namespace bushvac {

/// Time-ordered disturbance samples of one driving mission at native
/// (typically 1 s) resolution.
struct MissionTrace {
  std::string mission_id;
  GeoPos coords;
  std::vector<Disturbance> samples;

  void validate() const {
    if (samples.empty()) throw IoError("mission trace is empty");
    for (size_t i = 0; i < samples.size(); ++i) {
      samples[i].validate();
      if (i > 0 && samples[i].when.epoch_s <= samples[i - 1].when.epoch_s)
        throw IoError("mission trace timestamps are not strictly increasing at row " +
                      std::to_string(i));
    }
  }

  std::int64_t duration_s() const {
    return samples.back().when.epoch_s - samples.front().when.epoch_s;
  }

  /// Largest gap between consecutive samples [s]; useful to flag holes.
  std::int64_t max_gap_s() const {
    std::int64_t g = 0;
    for (size_t i = 1; i < samples.size(); ++i)
      g = std::max(g, samples[i].when.epoch_s - samples[i - 1].when.epoch_s);
    return g;
  }
};

}  // namespace bushvac
