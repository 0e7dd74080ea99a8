// Adaptive frame-index planner. Pure index math: videos shorter than the
// frame budget are sampled at 1 FPS, longer ones are uniformly downsampled
// to exactly the budget. No decoding anywhere near this.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "hlveval/core.hpp"

namespace hlveval {

struct FrameSamplingPlan {
  std::int64_t total_frames = 0;  // T
  double fps = 0.0;               // F
  std::int64_t max_frames = 0;    // N_max
  double duration = 0.0;          // D = T / F, seconds
  double step = 0.0;              // F when D <= N_max, else T / N_max
  std::vector<std::int64_t> indices;  // strictly increasing, in [0, T)

  bool operator==(const FrameSamplingPlan&) const = default;
};

// indices = unique floor(k * step) for k = 0, 1, 2, ... while below T.
// The duration-vs-budget comparison deliberately puts seconds next to a
// frame count: at 1 FPS the sampled-frame count is ~D, so the branch reads
// "1-FPS sampling stays within budget". Repeated floors (possible when
// step < 1) are deduplicated. Throws InvalidInput on non-positive inputs.
inline FrameSamplingPlan plan_frames(std::int64_t total_frames, double fps,
                                     std::int64_t max_frames) {
  if (total_frames < 1) throw InvalidInput("total frame count must be positive");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw InvalidInput("fps must be positive and finite");
  if (max_frames < 1) throw InvalidInput("frame budget must be positive");

  FrameSamplingPlan plan;
  plan.total_frames = total_frames;
  plan.fps = fps;
  plan.max_frames = max_frames;
  plan.duration = static_cast<double>(total_frames) / fps;
  const bool downsample = plan.duration > static_cast<double>(max_frames);
  plan.step = downsample
                  ? static_cast<double>(total_frames) / static_cast<double>(max_frames)
                  : fps;

  for (std::int64_t k = 0;; ++k) {
    // In the downsampling branch step is the rational T / N_max, so
    // floor(k * step) is evaluated in integer arithmetic; rounding the
    // quotient through a double can smuggle in an extra index right at T.
    const std::int64_t index =
        downsample ? (k * total_frames) / max_frames
                   : static_cast<std::int64_t>(
                         std::floor(static_cast<double>(k) * plan.step));
    if (index >= total_frames) break;
    if (plan.indices.empty() || plan.indices.back() != index)
      plan.indices.push_back(index);
  }
  return plan;
}

}  // namespace hlveval
