#pragma once

namespace tnet {

enum class Pad { same, valid };

// Normalization grouping. width_axis parameterizes per position of the last
// spatial axis (2*W trainable values), channel_axis is the canonical
// per-channel variant (2*C).
enum class BnMode { width_axis, channel_axis };

enum class Phase { infer, train };

// The engine never spawns threads; timed benchmark regions rely on this.
constexpr int engine_thread_count() { return 1; }

}  // namespace tnet
