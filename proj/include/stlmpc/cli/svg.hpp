// Deterministic SVG plots of the simulation log streams: fixed viewport,
// fixed palette, fixed number formatting, no timestamps — identical input
// renders byte-identical output, so plots are testable as text.

#pragma once

#include <string>

#include "stlmpc/cli/io.hpp"

namespace stlmpc {

enum class PlotKind { Trajectory, Controls, Deltas, Front };

PlotKind plot_kind_from_string(const std::string& s);

// Renders one plot; throws std::invalid_argument when the stream the
// kind depends on is empty.
std::string render_svg(const LogStreams& ls, PlotKind kind);

}  // namespace stlmpc
