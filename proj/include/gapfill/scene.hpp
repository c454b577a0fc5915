#pragma once

#include <cstdint>

#include "gapfill/raster.hpp"

namespace gapfill {

/// Synthetic test scene: a piecewise-constant class mosaic (nearest-site
/// regions) with per-class texture noise, a smooth illumination gradient and
/// one bright spot. Deterministic given the seed.
Raster generate_scene(std::uint64_t seed, int width, int height, int bands, int n_classes);

} // namespace gapfill
