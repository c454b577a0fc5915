#pragma once

#include <string>

#include "gapfill/raster.hpp"

namespace gapfill {

// BRAW: ASCII header "BRAW <width> <height> <bands>\n" followed by
// width*height*bands unsigned 8-bit samples, band-major then row-major.
// The round trip write_raster -> read_raster is bit-exact.

Raster read_raster(const std::string& path);
void write_raster(const Raster& r, const std::string& path);

// Single-band PGM (P5, maxval 255) import/export for visualization.
Raster read_pgm(const std::string& path);
void write_pgm(const Raster& r, int band, const std::string& path);

// Masks travel as single-band BRAW rasters: 255 = missing, 0 = valid.
GapMask mask_from_raster(const Raster& r);
Raster mask_to_raster(const GapMask& m);

// Class maps as single-band BRAW (labels must fit in [0,255]).
ClassMap classmap_from_raster(const Raster& r, int k_classes);
Raster classmap_to_raster(const ClassMap& c);

} // namespace gapfill
