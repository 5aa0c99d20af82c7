#pragma once

#include <string>

#include "pdeconv/image.hpp"

namespace pdeconv {

enum class RasterFormat { pgm_ascii, pgm_binary, f64_raw };

/// `.pgm` -> binary PGM, `.f64` / `.raw` -> f64-raw. Throws for anything else.
RasterFormat format_from_path(const std::string& path);

/// Reads P2/P5 PGM (maxval <= 65535) or little-endian f64-raw with its
/// `<path>.json` sidecar {width, height, dtype: "f64"}.
Image read_raster(const std::string& path);

/// PGM writing rounds to the nearest integer and requires values in [0, 65535].
void write_raster(const std::string& path, const Image& img, RasterFormat format);
void write_raster(const std::string& path, const Image& img);

} // namespace pdeconv
