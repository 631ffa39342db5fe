#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wordspot/common.hpp"

namespace wordspot {

// Writing-style parameters. style_id maps deterministically to a point in
// this space given the dataset seed.
struct StyleParams {
    int style_id = 0;
    double slant = 0.0;               // radians, [-0.35, 0.35]
    double stroke_thickness = 1.5;    // pixels, [1, 3]
    double scale_jitter = 1.0;        // [0.8, 1.2]
    double baseline_wobble_amp = 0.0; // pixels, [0, 2]
    double noise_level = 0.0;         // [0, 0.15]
};

StyleParams style_from_id(int style_id, uint64_t dataset_seed);

// Grayscale canvas, values in [0,1], row-major.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> pixels;

    double& at(int r, int c) { return pixels[static_cast<std::size_t>(r) * width + c]; }
    double at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * width + c]; }
};

// One glyph: polyline strokes with control points in the unit square.
struct Glyph {
    std::vector<std::vector<std::pair<double, double>>> strokes;
};

// Per-language glyph table; fixed for a language tag (independent of the
// dataset seed, so the "script" is stable across datasets).
const Glyph& glyph_for(const std::string& language, char character);

// Rasterizes `text` in the given language's script onto an H x W canvas.
// distortion_scale widens the wobble/noise style fields (OOD and
// fine-tune splits use 1.5, everything else 1.0). Deterministic in all
// arguments including rng_seed.
Image render_word(const std::string& text, const std::string& language,
                  const StyleParams& style, int height, int width, uint64_t rng_seed,
                  double distortion_scale = 1.0);

}  // namespace wordspot
