#include "wordspot/render.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "wordspot/lexicon.hpp"

namespace wordspot {

namespace {

constexpr uint64_t kGlyphTableSeed = 0x617a9c3b52e1d84fULL;
constexpr uint64_t kStyleTag = 0x5717e5ULL;

Glyph make_glyph(const std::string& language, char character) {
    Rng rng(hash_combine(hash_str(kGlyphTableSeed, language), static_cast<uint64_t>(
                             static_cast<unsigned char>(character))));
    Glyph g;
    const int n_strokes = rng.uniform_int(2, 4);
    g.strokes.resize(static_cast<std::size_t>(n_strokes));
    for (auto& stroke : g.strokes) {
        const int n_points = rng.uniform_int(2, 4);
        stroke.resize(static_cast<std::size_t>(n_points));
        for (auto& p : stroke) {
            p.first = rng.uniform(0.08, 0.92);
            p.second = rng.uniform(0.08, 0.92);
        }
    }
    return g;
}

std::map<std::pair<std::string, char>, Glyph> g_glyph_table;
std::mutex g_glyph_mutex;

double dist_to_segment(double px, double py, double x0, double y0, double x1, double y1) {
    const double dx = x1 - x0, dy = y1 - y0;
    const double len_sq = dx * dx + dy * dy;
    double t = 0.0;
    if (len_sq > 0.0) t = std::clamp(((px - x0) * dx + (py - y0) * dy) / len_sq, 0.0, 1.0);
    const double cx = x0 + t * dx, cy = y0 + t * dy;
    return std::hypot(px - cx, py - cy);
}

void draw_segment(Image& img, double x0, double y0, double x1, double y1, double thickness) {
    const double radius = thickness * 0.5;
    const int r_lo = std::max(0, static_cast<int>(std::floor(std::min(y0, y1) - radius - 1)));
    const int r_hi = std::min(img.height - 1, static_cast<int>(std::ceil(std::max(y0, y1) + radius + 1)));
    const int c_lo = std::max(0, static_cast<int>(std::floor(std::min(x0, x1) - radius - 1)));
    const int c_hi = std::min(img.width - 1, static_cast<int>(std::ceil(std::max(x0, x1) + radius + 1)));
    for (int r = r_lo; r <= r_hi; ++r) {
        for (int c = c_lo; c <= c_hi; ++c) {
            const double d = dist_to_segment(c + 0.5, r + 0.5, x0, y0, x1, y1);
            const double coverage = std::clamp(radius + 0.5 - d, 0.0, 1.0);
            if (coverage > img.at(r, c)) img.at(r, c) = coverage;
        }
    }
}

}  // namespace

StyleParams style_from_id(int style_id, uint64_t dataset_seed) {
    Rng rng(hash_combine(hash_combine(dataset_seed, kStyleTag),
                         static_cast<uint64_t>(style_id)));
    StyleParams s;
    s.style_id = style_id;
    s.slant = rng.uniform(-0.35, 0.35);
    s.stroke_thickness = rng.uniform(1.0, 3.0);
    s.scale_jitter = rng.uniform(0.8, 1.2);
    s.baseline_wobble_amp = rng.uniform(0.0, 2.0);
    s.noise_level = rng.uniform(0.0, 0.15);
    return s;
}

const Glyph& glyph_for(const std::string& language, char character) {
    std::lock_guard<std::mutex> lock(g_glyph_mutex);
    const auto key = std::make_pair(language, character);
    auto it = g_glyph_table.find(key);
    if (it == g_glyph_table.end()) {
        const std::string chars = Lexicon::alphabet(language);
        if (chars.find(character) == std::string::npos) {
            raise(ErrorCode::invalid_argument,
                  std::string("render: character '") + character +
                      "' is not in the alphabet of '" + language + "'");
        }
        it = g_glyph_table.emplace(key, make_glyph(language, character)).first;
    }
    return it->second;
}

Image render_word(const std::string& text, const std::string& language,
                  const StyleParams& style, int height, int width, uint64_t rng_seed,
                  double distortion_scale) {
    if (text.empty()) raise(ErrorCode::invalid_argument, "render: empty text");
    if (height < 8 || width < 8) raise(ErrorCode::invalid_argument, "render: canvas too small");

    const int n = static_cast<int>(text.size());
    const double margin_x = 2.0, margin_y = 2.0;
    const double cell_w = (width - 2.0 * margin_x) / n;
    const double glyph_h = height - 2.0 * margin_y;
    // Glyphs need a minimum footprint to stay legible after jitter.
    if (cell_w * 0.8 * style.scale_jitter < 3.0) {
        raise(ErrorCode::capacity, "render: text '" + text + "' does not fit a " +
                                       std::to_string(width) + "-wide canvas");
    }

    Rng rng(rng_seed);
    Image img;
    img.height = height;
    img.width = width;
    img.pixels.assign(static_cast<std::size_t>(height) * width, 0.0);

    const double wobble_amp = style.baseline_wobble_amp * distortion_scale;
    const double noise_level = style.noise_level * distortion_scale;
    const double shear = std::tan(style.slant);
    const double baseline = height - margin_y;

    for (int k = 0; k < n; ++k) {
        const Glyph& glyph = glyph_for(language, text[static_cast<std::size_t>(k)]);
        const double scale = style.scale_jitter;
        const double gw = cell_w * 0.85 * scale;
        const double gh = glyph_h * scale;
        const double ox = margin_x + k * cell_w + cell_w * 0.075;
        const double oy = margin_y + (glyph_h - gh) * 0.5 + rng.uniform(-wobble_amp, wobble_amp);
        for (const auto& stroke : glyph.strokes) {
            for (std::size_t s = 0; s + 1 < stroke.size(); ++s) {
                auto map_point = [&](double ux, double uy) {
                    const double y = oy + uy * gh;
                    const double x = ox + ux * gw + shear * (baseline - y);
                    return std::make_pair(x, y);
                };
                const auto [x0, y0] = map_point(stroke[s].first, stroke[s].second);
                const auto [x1, y1] = map_point(stroke[s + 1].first, stroke[s + 1].second);
                draw_segment(img, x0, y0, x1, y1, style.stroke_thickness);
            }
        }
    }

    if (noise_level > 0.0) {
        for (double& p : img.pixels) p += rng.normal() * noise_level;
    }
    for (double& p : img.pixels) p = std::clamp(p, 0.0, 1.0);
    return img;
}

}  // namespace wordspot
