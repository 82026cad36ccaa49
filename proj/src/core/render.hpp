#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "core/placement.hpp"

namespace binpack {

// Pixels per grid cell in rendered images.
inline constexpr int kCellPixels = 32;

// One SVG document per box. 2D boxes show every object as a labelled
// rectangle (z up); 3D boxes show top, front and side orthographic
// projections. Each object rectangle carries data-index, data-view and its
// grid-unit coordinates so the layout can be recovered from the image.
std::vector<std::string> render_svg(const PackingResult& result);

// Writes "<prefix>_box<k>.svg" for every box and returns the paths.
std::vector<std::filesystem::path> render_to_files(const PackingResult& result,
                                                   const std::string& prefix);

}  // namespace binpack
