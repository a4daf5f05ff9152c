#pragma once

#include <string>
#include <vector>

namespace dynbo {

/// Grayscale image, row-major, intensities in [0, 1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int w, int h, double fill = 0.0);
  Image(int w, int h, std::vector<double> data);

  bool empty() const { return pixels.empty(); }
  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double mean() const;
};

// Rec. 601 luma.
inline double luminance(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

/// Loads a frame as grayscale. Binary PGM/PPM are read natively; other
/// formats go through OpenCV when the library was built with it.
Image load_image(const std::string& path);

/// Writes an 8-bit binary PGM.
void save_pgm(const Image& image, const std::string& path);

}  // namespace dynbo
