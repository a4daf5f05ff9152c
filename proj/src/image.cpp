#include "dynbo/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>

#include "dynbo/errors.hpp"

#ifdef DYNBO_HAVE_OPENCV
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#endif

namespace dynbo {

Image::Image(int w, int h, double fill) : width(w), height(h) {
  if (w < 0 || h < 0) throw InvalidArgument("image dimensions must be nonnegative");
  pixels.assign(static_cast<std::size_t>(w) * h, fill);
}

Image::Image(int w, int h, std::vector<double> data) : width(w), height(h), pixels(std::move(data)) {
  if (w < 0 || h < 0 || pixels.size() != static_cast<std::size_t>(w) * h)
    throw InvalidArgument("pixel count does not match image dimensions");
  for (double v : pixels)
    if (!std::isfinite(v)) throw InvalidArgument("image pixels must be finite");
}

double Image::mean() const {
  if (pixels.empty()) return 0.0;
  return std::accumulate(pixels.begin(), pixels.end(), 0.0) / static_cast<double>(pixels.size());
}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

Image load_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open image '" + path + "'");
  const std::string magic = pnm_token(in);
  if (magic != "P5" && magic != "P6") throw DatasetError("unsupported PNM variant in '" + path + "'");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(pnm_token(in));
    h = std::stoi(pnm_token(in));
    maxval = std::stoi(pnm_token(in));
  } catch (const std::exception&) {
    throw DatasetError("malformed PNM header in '" + path + "'");
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw DatasetError("malformed PNM header in '" + path + "'");

  const int channels = magic == "P6" ? 3 : 1;
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h * channels * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw DatasetError("truncated PNM data in '" + path + "'");

  auto sample = [&](std::size_t i) -> double {
    const double v = bytes == 2 ? raw[2 * i] * 256.0 + raw[2 * i + 1] : raw[i];
    return v / maxval;
  };
  Image img(w, h);
  for (std::size_t p = 0; p < img.pixels.size(); ++p) {
    img.pixels[p] = channels == 1 ? sample(p) : luminance(sample(3 * p), sample(3 * p + 1), sample(3 * p + 2));
  }
  return img;
}

bool has_pnm_extension(const std::string& path) {
  auto dot = path.rfind('.');
  if (dot == std::string::npos) return false;
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == "pgm" || ext == "ppm" || ext == "pnm";
}

}  // namespace

Image load_image(const std::string& path) {
  if (has_pnm_extension(path)) return load_pnm(path);
#ifdef DYNBO_HAVE_OPENCV
  cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
  if (bgr.empty()) throw DatasetError("cannot decode image '" + path + "'");
  Image img(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x)
      img.at(x, y) = luminance(row[x][2] / 255.0, row[x][1] / 255.0, row[x][0] / 255.0);
  }
  return img;
#else
  throw DatasetError("'" + path + "': only PGM/PPM frames are supported in this build");
#endif
}

void save_pgm(const Image& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot write '" + path + "'");
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  std::vector<unsigned char> bytes(image.pixels.size());
  std::transform(image.pixels.begin(), image.pixels.end(), bytes.begin(), [](double v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  });
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace dynbo
