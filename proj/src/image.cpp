#include "attrcons/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>

namespace attrcons {
namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Reads one whitespace-delimited token, skipping '#' comment lines.
std::string next_pgm_token(std::istream& in) {
  std::string token;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') {
        c = in.get();
      }
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    token.push_back(static_cast<char>(c));
    c = in.get();
  }
  return token;
}

std::size_t parse_pgm_size(const std::string& token, const std::filesystem::path& path) {
  if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos) {
    throw ParseError("not a valid PGM header in " + path.string());
  }
  return static_cast<std::size_t>(std::stoull(token));
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open image: " + path.string());
  }
  if (next_pgm_token(in) != "P5") {
    throw ParseError("not a binary PGM (P5) file: " + path.string());
  }
  const std::size_t width = parse_pgm_size(next_pgm_token(in), path);
  const std::size_t height = parse_pgm_size(next_pgm_token(in), path);
  const std::size_t maxval = parse_pgm_size(next_pgm_token(in), path);
  if (width == 0 || height == 0) {
    throw ParseError("PGM with zero dimension: " + path.string());
  }
  if (maxval == 0 || maxval > 255) {
    throw ParseError("only 8-bit PGM supported (maxval <= 255): " + path.string());
  }
  // The single whitespace byte after maxval was already consumed by the
  // token reader.
  GrayImage image(width, height);
  std::vector<std::uint8_t> raw(width * height);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw ParseError("truncated PGM pixel data: " + path.string());
  }
  const double denom = static_cast<double>(maxval);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    image.pixels[i] = static_cast<double>(raw[i]) / denom;
  }
  return image;
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  if (image.width == 0 || image.height == 0 ||
      image.pixels.size() != image.width * image.height) {
    throw ValidationError("write_pgm: malformed image");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot write image: " + path.string());
  }
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  std::vector<std::uint8_t> raw(image.pixels.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] = static_cast<std::uint8_t>(std::lround(clamp01(image.pixels[i]) * 255.0));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) {
    throw ValidationError("failed writing image: " + path.string());
  }
}

GrayImage box_blur(const GrayImage& image, std::size_t radius) {
  if (radius == 0) {
    return image;
  }
  const auto w = static_cast<std::ptrdiff_t>(image.width);
  const auto h = static_cast<std::ptrdiff_t>(image.height);
  const auto r = static_cast<std::ptrdiff_t>(radius);

  // Separable pass: rows then columns.
  GrayImage rows(image.width, image.height);
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double sum = 0.0;
      for (std::ptrdiff_t dx = -r; dx <= r; ++dx) {
        const std::ptrdiff_t sx = std::clamp<std::ptrdiff_t>(x + dx, 0, w - 1);
        sum += image.at(static_cast<std::size_t>(sx), static_cast<std::size_t>(y));
      }
      rows.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) =
          sum / static_cast<double>(2 * r + 1);
    }
  }
  GrayImage out(image.width, image.height);
  for (std::ptrdiff_t y = 0; y < h; ++y) {
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      double sum = 0.0;
      for (std::ptrdiff_t dy = -r; dy <= r; ++dy) {
        const std::ptrdiff_t sy = std::clamp<std::ptrdiff_t>(y + dy, 0, h - 1);
        sum += rows.at(static_cast<std::size_t>(x), static_cast<std::size_t>(sy));
      }
      out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) =
          sum / static_cast<double>(2 * r + 1);
    }
  }
  return out;
}

GrayImage mirror_horizontal(const GrayImage& image) {
  GrayImage out(image.width, image.height);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      out.at(x, y) = image.at(image.width - 1 - x, y);
    }
  }
  return out;
}

GrayImage scaled(const GrayImage& image, double factor) {
  GrayImage out = image;
  for (double& p : out.pixels) {
    p = clamp01(p * factor);
  }
  return out;
}

GrayImage darkened_left_half(const GrayImage& image, double factor) {
  GrayImage out = image;
  const std::size_t half = image.width / 2;
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < half; ++x) {
      out.at(x, y) = clamp01(out.at(x, y) * factor);
    }
  }
  return out;
}

}  // namespace attrcons
