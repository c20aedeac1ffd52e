#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "attrcons/errors.hpp"

namespace attrcons {

// Row-major grayscale image with luma in [0,1].
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, double fill = 0.0)
      : width(w), height(h), pixels(w * h, fill) {}

  double at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
  double& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }

  bool operator==(const GrayImage&) const = default;
};

// Binary 8-bit PGM (P5). The only image codec this library ships; anything
// else has to be converted upstream.
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& image, const std::filesystem::path& path);

// Box blur with a (2*radius+1)^2 kernel, edges clamped.
GrayImage box_blur(const GrayImage& image, std::size_t radius);

// Mirror around the vertical axis.
GrayImage mirror_horizontal(const GrayImage& image);

// All pixels multiplied by factor, clamped to [0,1].
GrayImage scaled(const GrayImage& image, double factor);

// Left half (columns [0, width/2)) multiplied by factor.
GrayImage darkened_left_half(const GrayImage& image, double factor);

}  // namespace attrcons
