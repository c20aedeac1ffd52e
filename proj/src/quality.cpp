#include "attrcons/quality.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "attrcons/parallel.hpp"

namespace attrcons {

const std::array<const char*, kQualityFeatureCount> kQualityFeatureNames = {
    "brightness",     "contrast",   "focus",
    "illumination",   "illumination_symmetry",
    "sharpness",      "compression", "pose",
    "eyes_openness",  "mouth_closeness",
    "face_symmetry",
};

std::array<double, kQualityFeatureCount> QualityFeatures::as_array() const {
  return {brightness, contrast,  focus,        illumination,    illumination_symmetry,
          sharpness,  compression, pose,       eyes_openness,   mouth_closeness,
          face_symmetry};
}

QualityFeatures QualityFeatures::from_array(
    const std::array<double, kQualityFeatureCount>& v) {
  QualityFeatures f;
  f.brightness = v[0];
  f.contrast = v[1];
  f.focus = v[2];
  f.illumination = v[3];
  f.illumination_symmetry = v[4];
  f.sharpness = v[5];
  f.compression = v[6];
  f.pose = v[7];
  f.eyes_openness = v[8];
  f.mouth_closeness = v[9];
  f.face_symmetry = v[10];
  return f;
}

std::array<double, kQualityFeatureCount> QualityWeights::as_array() const {
  return {brightness, contrast,  focus,        illumination,    illumination_symmetry,
          sharpness,  compression, pose,       eyes_openness,   mouth_closeness,
          face_symmetry};
}

double QualityWeights::total() const {
  const auto w = as_array();
  return std::accumulate(w.begin(), w.end(), 0.0);
}

QualityWeights load_weights(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("weights file: ") + e.what());
  }
  if (!j.is_object()) {
    throw ParseError("weights file: expected a JSON object of feature -> weight");
  }
  QualityWeights weights;
  auto defaults = weights.as_array();
  std::array<double, kQualityFeatureCount> values = defaults;
  for (const auto& [key, value] : j.items()) {
    const auto it = std::find(kQualityFeatureNames.begin(), kQualityFeatureNames.end(), key);
    if (it == kQualityFeatureNames.end()) {
      throw ParseError("weights file: unknown feature '" + key + "'");
    }
    if (!value.is_number()) {
      throw ParseError("weights file: weight for '" + key + "' is not a number");
    }
    const double w = value.get<double>();
    if (w < 0.0) {
      throw ParseError("weights file: weight for '" + key + "' must be non-negative");
    }
    values[static_cast<std::size_t>(it - kQualityFeatureNames.begin())] = w;
  }
  weights.brightness = values[0];
  weights.contrast = values[1];
  weights.focus = values[2];
  weights.illumination = values[3];
  weights.illumination_symmetry = values[4];
  weights.sharpness = values[5];
  weights.compression = values[6];
  weights.pose = values[7];
  weights.eyes_openness = values[8];
  weights.mouth_closeness = values[9];
  weights.face_symmetry = values[10];
  return weights;
}

QualityWeights load_weights_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open weights file: " + path.string());
  }
  return load_weights(in);
}

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

struct PixelStats {
  double mean = 0.0;
  double stddev = 0.0;
};

PixelStats pixel_stats(const GrayImage& img) {
  const double n = static_cast<double>(img.pixels.size());
  double sum = 0.0;
  for (const double p : img.pixels) {
    sum += p;
  }
  const double mean = sum / n;
  double sq = 0.0;
  for (const double p : img.pixels) {
    const double d = p - mean;
    sq += d * d;
  }
  return {mean, std::sqrt(sq / n)};
}

// Variance of the 4-neighbour Laplacian over interior pixels, squashed
// through v/(v+c). Blur removes high-frequency content and drives this
// toward zero.
double focus_feature(const GrayImage& img, double c) {
  const std::size_t w = img.width;
  const std::size_t h = img.height;
  double sum = 0.0;
  double sq = 0.0;
  const std::size_t count = (w - 2) * (h - 2);
  for (std::size_t y = 1; y + 1 < h; ++y) {
    for (std::size_t x = 1; x + 1 < w; ++x) {
      const double lap = 4.0 * img.at(x, y) - img.at(x - 1, y) - img.at(x + 1, y) -
                         img.at(x, y - 1) - img.at(x, y + 1);
      sum += lap;
      sq += lap * lap;
    }
  }
  const double n = static_cast<double>(count);
  const double mean = sum / n;
  const double variance = std::max(0.0, sq / n - mean * mean);
  return variance / (variance + c);
}

// Mean central-difference gradient magnitude over interior pixels, squashed
// through s/(s+c).
double sharpness_feature(const GrayImage& img, double c) {
  const std::size_t w = img.width;
  const std::size_t h = img.height;
  double sum = 0.0;
  for (std::size_t y = 1; y + 1 < h; ++y) {
    for (std::size_t x = 1; x + 1 < w; ++x) {
      const double gx = (img.at(x + 1, y) - img.at(x - 1, y)) * 0.5;
      const double gy = (img.at(x, y + 1) - img.at(x, y - 1)) * 0.5;
      sum += std::sqrt(gx * gx + gy * gy);
    }
  }
  const double mean = sum / static_cast<double>((w - 2) * (h - 2));
  return mean / (mean + c);
}

double illumination_feature(const GrayImage& img, double lo, double hi) {
  std::size_t usable = 0;
  for (const double p : img.pixels) {
    if (p >= lo && p <= hi) {
      ++usable;
    }
  }
  return static_cast<double>(usable) / static_cast<double>(img.pixels.size());
}

// Halves exclude the middle column of odd-width images so both sides have
// the same area.
double illumination_symmetry_feature(const GrayImage& img) {
  const std::size_t half = img.width / 2;
  double left = 0.0;
  double right = 0.0;
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < half; ++x) {
      left += img.at(x, y);
      right += img.at(img.width - 1 - x, y);
    }
  }
  const double n = static_cast<double>(half * img.height);
  return clamp01(1.0 - std::abs(left / n - right / n));
}

// Mean absolute luma step across 8-pixel-aligned block boundaries minus the
// mean step elsewhere. Block-coded images show a positive excess; clean
// images have none.
double compression_feature(const GrayImage& img) {
  double aligned_sum = 0.0;
  double other_sum = 0.0;
  std::size_t aligned_n = 0;
  std::size_t other_n = 0;
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x + 1 < img.width; ++x) {
      const double step = std::abs(img.at(x + 1, y) - img.at(x, y));
      if ((x + 1) % 8 == 0) {
        aligned_sum += step;
        ++aligned_n;
      } else {
        other_sum += step;
        ++other_n;
      }
    }
  }
  for (std::size_t y = 0; y + 1 < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      const double step = std::abs(img.at(x, y + 1) - img.at(x, y));
      if ((y + 1) % 8 == 0) {
        aligned_sum += step;
        ++aligned_n;
      } else {
        other_sum += step;
        ++other_n;
      }
    }
  }
  if (aligned_n == 0 || other_n == 0) {
    return 1.0;
  }
  const double blockiness =
      clamp01(aligned_sum / static_cast<double>(aligned_n) -
              other_sum / static_cast<double>(other_n));
  return 1.0 - blockiness;
}

double face_symmetry_feature(const GrayImage& img) {
  double sum = 0.0;
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      sum += std::abs(img.at(x, y) - img.at(img.width - 1 - x, y));
    }
  }
  return clamp01(1.0 - sum / static_cast<double>(img.pixels.size()));
}

double pose_feature(const Landmarks& lm, const QualityCalibration& cal) {
  const Point2 left = lm.left_eye.center();
  const Point2 right = lm.right_eye.center();
  const double interocular = distance(left, right);
  if (interocular <= 0.0) {
    return 0.5;
  }
  const double yaw = clamp01(
      std::abs(distance(lm.nose_tip, left) - distance(lm.nose_tip, right)) / interocular);
  const double roll =
      clamp01(std::abs(std::atan2(right.y - left.y, right.x - left.x)) / cal.roll_full_scale);
  return 1.0 - std::max(yaw, roll);
}

double eye_openness(const EyePoints& eye, double open_aspect) {
  const double horizontal = distance(eye.outer, eye.inner);
  if (horizontal <= 0.0) {
    return 0.0;
  }
  const double aspect = distance(eye.top, eye.bottom) / horizontal;
  return clamp01(aspect / open_aspect);
}

double mouth_closeness_feature(const MouthPoints& mouth, double open_aspect) {
  const double horizontal = distance(mouth.left, mouth.right);
  if (horizontal <= 0.0) {
    return 1.0;
  }
  const double aspect = distance(mouth.top, mouth.bottom) / horizontal;
  return 1.0 - clamp01(aspect / open_aspect);
}

}  // namespace

QualityFeatures compute_features(const GrayImage& image,
                                 const std::optional<Landmarks>& landmarks,
                                 const QualityCalibration& cal) {
  if (image.width < 8 || image.height < 8) {
    throw ValidationError("compute_features: image must be at least 8x8, got " +
                          std::to_string(image.width) + "x" + std::to_string(image.height));
  }
  if (image.pixels.size() != image.width * image.height) {
    throw ValidationError("compute_features: pixel buffer does not match dimensions");
  }

  const PixelStats stats = pixel_stats(image);

  QualityFeatures f;
  f.brightness = clamp01(1.0 - 2.0 * std::abs(stats.mean - 0.5));
  f.contrast = clamp01(stats.stddev / cal.contrast_scale);
  f.focus = focus_feature(image, cal.focus_scale);
  f.illumination = illumination_feature(image, cal.illumination_low, cal.illumination_high);
  f.illumination_symmetry = illumination_symmetry_feature(image);
  f.sharpness = sharpness_feature(image, cal.sharpness_scale);
  f.compression = compression_feature(image);
  f.face_symmetry = face_symmetry_feature(image);
  if (landmarks) {
    f.pose = pose_feature(*landmarks, cal);
    f.eyes_openness = 0.5 * (eye_openness(landmarks->left_eye, cal.eye_open_aspect) +
                             eye_openness(landmarks->right_eye, cal.eye_open_aspect));
    f.mouth_closeness = mouth_closeness_feature(landmarks->mouth, cal.mouth_open_aspect);
  } else {
    f.pose = 0.5;
    f.eyes_openness = 0.5;
    f.mouth_closeness = 0.5;
  }
  return f;
}

double quality_score(const QualityFeatures& features, const QualityWeights& weights) {
  const auto f = features.as_array();
  const auto w = weights.as_array();
  double score = 0.0;
  for (std::size_t k = 0; k < kQualityFeatureCount; ++k) {
    score += w[k] * f[k];
  }
  return score;
}

namespace {

std::filesystem::path resolve_source(const ImageRecord& record, const ScoreOptions& options) {
  if (record.source) {
    std::filesystem::path p(*record.source);
    if (p.is_relative() && options.images_root) {
      return *options.images_root / p;
    }
    return p;
  }
  if (options.images_root) {
    // No explicit source: try <root>/<image_id> and <root>/<image_id>.pgm.
    std::filesystem::path direct = *options.images_root / record.image_id;
    if (std::filesystem::exists(direct)) {
      return direct;
    }
    return *options.images_root / (record.image_id + ".pgm");
  }
  throw ValidationError("record '" + record.image_id +
                        "' has no image source and no --images directory was given");
}

}  // namespace

GroupQuality score_group(const SubjectGroup& group, const QualityWeights& weights,
                         const ScoreOptions& options) {
  GroupQuality result;
  result.subject_id = group.subject_id;
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < group.images.size(); ++i) {
    const ImageRecord& record = group.images[i];
    try {
      const GrayImage image = read_pgm(resolve_source(record, options));
      const QualityFeatures features =
          compute_features(image, record.landmarks, options.calibration);
      result.ranked.push_back({record.image_id, features, quality_score(features, weights)});
      order.push_back(i);
    } catch (const Error& e) {
      result.errors.push_back({record.image_id, e.what()});
    }
  }
  if (result.ranked.empty() && !group.images.empty()) {
    throw ValidationError("score_group: no image of subject '" + group.subject_id +
                          "' could be scored (first error: " + result.errors.front().message +
                          ")");
  }
  // Stable sort keeps input order among equal scores.
  std::vector<std::size_t> idx(result.ranked.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return result.ranked[a].score > result.ranked[b].score;
  });
  std::vector<ScoredImage> sorted;
  sorted.reserve(idx.size());
  for (const std::size_t i : idx) {
    sorted.push_back(std::move(result.ranked[i]));
  }
  result.ranked = std::move(sorted);
  return result;
}

namespace {

std::vector<GroupQuality> score_all(const Dataset& dataset, const QualityWeights& weights,
                                    const ScoreOptions& options, bool parallel) {
  std::vector<GroupQuality> results(dataset.groups.size());
  const auto body = [&](std::size_t i) {
    results[i] = score_group(dataset.groups[i], weights, options);
  };
  if (parallel) {
    parallel_for(dataset.groups.size(), options.jobs, body);
  } else {
    for (std::size_t i = 0; i < dataset.groups.size(); ++i) {
      body(i);
    }
  }
  return results;
}

}  // namespace

std::vector<GroupQuality> score_dataset(const Dataset& dataset, const QualityWeights& weights,
                                        const ScoreOptions& options) {
  return score_all(dataset, weights, options, true);
}

std::vector<GroupQuality> score_dataset_serial(const Dataset& dataset,
                                               const QualityWeights& weights,
                                               const ScoreOptions& options) {
  return score_all(dataset, weights, options, false);
}

void attach_scores(Dataset& dataset, const std::vector<GroupQuality>& results) {
  if (results.size() != dataset.groups.size()) {
    throw ValidationError("attach_scores: result count does not match group count");
  }
  for (std::size_t g = 0; g < results.size(); ++g) {
    SubjectGroup& group = dataset.groups[g];
    if (results[g].subject_id != group.subject_id) {
      throw ValidationError("attach_scores: subject order mismatch at index " +
                            std::to_string(g));
    }
    for (const auto& scored : results[g].ranked) {
      for (auto& record : group.images) {
        if (record.image_id == scored.image_id) {
          record.quality = scored.score;
          break;
        }
      }
    }
  }
}

}  // namespace attrcons
