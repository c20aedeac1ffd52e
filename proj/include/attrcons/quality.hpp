#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "attrcons/image.hpp"
#include "attrcons/landmarks.hpp"
#include "attrcons/model.hpp"

namespace attrcons {

inline constexpr std::size_t kQualityFeatureCount = 11;

// Canonical feature order, shared by QualityFeatures, QualityWeights and
// every report column layout.
extern const std::array<const char*, kQualityFeatureCount> kQualityFeatureNames;

// The 11 heuristic no-reference quality features, each in [0,1]
// (1 = ideal). pose, eyes_openness and mouth_closeness need landmarks and
// fall back to the neutral value 0.5 without them.
struct QualityFeatures {
  double brightness = 0.0;
  double contrast = 0.0;
  double focus = 0.0;
  double illumination = 0.0;
  double illumination_symmetry = 0.0;
  double sharpness = 0.0;
  double compression = 0.0;
  double pose = 0.0;
  double eyes_openness = 0.0;
  double mouth_closeness = 0.0;
  double face_symmetry = 0.0;

  std::array<double, kQualityFeatureCount> as_array() const;
  static QualityFeatures from_array(const std::array<double, kQualityFeatureCount>& values);

  bool operator==(const QualityFeatures&) const = default;
};

// Per-feature weights. Defaults are the empirical values the score was
// tuned with; all-ones features score 8.4 under them.
struct QualityWeights {
  double brightness = 0.6;
  double contrast = 0.6;
  double focus = 0.8;
  double illumination = 1.0;
  double illumination_symmetry = 0.9;
  double sharpness = 0.8;
  double compression = 0.7;
  double pose = 1.0;
  double eyes_openness = 0.5;
  double mouth_closeness = 0.5;
  double face_symmetry = 1.0;

  std::array<double, kQualityFeatureCount> as_array() const;

  double total() const;

  bool operator==(const QualityWeights&) const = default;
};

// Weights file: JSON map feature-name -> weight; omitted keys keep their
// defaults. Unknown keys or negative weights are rejected.
QualityWeights load_weights(std::istream& in);
QualityWeights load_weights_file(const std::filesystem::path& path);

// Tuning constants for the feature formulas. Defaults are calibrated so the
// monotone-degradation properties hold on the synthetic fixtures.
struct QualityCalibration {
  double contrast_scale = 0.25;      // stddev of U[0,1]; saturation point
  double focus_scale = 0.005;        // s/(s+c) squash constant for Laplacian variance
  double sharpness_scale = 0.02;     // squash constant for mean gradient magnitude
  double illumination_low = 0.1;     // usable luma band
  double illumination_high = 0.9;
  double eye_open_aspect = 0.3;      // aspect ratio of a fully open eye
  double mouth_open_aspect = 0.5;    // aspect ratio of a fully open mouth
  double roll_full_scale = 0.5235987755982988;  // pi/6; roll that zeroes the pose feature
};

// Computes all 11 features. Images narrower or shorter than 8 pixels are
// rejected (blockiness and symmetry are undefined there).
QualityFeatures compute_features(const GrayImage& image,
                                 const std::optional<Landmarks>& landmarks,
                                 const QualityCalibration& calibration = {});

// Plain weighted sum over the 11 features; deliberately not normalized by
// the weight total.
double quality_score(const QualityFeatures& features, const QualityWeights& weights);

struct ScoredImage {
  std::string image_id;
  QualityFeatures features;
  double score = 0.0;
};

struct ImageError {
  std::string image_id;
  std::string message;
};

struct GroupQuality {
  std::string subject_id;
  std::vector<ScoredImage> ranked;  // descending score, ties by input order
  std::vector<ImageError> errors;   // images that could not be scored
};

struct ScoreOptions {
  std::optional<std::filesystem::path> images_root;  // base dir for relative sources
  QualityCalibration calibration{};
  int jobs = 0;
};

// Scores every readable image of a group. Unreadable images are recorded in
// `errors`; the group itself fails (throws) only when every image fails.
GroupQuality score_group(const SubjectGroup& group, const QualityWeights& weights,
                         const ScoreOptions& options = {});

std::vector<GroupQuality> score_dataset(const Dataset& dataset, const QualityWeights& weights,
                                        const ScoreOptions& options = {});
std::vector<GroupQuality> score_dataset_serial(const Dataset& dataset,
                                               const QualityWeights& weights,
                                               const ScoreOptions& options = {});

// Copies the scores of a scoring pass into the records' quality cache, as
// required by quality-ranked consolidation.
void attach_scores(Dataset& dataset, const std::vector<GroupQuality>& results);

}  // namespace attrcons
