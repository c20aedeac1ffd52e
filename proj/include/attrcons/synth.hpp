#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "attrcons/consolidate.hpp"
#include "attrcons/image.hpp"
#include "attrcons/model.hpp"

namespace attrcons::synth {

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;
};

// Prediction noise: each image-level label disagrees with the subject truth
// with probability flip_prob; confidences for correct and wrong predictions
// are drawn from separate Beta distributions (informative by default:
// correct predictions cluster near 0.8, wrong ones near 0.2). quality_link
// couples image degradation to extra flip probability; 0 keeps quality
// independent of correctness.
struct NoiseModel {
  double flip_prob = 0.1;
  BetaParams conf_correct{8.0, 2.0};
  BetaParams conf_wrong{2.0, 8.0};
  double quality_link = 0.0;
};

struct TruthTable {
  std::vector<std::string> subject_ids;
  std::vector<std::vector<int>> labels;  // one binary vector per subject
};

struct GenerateOptions {
  int n_subjects = 100;
  int images_per_subject = 10;
  NoiseModel noise{};
  std::uint64_t seed = 1;
  int n_attributes = 8;
  // Build degraded synthetic images and cache their quality scores
  // (required by the quality strategy; implied by quality_link > 0).
  bool with_images = false;
  int image_size = 64;
  QualityWeights weights{};
  // When set, generated images are also written here as PGM files and
  // records point at them.
  std::optional<std::filesystem::path> images_dir;
  int jobs = 0;
};

// Deterministic for a fixed option set: every subject draws from its own
// substream, so results do not depend on thread count.
std::pair<TruthTable, Dataset> generate(const GenerateOptions& options);

// Convenience overload matching the common call shape.
std::pair<TruthTable, Dataset> generate(int n_subjects, int images_per_subject,
                                        const NoiseModel& noise, std::uint64_t seed);

// Fraction of (subject, attribute) pairs where the consolidated label equals
// the truth.
double evaluate(const std::vector<SubjectAttributes>& consolidated, const TruthTable& truth);

// Fraction of (image, attribute) pairs where the raw per-image label equals
// the truth: the no-aggregation baseline.
double baseline_accuracy(const Dataset& dataset, const TruthTable& truth);

// Procedural face-like test pattern: bright background, darker head
// ellipse, eye dots, mouth bar, plus seeded texture noise.
GrayImage synthetic_face(int size, std::uint64_t seed);

struct ExperimentRow {
  Strategy strategy = Strategy::confidence;
  int k = 1;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double baseline = 0.0;
};

struct ExperimentReport {
  std::string generator;  // RNG algorithm identifier
  std::vector<ExperimentRow> rows;

  double mean_accuracy(Strategy strategy, int k) const;
  double mean_baseline() const;
};

struct ExperimentConfig {
  int n_subjects = 100;
  int images_per_subject = 10;
  NoiseModel noise{};
  int n_attributes = 8;
  int image_size = 64;
  std::vector<Strategy> strategies = {Strategy::confidence};
  std::vector<int> ks = {1, 3, 5};
  std::vector<std::uint64_t> seeds = {1};
  QualityWeights weights{};
  // When set, each seed's generated images are dumped to
  // <images_dir>/seed_<seed>/ and image generation is forced on.
  std::optional<std::filesystem::path> images_dir;
  int jobs = 0;
};

ExperimentConfig load_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config_file(const std::filesystem::path& path);

// One row per (strategy, k, seed), in grid order.
ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace attrcons::synth
