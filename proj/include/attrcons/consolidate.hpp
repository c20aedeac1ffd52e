#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "attrcons/model.hpp"
#include "attrcons/quality.hpp"

namespace attrcons {

enum class Strategy { confidence, quality };

std::string to_string(Strategy strategy);
Strategy strategy_from_string(const std::string& name);

struct ConsolidationConfig {
  Strategy strategy = Strategy::confidence;
  int top_k = 1;  // clamped to the group size at run time
  QualityWeights weights{};  // used when scores are computed for the quality strategy
};

struct AttributeProvenance {
  Strategy strategy = Strategy::confidence;
  std::vector<std::string> contributors;  // image ids in rank order, size = effective k
  int votes_pos = 0;
  int votes_neg = 0;
};

// Consolidated subject-level attribute vector with per-attribute provenance.
struct SubjectAttributes {
  std::string subject_id;
  std::vector<int> labels;  // schema order
  std::vector<AttributeProvenance> provenance;
};

// |p_pos - p_neg|: zero for a coin-flip output, one for full certainty.
double confidence(const AttributePrediction& pred);

// Index of the image with the highest confidence for one attribute.
// Ties resolve to the earliest input position.
std::size_t select_by_confidence(const SubjectGroup& group, std::size_t attr_index);

// Image indices in descending criterion order, truncated to the effective k.
// Confidence produces a per-attribute order; quality is attribute-global and
// requires cached scores (run a scoring pass first).
std::vector<std::size_t> rank_for_attribute(const SubjectGroup& group, std::size_t attr_index,
                                            const ConsolidationConfig& config);

// Modal label. A vote tie goes to the label held at the highest confidence;
// if the top confidence is itself shared across labels, positive wins.
int majority_vote(std::span<const int> labels, std::span<const double> confidences);

// Top-k selection plus majority vote per attribute. k = 1 degenerates to
// pure argmax selection for either strategy.
SubjectAttributes consolidate_subject(const SubjectGroup& group,
                                      const ConsolidationConfig& config);

std::vector<SubjectAttributes> consolidate_dataset(const Dataset& dataset,
                                                   const ConsolidationConfig& config,
                                                   int jobs = 0);
std::vector<SubjectAttributes> consolidate_dataset_serial(const Dataset& dataset,
                                                          const ConsolidationConfig& config);

struct LabelChange {
  std::string image_id;
  std::string subject_id;
  std::string attribute;
  int old_label = 0;
  int new_label = 0;
};

struct CorrectionResult {
  Dataset corrected;
  std::vector<LabelChange> changes;
};

// Replaces every per-image label of a stable attribute with the consolidated
// subject label; transient attributes stay untouched. The input dataset is
// never mutated. Throws if a subject has no consolidated entry.
CorrectionResult correct_labels(const Dataset& annotations,
                                const std::vector<SubjectAttributes>& consolidated,
                                const AttributeSchema& schema);

}  // namespace attrcons
