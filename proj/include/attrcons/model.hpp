#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "attrcons/errors.hpp"
#include "attrcons/landmarks.hpp"

namespace attrcons {

// Probabilities of a pair must sum to one within this tolerance.
inline constexpr double kProbabilitySumTolerance = 1e-9;

// Ordered attribute name list plus a per-attribute stability flag.
// Stable attributes (gender, hair color, ...) are assumed constant for a
// subject over the capture period and are eligible for label correction;
// transient ones (smiling, mouth open, ...) are not.
struct AttributeSchema {
  std::vector<std::string> names;
  std::vector<bool> stable;

  std::size_t size() const { return names.size(); }

  // Index of `name`, or throws ValidationError.
  std::size_t index_of(const std::string& name) const;

  // Throws ValidationError unless names are unique, non-empty and the
  // stable vector matches in length.
  void validate() const;
};

// The 40 CelebA attributes in their canonical order. Attributes that depend
// on the individual shot rather than the person (Attractive, Blurry,
// Mouth_Slightly_Open, Smiling) are marked transient.
AttributeSchema celeba_schema();

// One binary classifier output for a single (image, attribute).
struct AttributePrediction {
  double p_pos = 0.0;
  double p_neg = 1.0;
  int label = 0;

  bool operator==(const AttributePrediction&) const = default;
};

// Positive iff p_pos >= p_neg; the tie at 0.5/0.5 resolves to positive.
inline int binary_label(const AttributePrediction& pred) {
  return pred.p_pos >= pred.p_neg ? 1 : 0;
}

inline AttributePrediction make_prediction(double p_pos, double p_neg) {
  AttributePrediction p{p_pos, p_neg, 0};
  p.label = binary_label(p);
  return p;
}

// Degenerate probability pair encoding a hard annotation label, so labels
// flow through the same IM and voting paths as classifier outputs.
inline AttributePrediction prediction_from_label(int label) {
  return label == 1 ? AttributePrediction{1.0, 0.0, 1} : AttributePrediction{0.0, 1.0, 0};
}

struct ImageRecord {
  std::string image_id;
  std::string subject_id;
  std::optional<std::string> source;  // path to pixel data, if any
  std::vector<AttributePrediction> predictions;
  std::optional<Landmarks> landmarks;
  std::optional<double> quality;  // cached quality score
};

// All images of one subject (or all frames of one video). The unit over
// which IM and consolidation run. Input order is preserved and acts as the
// deterministic tiebreak order everywhere downstream.
struct SubjectGroup {
  std::string subject_id;
  std::vector<ImageRecord> images;

  std::size_t size() const { return images.size(); }
};

struct Dataset {
  AttributeSchema schema;
  std::vector<SubjectGroup> groups;

  std::size_t total_records() const;

  // Checks all structural invariants: schema validity, group sizes >= 1,
  // matching subject ids, prediction vector lengths, probability pairs,
  // label consistency, unique image ids.
  void validate() const;
};

}  // namespace attrcons
