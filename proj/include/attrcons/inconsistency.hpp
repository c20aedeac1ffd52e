#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "attrcons/model.hpp"

namespace attrcons {

// Inconsistency of one (subject, attribute): positive/negative counts, the
// majority ratio in [0.5, 1], and the rescaled measure im in [0, 100].
// im = 0 means every image agrees; im = 100 means a perfect half/half split.
struct AttributeIm {
  std::size_t c_pos = 0;
  std::size_t c_neg = 0;
  double ratio = 1.0;
  double im = 0.0;

  bool operator==(const AttributeIm&) const = default;
};

enum class ImMode { predictions, labels };

struct SubjectIm {
  std::string subject_id;
  std::size_t group_size = 0;
  std::vector<AttributeIm> per_attribute;  // schema order
};

struct ImReport {
  ImMode mode = ImMode::predictions;
  std::vector<std::string> attributes;  // schema order
  std::vector<SubjectIm> subjects;      // input group order
  std::vector<double> mean_im;          // unweighted mean over subjects, per attribute

  const AttributeIm& at(const std::string& subject_id, std::size_t attr_index) const;
};

struct ImOptions {
  // Groups with fewer images than this are dropped from the report
  // (single-image groups always report im = 0 and dilute the mean).
  std::size_t min_group_size = 1;
  int jobs = 0;  // <= 0: all cores
};

// Positive / negative outcome counts of one attribute across a group.
std::pair<std::size_t, std::size_t> count_outcomes(const SubjectGroup& group,
                                                   std::size_t attr_index);

// ratio = max(c_pos, c_neg) / (c_pos + c_neg); im = 100 - (ratio-0.5)/0.5*100.
AttributeIm im_from_counts(std::size_t c_pos, std::size_t c_neg);

// One AttributeIm per schema attribute, in schema order.
std::vector<AttributeIm> subject_im(const SubjectGroup& group);

// Per-subject table plus unweighted per-attribute mean over the kept groups.
ImReport dataset_im(const Dataset& dataset, const ImOptions& options = {});

// Plain single-threaded loop, kept as the reference for the parallel kernel.
ImReport dataset_im_serial(const Dataset& dataset, const ImOptions& options = {});

// Same computation over human annotations; requires degenerate probability
// pairs (as produced by load_annotations) and flags the report as a label
// audit.
ImReport audit_labels(const Dataset& annotations, const ImOptions& options = {});

}  // namespace attrcons
