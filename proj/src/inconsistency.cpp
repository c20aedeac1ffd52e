#include "attrcons/inconsistency.hpp"

#include <algorithm>

#include "attrcons/parallel.hpp"

namespace attrcons {

const AttributeIm& ImReport::at(const std::string& subject_id, std::size_t attr_index) const {
  for (const auto& subject : subjects) {
    if (subject.subject_id == subject_id) {
      return subject.per_attribute.at(attr_index);
    }
  }
  throw ValidationError("subject not in report: " + subject_id);
}

std::pair<std::size_t, std::size_t> count_outcomes(const SubjectGroup& group,
                                                   std::size_t attr_index) {
  if (group.images.empty()) {
    throw ValidationError("count_outcomes: empty group '" + group.subject_id + "'");
  }
  if (attr_index >= group.images.front().predictions.size()) {
    throw std::out_of_range("count_outcomes: attribute index " + std::to_string(attr_index) +
                            " out of range");
  }
  std::size_t c_pos = 0;
  for (const auto& record : group.images) {
    c_pos += static_cast<std::size_t>(binary_label(record.predictions.at(attr_index)));
  }
  return {c_pos, group.images.size() - c_pos};
}

AttributeIm im_from_counts(std::size_t c_pos, std::size_t c_neg) {
  const std::size_t n = c_pos + c_neg;
  if (n == 0) {
    throw ValidationError("im_from_counts: both counts are zero");
  }
  AttributeIm result;
  result.c_pos = c_pos;
  result.c_neg = c_neg;
  result.ratio = static_cast<double>(std::max(c_pos, c_neg)) / static_cast<double>(n);
  result.im = 100.0 - (result.ratio - 0.5) / 0.5 * 100.0;
  return result;
}

std::vector<AttributeIm> subject_im(const SubjectGroup& group) {
  if (group.images.empty()) {
    throw ValidationError("subject_im: empty group '" + group.subject_id + "'");
  }
  const std::size_t n_attrs = group.images.front().predictions.size();
  std::vector<AttributeIm> result;
  result.reserve(n_attrs);
  for (std::size_t j = 0; j < n_attrs; ++j) {
    const auto [c_pos, c_neg] = count_outcomes(group, j);
    result.push_back(im_from_counts(c_pos, c_neg));
  }
  return result;
}

namespace {

std::vector<const SubjectGroup*> kept_groups(const Dataset& dataset, const ImOptions& options) {
  std::vector<const SubjectGroup*> kept;
  kept.reserve(dataset.groups.size());
  for (const auto& group : dataset.groups) {
    if (group.images.size() >= options.min_group_size) {
      kept.push_back(&group);
    }
  }
  if (kept.empty()) {
    throw ValidationError(dataset.groups.empty()
                              ? "dataset_im: dataset has no groups"
                              : "dataset_im: no group reaches the minimum size");
  }
  return kept;
}

// Mean is accumulated in input group order so the result is independent of
// how the per-group work was scheduled.
ImReport assemble(ImMode mode, const Dataset& dataset, std::vector<SubjectIm> subjects) {
  ImReport report;
  report.mode = mode;
  report.attributes = dataset.schema.names;
  report.subjects = std::move(subjects);
  const std::size_t n_attrs = dataset.schema.size();
  report.mean_im.assign(n_attrs, 0.0);
  for (const auto& subject : report.subjects) {
    for (std::size_t j = 0; j < n_attrs; ++j) {
      report.mean_im[j] += subject.per_attribute[j].im;
    }
  }
  const double inv_l = 1.0 / static_cast<double>(report.subjects.size());
  for (double& mean : report.mean_im) {
    mean *= inv_l;
  }
  return report;
}

ImReport compute(ImMode mode, const Dataset& dataset, const ImOptions& options, bool parallel) {
  const auto kept = kept_groups(dataset, options);
  std::vector<SubjectIm> subjects(kept.size());
  const auto body = [&](std::size_t i) {
    const SubjectGroup& group = *kept[i];
    subjects[i] = SubjectIm{group.subject_id, group.images.size(), subject_im(group)};
  };
  if (parallel) {
    parallel_for(kept.size(), options.jobs, body);
  } else {
    for (std::size_t i = 0; i < kept.size(); ++i) {
      body(i);
    }
  }
  return assemble(mode, dataset, std::move(subjects));
}

}  // namespace

ImReport dataset_im(const Dataset& dataset, const ImOptions& options) {
  return compute(ImMode::predictions, dataset, options, true);
}

ImReport dataset_im_serial(const Dataset& dataset, const ImOptions& options) {
  return compute(ImMode::predictions, dataset, options, false);
}

ImReport audit_labels(const Dataset& annotations, const ImOptions& options) {
  for (const auto& group : annotations.groups) {
    for (const auto& record : group.images) {
      for (const auto& pred : record.predictions) {
        if (!(pred.p_pos == 0.0 || pred.p_pos == 1.0)) {
          throw ValidationError("audit_labels: record '" + record.image_id +
                                "' carries soft probabilities; expected annotation labels");
        }
      }
    }
  }
  ImReport report = compute(ImMode::labels, annotations, options, true);
  return report;
}

}  // namespace attrcons
