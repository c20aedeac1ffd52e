#include "attrcons/consolidate.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "attrcons/parallel.hpp"

namespace attrcons {

std::string to_string(Strategy strategy) {
  return strategy == Strategy::confidence ? "confidence" : "quality";
}

Strategy strategy_from_string(const std::string& name) {
  if (name == "confidence") {
    return Strategy::confidence;
  }
  if (name == "quality") {
    return Strategy::quality;
  }
  throw ConfigError("unknown strategy '" + name + "' (expected confidence or quality)");
}

double confidence(const AttributePrediction& pred) {
  return std::abs(pred.p_pos - pred.p_neg);
}

std::size_t select_by_confidence(const SubjectGroup& group, std::size_t attr_index) {
  if (group.images.empty()) {
    throw ValidationError("select_by_confidence: empty group '" + group.subject_id + "'");
  }
  std::size_t best = 0;
  double best_conf = confidence(group.images[0].predictions.at(attr_index));
  for (std::size_t i = 1; i < group.images.size(); ++i) {
    const double c = confidence(group.images[i].predictions.at(attr_index));
    if (c > best_conf) {
      best = i;
      best_conf = c;
    }
  }
  return best;
}

namespace {

std::size_t effective_k(int top_k, std::size_t group_size) {
  if (top_k < 1) {
    throw ConfigError("top_k must be >= 1, got " + std::to_string(top_k));
  }
  return std::min<std::size_t>(static_cast<std::size_t>(top_k), group_size);
}

// Descending stable argsort; equal keys keep input order.
std::vector<std::size_t> rank_descending(const std::vector<double>& keys) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] > keys[b]; });
  return order;
}

std::vector<double> quality_keys(const SubjectGroup& group) {
  std::vector<double> keys;
  keys.reserve(group.images.size());
  for (const auto& record : group.images) {
    if (!record.quality) {
      throw ValidationError("subject '" + group.subject_id + "', image '" + record.image_id +
                            "' has no quality score; run quality scoring first");
    }
    keys.push_back(*record.quality);
  }
  return keys;
}

}  // namespace

std::vector<std::size_t> rank_for_attribute(const SubjectGroup& group, std::size_t attr_index,
                                            const ConsolidationConfig& config) {
  if (group.images.empty()) {
    throw ValidationError("rank_for_attribute: empty group '" + group.subject_id + "'");
  }
  std::vector<double> keys;
  if (config.strategy == Strategy::confidence) {
    keys.reserve(group.images.size());
    for (const auto& record : group.images) {
      keys.push_back(confidence(record.predictions.at(attr_index)));
    }
  } else {
    keys = quality_keys(group);
  }
  auto order = rank_descending(keys);
  order.resize(effective_k(config.top_k, group.images.size()));
  return order;
}

int majority_vote(std::span<const int> labels, std::span<const double> confidences) {
  if (labels.empty()) {
    throw ValidationError("majority_vote: empty input");
  }
  if (labels.size() != confidences.size()) {
    throw ValidationError("majority_vote: labels and confidences differ in length");
  }
  int votes_pos = 0;
  for (const int label : labels) {
    votes_pos += label;
  }
  const int votes_neg = static_cast<int>(labels.size()) - votes_pos;
  if (votes_pos != votes_neg) {
    return votes_pos > votes_neg ? 1 : 0;
  }
  // Tie: the most confident voter decides; a tie at the top confidence with
  // disagreeing labels resolves to positive.
  const double top = *std::max_element(confidences.begin(), confidences.end());
  int top_label = -1;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (confidences[i] == top) {
      if (top_label == -1) {
        top_label = labels[i];
      } else if (top_label != labels[i]) {
        return 1;
      }
    }
  }
  return top_label;
}

SubjectAttributes consolidate_subject(const SubjectGroup& group,
                                      const ConsolidationConfig& config) {
  if (group.images.empty()) {
    throw ValidationError("consolidate_subject: empty group '" + group.subject_id + "'");
  }
  const std::size_t n_attrs = group.images.front().predictions.size();

  // The quality order does not depend on the attribute; compute it once.
  std::vector<std::size_t> shared_order;
  if (config.strategy == Strategy::quality) {
    shared_order = rank_descending(quality_keys(group));
    shared_order.resize(effective_k(config.top_k, group.images.size()));
  }

  SubjectAttributes result;
  result.subject_id = group.subject_id;
  result.labels.resize(n_attrs);
  result.provenance.resize(n_attrs);
  std::vector<int> labels;
  std::vector<double> confidences;
  for (std::size_t j = 0; j < n_attrs; ++j) {
    const std::vector<std::size_t> order = config.strategy == Strategy::quality
                                               ? shared_order
                                               : rank_for_attribute(group, j, config);
    labels.clear();
    confidences.clear();
    AttributeProvenance& prov = result.provenance[j];
    prov.strategy = config.strategy;
    prov.contributors.clear();
    for (const std::size_t idx : order) {
      const ImageRecord& record = group.images[idx];
      labels.push_back(binary_label(record.predictions.at(j)));
      confidences.push_back(confidence(record.predictions[j]));
      prov.contributors.push_back(record.image_id);
    }
    prov.votes_pos = static_cast<int>(std::count(labels.begin(), labels.end(), 1));
    prov.votes_neg = static_cast<int>(labels.size()) - prov.votes_pos;
    result.labels[j] = majority_vote(labels, confidences);
  }
  return result;
}

namespace {

std::vector<SubjectAttributes> consolidate_all(const Dataset& dataset,
                                               const ConsolidationConfig& config, int jobs,
                                               bool parallel) {
  std::vector<SubjectAttributes> results(dataset.groups.size());
  const auto body = [&](std::size_t i) {
    results[i] = consolidate_subject(dataset.groups[i], config);
  };
  if (parallel) {
    parallel_for(dataset.groups.size(), jobs, body);
  } else {
    for (std::size_t i = 0; i < dataset.groups.size(); ++i) {
      body(i);
    }
  }
  return results;
}

}  // namespace

std::vector<SubjectAttributes> consolidate_dataset(const Dataset& dataset,
                                                   const ConsolidationConfig& config,
                                                   int jobs) {
  return consolidate_all(dataset, config, jobs, true);
}

std::vector<SubjectAttributes> consolidate_dataset_serial(const Dataset& dataset,
                                                          const ConsolidationConfig& config) {
  return consolidate_all(dataset, config, 0, false);
}

CorrectionResult correct_labels(const Dataset& annotations,
                                const std::vector<SubjectAttributes>& consolidated,
                                const AttributeSchema& schema) {
  std::unordered_map<std::string, const SubjectAttributes*> by_subject;
  by_subject.reserve(consolidated.size());
  for (const auto& subject : consolidated) {
    by_subject.emplace(subject.subject_id, &subject);
  }

  CorrectionResult result;
  result.corrected = annotations;
  for (auto& group : result.corrected.groups) {
    const auto it = by_subject.find(group.subject_id);
    if (it == by_subject.end()) {
      throw ValidationError("correct_labels: subject '" + group.subject_id +
                            "' has no consolidated attributes");
    }
    const SubjectAttributes& target = *it->second;
    if (target.labels.size() != schema.size()) {
      throw ValidationError("correct_labels: consolidated vector for subject '" +
                            group.subject_id + "' does not match the schema");
    }
    for (auto& record : group.images) {
      for (std::size_t j = 0; j < schema.size(); ++j) {
        if (!schema.stable[j]) {
          continue;
        }
        const int current = record.predictions[j].label;
        const int wanted = target.labels[j];
        if (current != wanted) {
          record.predictions[j] = prediction_from_label(wanted);
          result.changes.push_back(
              {record.image_id, record.subject_id, schema.names[j], current, wanted});
        }
      }
    }
  }
  return result;
}

}  // namespace attrcons
