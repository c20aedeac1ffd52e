#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "attrcons/consolidate.hpp"
#include "attrcons/inconsistency.hpp"
#include "test_util.hpp"

using namespace attrcons;
using testing::make_group;
using testing::make_label_group;

namespace {

// Builds a single-attribute group whose confidences are exactly `confs` and
// whose labels are `labels`.
SubjectGroup group_from(const std::vector<int>& labels, const std::vector<double>& confs) {
  SubjectGroup group;
  group.subject_id = "S";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ImageRecord record;
    record.image_id = "S_" + std::to_string(i);
    record.subject_id = "S";
    const double p_pos = labels[i] == 1 ? (1.0 + confs[i]) / 2.0 : (1.0 - confs[i]) / 2.0;
    record.predictions.push_back(make_prediction(p_pos, 1.0 - p_pos));
    group.images.push_back(std::move(record));
  }
  return group;
}

// Independent mode-with-tiebreak: majority label; on a tie the label(s)
// holding the maximum confidence win, and a contested maximum goes to 1.
int vote_oracle(const std::vector<int>& labels, const std::vector<double>& confs) {
  int pos = 0;
  for (const int l : labels) {
    pos += l;
  }
  const int neg = static_cast<int>(labels.size()) - pos;
  if (pos > neg) return 1;
  if (neg > pos) return 0;
  double best = -1.0;
  bool has_pos = false;
  bool has_neg = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (confs[i] > best) {
      best = confs[i];
      has_pos = labels[i] == 1;
      has_neg = labels[i] == 0;
    } else if (confs[i] == best) {
      has_pos = has_pos || labels[i] == 1;
      has_neg = has_neg || labels[i] == 0;
    }
  }
  if (has_pos && has_neg) return 1;
  return has_pos ? 1 : 0;
}

}  // namespace

TEST_CASE("confidence is the absolute probability gap") {
  CHECK(confidence(make_prediction(0.9, 0.1)) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(confidence(make_prediction(0.5, 0.5)) == 0.0);
  CHECK(confidence(make_prediction(1.0, 0.0)) == 1.0);
}

TEST_CASE("select_by_confidence takes the earliest argmax") {
  CHECK(select_by_confidence(group_from({1, 1, 1}, {0.2, 0.8, 0.6}), 0) == 1);
  // |0.7-0.3| and |0.3-0.7| are bit-identical, an exact tie.
  CHECK(select_by_confidence(make_group("S", {{{0.7, 0.3}}, {{0.3, 0.7}}}), 0) == 0);
  CHECK(select_by_confidence(group_from({0}, {0.3}), 0) == 0);
}

TEST_CASE("rank_for_attribute orders by the configured criterion") {
  SUBCASE("confidence, top-2") {
    ConsolidationConfig config;
    config.top_k = 2;
    const auto order = rank_for_attribute(group_from({1, 1, 1}, {0.1, 0.9, 0.5}), 0, config);
    CHECK(order == std::vector<std::size_t>{1, 2});
  }
  SUBCASE("quality order is attribute-global") {
    SubjectGroup group = make_group("S", {{{0.9, 0.1}, {0.1, 0.9}},
                                          {{0.5, 0.5}, {0.8, 0.2}},
                                          {{0.6, 0.4}, {0.3, 0.7}}});
    group.images[0].quality = 3.0;
    group.images[1].quality = 7.0;
    group.images[2].quality = 5.0;
    ConsolidationConfig config;
    config.strategy = Strategy::quality;
    config.top_k = 3;
    for (std::size_t attr = 0; attr < 2; ++attr) {
      CHECK(rank_for_attribute(group, attr, config) == std::vector<std::size_t>{1, 2, 0});
    }
  }
  SUBCASE("k larger than the group clamps") {
    ConsolidationConfig config;
    config.top_k = 10;
    CHECK(rank_for_attribute(group_from({1, 0}, {0.5, 0.6}), 0, config).size() == 2);
  }
  SUBCASE("missing quality scores point at the scoring pass") {
    SubjectGroup group = make_group("S", {{{0.9, 0.1}}});
    ConsolidationConfig config;
    config.strategy = Strategy::quality;
    CHECK_THROWS_WITH_AS(rank_for_attribute(group, 0, config),
                         doctest::Contains("quality scoring"), ValidationError);
  }
}

TEST_CASE("majority_vote follows mode with confidence tiebreak") {
  CHECK(majority_vote(std::vector<int>{1, 1, 0}, std::vector<double>{0.1, 0.1, 0.9}) == 1);
  CHECK(majority_vote(std::vector<int>{1, 0}, std::vector<double>{0.9, 0.2}) == 1);
  CHECK(majority_vote(std::vector<int>{1, 0}, std::vector<double>{0.2, 0.9}) == 0);
  // Contested top confidence on a tie goes positive.
  CHECK(majority_vote(std::vector<int>{1, 0}, std::vector<double>{0.7, 0.7}) == 1);
  CHECK_THROWS_AS(majority_vote(std::vector<int>{}, std::vector<double>{}), ValidationError);
}

TEST_CASE("majority_vote equals the brute-force oracle for all short patterns") {
  const std::array<double, 3> conf_grid = {0.25, 0.5, 0.75};
  for (std::size_t n = 1; n <= 5; ++n) {
    for (unsigned label_bits = 0; label_bits < (1u << n); ++label_bits) {
      std::vector<int> labels(n);
      for (std::size_t i = 0; i < n; ++i) {
        labels[i] = (label_bits >> i) & 1u;
      }
      std::size_t conf_combos = 1;
      for (std::size_t i = 0; i < n; ++i) {
        conf_combos *= conf_grid.size();
      }
      for (std::size_t combo = 0; combo < conf_combos; ++combo) {
        std::vector<double> confs(n);
        std::size_t rem = combo;
        for (std::size_t i = 0; i < n; ++i) {
          confs[i] = conf_grid[rem % conf_grid.size()];
          rem /= conf_grid.size();
        }
        CHECK(majority_vote(labels, confs) == vote_oracle(labels, confs));
      }
    }
  }
}

TEST_CASE("consolidate_subject with k=1 reduces to pure argmax selection") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> prob(0.0, 1.0);
  for (int round = 0; round < 30; ++round) {
    SubjectGroup group;
    group.subject_id = "S";
    const std::size_t n = 1 + rng() % 6;
    for (std::size_t i = 0; i < n; ++i) {
      ImageRecord record;
      record.image_id = "S_" + std::to_string(i);
      record.subject_id = "S";
      for (int j = 0; j < 3; ++j) {
        const double p = prob(rng);
        record.predictions.push_back(make_prediction(p, 1.0 - p));
      }
      record.quality = prob(rng);
      group.images.push_back(std::move(record));
    }
    ConsolidationConfig config;
    config.top_k = 1;
    const SubjectAttributes by_conf = consolidate_subject(group, config);
    for (std::size_t j = 0; j < 3; ++j) {
      const std::size_t pick = select_by_confidence(group, j);
      CHECK(by_conf.labels[j] == group.images[pick].predictions[j].label);
      CHECK(by_conf.provenance[j].contributors ==
            std::vector<std::string>{group.images[pick].image_id});
    }

    config.strategy = Strategy::quality;
    const SubjectAttributes by_quality = consolidate_subject(group, config);
    std::size_t best = 0;
    for (std::size_t i = 1; i < group.images.size(); ++i) {
      if (*group.images[i].quality > *group.images[best].quality) {
        best = i;
      }
    }
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(by_quality.labels[j] == group.images[best].predictions[j].label);
    }
  }
}

TEST_CASE("consolidate_subject fuses the top-k votes") {
  // confidences rank images 1, 2, 0; top-3 labels are {1, 1, 0}.
  const SubjectGroup group = group_from({0, 1, 1}, {0.2, 0.9, 0.6});
  ConsolidationConfig config;
  config.top_k = 3;
  const SubjectAttributes result = consolidate_subject(group, config);
  CHECK(result.labels[0] == 1);
  CHECK(result.provenance[0].votes_pos == 2);
  CHECK(result.provenance[0].votes_neg == 1);
  CHECK(result.provenance[0].contributors.size() == 3);

  SUBCASE("unanimous labels survive any strategy and k") {
    SubjectGroup unanimous = make_label_group("U", {{1}, {1}, {1}, {1}});
    for (std::size_t i = 0; i < unanimous.images.size(); ++i) {
      unanimous.images[i].quality = static_cast<double>(i);
    }
    for (const Strategy strategy : {Strategy::confidence, Strategy::quality}) {
      for (const int k : {1, 2, 3, 4}) {
        ConsolidationConfig c;
        c.strategy = strategy;
        c.top_k = k;
        CHECK(consolidate_subject(unanimous, c).labels[0] == 1);
      }
    }
  }
}

TEST_CASE("ranking is invariant under strictly increasing confidence transforms") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> prob(0.0, 1.0);
  for (int round = 0; round < 20; ++round) {
    std::vector<int> labels;
    std::vector<double> confs;
    const std::size_t n = 2 + rng() % 5;
    for (std::size_t i = 0; i < n; ++i) {
      labels.push_back(static_cast<int>(rng() % 2));
      confs.push_back(prob(rng));
    }
    const SubjectGroup group = group_from(labels, confs);
    std::vector<double> cubed = confs;
    for (double& c : cubed) {
      c = c * c * c;  // strictly increasing on [0,1]
    }
    const SubjectGroup transformed = group_from(labels, cubed);
    CHECK(select_by_confidence(group, 0) == select_by_confidence(transformed, 0));
    ConsolidationConfig config;
    config.top_k = static_cast<int>(n);
    CHECK(rank_for_attribute(group, 0, config) == rank_for_attribute(transformed, 0, config));
  }
}

TEST_CASE("correct_labels rewrites only stable attributes") {
  AttributeSchema schema;
  schema.names = {"Male", "Smiling"};
  schema.stable = {true, false};

  Dataset annotations;
  annotations.schema = schema;
  annotations.groups.push_back(make_label_group("A", {{1, 1}, {1, 0}, {0, 1}}));

  SubjectAttributes consolidated;
  consolidated.subject_id = "A";
  consolidated.labels = {1, 0};
  consolidated.provenance.resize(2);

  const CorrectionResult result = correct_labels(annotations, {consolidated}, schema);
  REQUIRE(result.changes.size() == 1);
  CHECK(result.changes[0].image_id == "A_img2");
  CHECK(result.changes[0].attribute == "Male");
  CHECK(result.changes[0].old_label == 0);
  CHECK(result.changes[0].new_label == 1);
  // Stable attribute now uniform.
  for (const auto& record : result.corrected.groups[0].images) {
    CHECK(record.predictions[0].label == 1);
  }
  // Transient attribute untouched even though consolidated says 0.
  CHECK(result.corrected.groups[0].images[0].predictions[1].label == 1);
  CHECK(result.corrected.groups[0].images[1].predictions[1].label == 0);
  // Input unchanged.
  CHECK(annotations.groups[0].images[2].predictions[0].label == 0);

  SUBCASE("correction is a fixpoint") {
    const CorrectionResult again = correct_labels(result.corrected, {consolidated}, schema);
    CHECK(again.changes.empty());
  }
  SUBCASE("corrected stable attributes audit to zero") {
    const ImReport report = audit_labels(result.corrected);
    CHECK(report.at("A", 0).im == 0.0);
  }
  SUBCASE("missing consolidated subject is an error") {
    SubjectAttributes other = consolidated;
    other.subject_id = "B";
    CHECK_THROWS_AS(correct_labels(annotations, {other}, schema), ValidationError);
  }
}

TEST_CASE("dataset-level consolidation matches the serial reference") {
  std::mt19937 rng(31);
  const Dataset dataset = testing::random_dataset(rng, 60, 7, 4);
  ConsolidationConfig config;
  config.top_k = 3;
  const auto parallel = consolidate_dataset(dataset, config, 4);
  const auto serial = consolidate_dataset_serial(dataset, config);
  REQUIRE(parallel.size() == serial.size());
  for (std::size_t i = 0; i < parallel.size(); ++i) {
    CHECK(parallel[i].labels == serial[i].labels);
  }
}
