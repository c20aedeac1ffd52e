#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "attrcons/consolidate.hpp"
#include "attrcons/inconsistency.hpp"
#include "attrcons/io.hpp"
#include "attrcons/report.hpp"
#include "attrcons/rng.hpp"
#include "attrcons/synth.hpp"

using namespace attrcons;
namespace syn = attrcons::synth;

namespace {

std::string dataset_fingerprint(const Dataset& dataset) {
  std::ostringstream out;
  write_predictions_csv(out, dataset);
  return out.str();
}

// Probability that a majority of n independent draws is correct when each
// is right with probability 1-p.
double binomial_majority(int n, double p) {
  double total = 0.0;
  for (int m = n / 2 + 1; m <= n; ++m) {
    double c = 1.0;
    for (int i = 0; i < m; ++i) {
      c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
    }
    total += c * std::pow(1.0 - p, m) * std::pow(p, n - m);
  }
  return total;
}

}  // namespace

TEST_CASE("generation is deterministic per seed and thread count") {
  syn::GenerateOptions options;
  options.n_subjects = 40;
  options.images_per_subject = 6;
  options.n_attributes = 5;
  options.seed = 99;

  const auto [truth_a, data_a] = syn::generate(options);
  const auto [truth_b, data_b] = syn::generate(options);
  CHECK(truth_a.labels == truth_b.labels);
  CHECK(dataset_fingerprint(data_a) == dataset_fingerprint(data_b));

  options.jobs = 4;
  const auto [truth_c, data_c] = syn::generate(options);
  CHECK(truth_a.labels == truth_c.labels);
  CHECK(dataset_fingerprint(data_a) == dataset_fingerprint(data_c));

  options.jobs = 0;
  options.seed = 100;
  const auto [truth_d, data_d] = syn::generate(options);
  CHECK(dataset_fingerprint(data_a) != dataset_fingerprint(data_d));
}

TEST_CASE("zero flip probability reproduces the truth everywhere") {
  syn::NoiseModel noise;
  noise.flip_prob = 0.0;
  const auto [truth, dataset] = syn::generate(30, 5, noise, 7);
  CHECK(syn::baseline_accuracy(dataset, truth) == 1.0);
  const ImReport report = dataset_im(dataset);
  for (const double mean : report.mean_im) {
    CHECK(mean == 0.0);
  }
}

TEST_CASE("generated predictions satisfy the probability invariants") {
  syn::NoiseModel noise;
  noise.flip_prob = 0.3;
  const auto [truth, dataset] = syn::generate(20, 5, noise, 3);
  for (const auto& group : dataset.groups) {
    for (const auto& record : group.images) {
      for (const auto& pred : record.predictions) {
        CHECK(pred.p_pos + pred.p_neg == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(pred.label == binary_label(pred));
        CHECK(confidence(pred) <= 1.0);
      }
    }
  }
  CHECK_NOTHROW(dataset.validate());
}

TEST_CASE("empirical flip rate is calibrated") {
  syn::GenerateOptions options;
  options.n_subjects = 1250;
  options.images_per_subject = 10;
  options.n_attributes = 8;
  options.noise.flip_prob = 0.2;
  options.seed = 17;
  const auto [truth, dataset] = syn::generate(options);
  // 1250 * 10 * 8 = 1e5 generated labels.
  std::size_t flips = 0;
  std::size_t total = 0;
  for (std::size_t l = 0; l < dataset.groups.size(); ++l) {
    for (const auto& record : dataset.groups[l].images) {
      for (std::size_t j = 0; j < record.predictions.size(); ++j) {
        flips += record.predictions[j].label != truth.labels[l][j] ? 1 : 0;
        ++total;
      }
    }
  }
  CHECK(total == 100000);
  const double rate = static_cast<double>(flips) / static_cast<double>(total);
  const double se = std::sqrt(0.2 * 0.8 / static_cast<double>(total));
  CHECK(std::abs(rate - 0.2) <= 3.0 * se);
}

TEST_CASE("evaluate scores exact agreement") {
  syn::TruthTable truth;
  truth.subject_ids = {"s00000", "s00001"};
  truth.labels = {{1, 0}, {0, 1}};
  std::vector<SubjectAttributes> consolidated(2);
  consolidated[0].subject_id = "s00000";
  consolidated[0].labels = {1, 0};
  consolidated[1].subject_id = "s00001";
  consolidated[1].labels = {0, 1};
  CHECK(syn::evaluate(consolidated, truth) == 1.0);

  for (auto& subject : consolidated) {
    for (int& label : subject.labels) {
      label = 1 - label;
    }
  }
  CHECK(syn::evaluate(consolidated, truth) == 0.0);

  consolidated[1].subject_id = "wrong";
  CHECK_THROWS_AS(syn::evaluate(consolidated, truth), ValidationError);
}

TEST_CASE("full-majority recovery matches the binomial closed form") {
  syn::GenerateOptions options;
  options.n_subjects = 2000;
  options.images_per_subject = 9;
  options.n_attributes = 8;
  options.noise.flip_prob = 0.1;
  options.seed = 29;
  const auto [truth, dataset] = syn::generate(options);
  ConsolidationConfig config;
  config.top_k = 9;
  const double accuracy = syn::evaluate(consolidate_dataset(dataset, config), truth);
  const double expected = binomial_majority(9, 0.1);
  CHECK(expected == doctest::Approx(0.9991).epsilon(1e-3));
  CHECK(std::abs(accuracy - expected) < 0.01);
}

TEST_CASE("mean IM at coin-flip noise matches the binomial oracle") {
  const int n = 50;
  syn::GenerateOptions options;
  options.n_subjects = 200;
  options.images_per_subject = n;
  options.n_attributes = 8;
  options.noise.flip_prob = 0.5;
  options.seed = 41;
  const auto [truth, dataset] = syn::generate(options);
  const ImReport report = dataset_im(dataset);

  // E[IM] = sum_k C(n,k) 2^-n * 100 * (1 - |n-2k|/n) for labels ~ Bin(n, 1/2).
  double expected = 0.0;
  double coeff = std::pow(0.5, n);
  for (int k = 0; k <= n; ++k) {
    expected += coeff * 100.0 * (1.0 - std::abs(n - 2.0 * k) / n);
    coeff = coeff * static_cast<double>(n - k) / static_cast<double>(k + 1);
  }
  double mean = 0.0;
  for (const double m : report.mean_im) {
    mean += m;
  }
  mean /= static_cast<double>(report.mean_im.size());
  CHECK(expected > 85.0);  // approaches 100 with growing n
  CHECK(std::abs(mean - expected) < 1.5);
}

TEST_CASE("experiment config json") {
  std::istringstream in(R"({
    "n_subjects": 50, "images_per_subject": 7, "flip_prob": 0.25,
    "conf_correct": [6, 2], "conf_wrong": [2, 6], "quality_link": 0.5,
    "n_attributes": 4, "strategies": ["confidence", "quality"],
    "ks": [1, 3], "seeds": [1, 2, 3]
  })");
  const syn::ExperimentConfig config = syn::load_experiment_config(in);
  CHECK(config.n_subjects == 50);
  CHECK(config.noise.flip_prob == 0.25);
  CHECK(config.noise.conf_correct.alpha == 6);
  CHECK(config.noise.quality_link == 0.5);
  CHECK(config.strategies.size() == 2);
  CHECK(config.ks == std::vector<int>{1, 3});
  CHECK(config.seeds.size() == 3);

  std::istringstream unknown(R"({"n_subject": 10})");
  CHECK_THROWS_AS(syn::load_experiment_config(unknown), ParseError);
  std::istringstream bad_beta(R"({"conf_correct": [1]})");
  CHECK_THROWS_AS(syn::load_experiment_config(bad_beta), ParseError);
}

TEST_CASE("run_experiment produces the full grid") {
  syn::ExperimentConfig config;
  config.n_subjects = 30;
  config.images_per_subject = 5;
  config.n_attributes = 4;
  config.noise.flip_prob = 0.0;
  config.strategies = {Strategy::confidence};
  config.ks = {1, 3};
  config.seeds = {1, 2};
  const syn::ExperimentReport report = syn::run_experiment(config);
  CHECK(report.generator == kRngAlgorithm);
  REQUIRE(report.rows.size() == 4);
  for (const auto& row : report.rows) {
    CHECK(row.accuracy == 1.0);  // zero noise
    CHECK(row.baseline == 1.0);
  }
  CHECK(report.mean_accuracy(Strategy::confidence, 1) == 1.0);

  std::ostringstream out;
  write_experiment_csv(out, report);
  const std::string csv = out.str();
  CHECK(csv.find("# generator=mt19937_64") == 0);
  CHECK(csv.find("strategy,k,seed,accuracy,baseline_accuracy") != std::string::npos);
  CHECK(csv.find("confidence,3,2,1,1") != std::string::npos);
}

TEST_CASE("quality-linked noise makes quality ranking informative") {
  syn::ExperimentConfig config;
  config.n_subjects = 120;
  config.images_per_subject = 8;
  config.n_attributes = 6;
  config.noise.flip_prob = 0.15;
  config.noise.quality_link = 1.0;
  config.image_size = 32;
  config.strategies = {Strategy::quality};
  config.ks = {1};
  config.seeds = {5, 6};
  const syn::ExperimentReport report = syn::run_experiment(config);
  // Picking the best-quality image must beat the raw per-image baseline,
  // since degraded images flip more often.
  CHECK(report.mean_accuracy(Strategy::quality, 1) > report.mean_baseline());
}

TEST_CASE("uncoupled quality ranking behaves like arbitrary selection") {
  // With quality_link = 0, image quality carries no information about the
  // flips, so top-quality selection should land within noise of simply
  // taking each group's first image.
  double quality_acc = 0.0;
  double first_acc = 0.0;
  const int n_seeds = 30;
  for (int seed = 1; seed <= n_seeds; ++seed) {
    syn::GenerateOptions options;
    options.n_subjects = 60;
    options.images_per_subject = 6;
    options.n_attributes = 6;
    options.noise.flip_prob = 0.2;
    options.noise.quality_link = 0.0;
    options.with_images = true;
    options.image_size = 16;
    options.seed = static_cast<std::uint64_t>(seed);
    const auto [truth, dataset] = syn::generate(options);

    ConsolidationConfig config;
    config.strategy = Strategy::quality;
    config.top_k = 1;
    quality_acc += syn::evaluate(consolidate_dataset(dataset, config), truth);

    std::size_t hit = 0;
    std::size_t total = 0;
    for (std::size_t l = 0; l < dataset.groups.size(); ++l) {
      const auto& first = dataset.groups[l].images.front();
      for (std::size_t j = 0; j < truth.labels[l].size(); ++j) {
        hit += first.predictions[j].label == truth.labels[l][j] ? 1 : 0;
        ++total;
      }
    }
    first_acc += static_cast<double>(hit) / static_cast<double>(total);
  }
  quality_acc /= n_seeds;
  first_acc /= n_seeds;
  CHECK(std::abs(quality_acc - first_acc) < 0.03);
}

TEST_CASE("invalid generation parameters are rejected") {
  syn::GenerateOptions options;
  options.n_subjects = 0;
  CHECK_THROWS_AS(syn::generate(options), ConfigError);
  options.n_subjects = 1;
  options.noise.flip_prob = 1.0;
  CHECK_THROWS_AS(syn::generate(options), ConfigError);
  options.noise.flip_prob = 0.1;
  options.noise.conf_correct.alpha = 0.0;
  CHECK_THROWS_AS(syn::generate(options), ConfigError);
}
