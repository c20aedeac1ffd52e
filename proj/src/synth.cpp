#include "attrcons/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>

#include "attrcons/parallel.hpp"
#include "attrcons/quality.hpp"
#include "attrcons/rng.hpp"

namespace attrcons::synth {
namespace {

void validate(const GenerateOptions& o) {
  if (o.n_subjects < 1) {
    throw ConfigError("n_subjects must be >= 1");
  }
  if (o.images_per_subject < 1) {
    throw ConfigError("images_per_subject must be >= 1");
  }
  if (o.n_attributes < 1) {
    throw ConfigError("n_attributes must be >= 1");
  }
  if (!(o.noise.flip_prob >= 0.0 && o.noise.flip_prob < 1.0)) {
    throw ConfigError("flip_prob must be in [0,1)");
  }
  if (o.noise.quality_link < 0.0 || o.noise.quality_link > 1.0) {
    throw ConfigError("quality_link must be in [0,1]");
  }
  if (o.noise.conf_correct.alpha <= 0.0 || o.noise.conf_correct.beta <= 0.0 ||
      o.noise.conf_wrong.alpha <= 0.0 || o.noise.conf_wrong.beta <= 0.0) {
    throw ConfigError("confidence Beta parameters must be positive");
  }
  if (o.image_size < 8) {
    throw ConfigError("image_size must be >= 8");
  }
}

AttributeSchema schema_for(int n_attributes) {
  if (n_attributes == 40) {
    return celeba_schema();
  }
  AttributeSchema schema;
  schema.names.reserve(static_cast<std::size_t>(n_attributes));
  for (int j = 0; j < n_attributes; ++j) {
    char name[16];
    std::snprintf(name, sizeof(name), "attr_%02d", j);
    schema.names.emplace_back(name);
    schema.stable.push_back(true);
  }
  return schema;
}

std::string subject_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "s%05d", index);
  return buf;
}

AttributePrediction noisy_prediction(int truth, double flip_prob, const NoiseModel& noise,
                                     Rng& rng) {
  const bool flipped = rng.bernoulli(flip_prob);
  const int label = flipped ? 1 - truth : truth;
  const BetaParams& params = flipped ? noise.conf_wrong : noise.conf_correct;
  double conf = rng.beta(params.alpha, params.beta);
  // Keep binary_label consistent with the intended label even at conf -> 0.
  if (label == 0) {
    conf = std::max(conf, 1e-12);
  }
  const double p_pos = label == 1 ? (1.0 + conf) / 2.0 : (1.0 - conf) / 2.0;
  return make_prediction(p_pos, 1.0 - p_pos);
}

GrayImage degraded(const GrayImage& base, double level) {
  const auto radius = static_cast<std::size_t>(std::lround(level * 3.0));
  GrayImage img = radius > 0 ? box_blur(base, radius) : base;
  return scaled(img, 1.0 - 0.6 * level);
}

}  // namespace

GrayImage synthetic_face(int size, std::uint64_t seed) {
  const auto s = static_cast<std::size_t>(size);
  GrayImage img(s, s, 0.85);
  const double cx = 0.5 * static_cast<double>(size);
  const double cy = 0.5 * static_cast<double>(size);
  const double rx = 0.34 * static_cast<double>(size);
  const double ry = 0.42 * static_cast<double>(size);
  for (std::size_t y = 0; y < s; ++y) {
    for (std::size_t x = 0; x < s; ++x) {
      const double dx = (static_cast<double>(x) - cx) / rx;
      const double dy = (static_cast<double>(y) - cy) / ry;
      if (dx * dx + dy * dy <= 1.0) {
        img.at(x, y) = 0.55;
      }
    }
  }
  const auto disk = [&](double fx, double fy, double fr, double value) {
    const double px = fx * static_cast<double>(size);
    const double py = fy * static_cast<double>(size);
    const double r = fr * static_cast<double>(size);
    for (std::size_t y = 0; y < s; ++y) {
      for (std::size_t x = 0; x < s; ++x) {
        const double dx = static_cast<double>(x) - px;
        const double dy = static_cast<double>(y) - py;
        if (dx * dx + dy * dy <= r * r) {
          img.at(x, y) = value;
        }
      }
    }
  };
  disk(0.35, 0.40, 0.05, 0.15);  // eyes
  disk(0.65, 0.40, 0.05, 0.15);
  for (std::size_t y = static_cast<std::size_t>(0.64 * size);
       y < static_cast<std::size_t>(0.70 * size) && y < s; ++y) {
    for (std::size_t x = static_cast<std::size_t>(0.38 * size);
         x < static_cast<std::size_t>(0.62 * size) && x < s; ++x) {
      img.at(x, y) = 0.25;  // mouth
    }
  }
  // Texture noise keeps focus and sharpness responsive to blur.
  Rng rng(seed);
  for (double& p : img.pixels) {
    p = std::clamp(p + (rng.next_unit() - 0.5) * 0.08, 0.0, 1.0);
  }
  return img;
}

std::pair<TruthTable, Dataset> generate(const GenerateOptions& options) {
  validate(options);
  const bool with_images = options.with_images || options.noise.quality_link > 0.0;
  const AttributeSchema schema = schema_for(options.n_attributes);
  const std::size_t n_subjects = static_cast<std::size_t>(options.n_subjects);
  const std::size_t n_images = static_cast<std::size_t>(options.images_per_subject);
  const std::size_t n_attrs = schema.size();

  if (options.images_dir) {
    std::filesystem::create_directories(*options.images_dir);
  }

  TruthTable truth;
  truth.subject_ids.resize(n_subjects);
  truth.labels.assign(n_subjects, {});
  std::vector<SubjectGroup> groups(n_subjects);

  parallel_for(n_subjects, options.jobs, [&](std::size_t l) {
    Rng rng(mix_seed(options.seed, l));
    const std::string subject = subject_name(static_cast<int>(l));
    truth.subject_ids[l] = subject;

    std::vector<int>& labels = truth.labels[l];
    labels.resize(n_attrs);
    for (std::size_t j = 0; j < n_attrs; ++j) {
      labels[j] = rng.bernoulli(0.5) ? 1 : 0;
    }

    GrayImage base;
    if (with_images) {
      base = synthetic_face(options.image_size, mix_seed(options.seed ^ 0xFACEF00DULL, l));
    }

    SubjectGroup group;
    group.subject_id = subject;
    group.images.reserve(n_images);
    for (std::size_t i = 0; i < n_images; ++i) {
      ImageRecord record;
      char image_suffix[16];
      std::snprintf(image_suffix, sizeof(image_suffix), "_i%03d", static_cast<int>(i));
      record.image_id = subject + image_suffix;
      record.subject_id = subject;

      double degradation = 0.0;
      double flip_prob = options.noise.flip_prob;
      if (with_images) {
        degradation = rng.next_unit();
        // Degraded images drift toward coin-flip predictions.
        flip_prob = std::clamp(
            flip_prob + options.noise.quality_link * degradation * (0.5 - flip_prob), 0.0,
            0.999);
      }

      record.predictions.reserve(n_attrs);
      for (std::size_t j = 0; j < n_attrs; ++j) {
        record.predictions.push_back(
            noisy_prediction(labels[j], flip_prob, options.noise, rng));
      }

      if (with_images) {
        const GrayImage image = degraded(base, degradation);
        const QualityFeatures features = compute_features(image, std::nullopt);
        record.quality = quality_score(features, options.weights);
        if (options.images_dir) {
          const std::filesystem::path path = *options.images_dir / (record.image_id + ".pgm");
          write_pgm(image, path);
          record.source = path.string();
        }
      }
      group.images.push_back(std::move(record));
    }
    groups[l] = std::move(group);
  });

  Dataset dataset{schema, std::move(groups)};
  return {std::move(truth), std::move(dataset)};
}

std::pair<TruthTable, Dataset> generate(int n_subjects, int images_per_subject,
                                        const NoiseModel& noise, std::uint64_t seed) {
  GenerateOptions options;
  options.n_subjects = n_subjects;
  options.images_per_subject = images_per_subject;
  options.noise = noise;
  options.seed = seed;
  return generate(options);
}

double evaluate(const std::vector<SubjectAttributes>& consolidated, const TruthTable& truth) {
  if (consolidated.size() != truth.subject_ids.size()) {
    throw ValidationError("evaluate: consolidated subject count does not match truth");
  }
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t l = 0; l < consolidated.size(); ++l) {
    if (consolidated[l].subject_id != truth.subject_ids[l]) {
      throw ValidationError("evaluate: subject mismatch at index " + std::to_string(l) +
                            ": '" + consolidated[l].subject_id + "' vs '" +
                            truth.subject_ids[l] + "'");
    }
    const auto& want = truth.labels[l];
    if (consolidated[l].labels.size() != want.size()) {
      throw ValidationError("evaluate: attribute count mismatch for subject '" +
                            truth.subject_ids[l] + "'");
    }
    for (std::size_t j = 0; j < want.size(); ++j) {
      correct += consolidated[l].labels[j] == want[j] ? 1 : 0;
      ++total;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

double baseline_accuracy(const Dataset& dataset, const TruthTable& truth) {
  if (dataset.groups.size() != truth.subject_ids.size()) {
    throw ValidationError("baseline_accuracy: group count does not match truth");
  }
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t l = 0; l < dataset.groups.size(); ++l) {
    if (dataset.groups[l].subject_id != truth.subject_ids[l]) {
      throw ValidationError("baseline_accuracy: subject mismatch at index " +
                            std::to_string(l));
    }
    const auto& want = truth.labels[l];
    for (const auto& record : dataset.groups[l].images) {
      for (std::size_t j = 0; j < want.size(); ++j) {
        correct += record.predictions[j].label == want[j] ? 1 : 0;
        ++total;
      }
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

double ExperimentReport::mean_accuracy(Strategy strategy, int k) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& row : rows) {
    if (row.strategy == strategy && row.k == k) {
      sum += row.accuracy;
      ++n;
    }
  }
  if (n == 0) {
    throw ValidationError("no experiment rows for " + to_string(strategy) + ", k=" +
                          std::to_string(k));
  }
  return sum / static_cast<double>(n);
}

double ExperimentReport::mean_baseline() const {
  std::map<std::uint64_t, double> by_seed;
  for (const auto& row : rows) {
    by_seed.emplace(row.seed, row.baseline);
  }
  if (by_seed.empty()) {
    throw ValidationError("experiment report is empty");
  }
  double sum = 0.0;
  for (const auto& [seed, baseline] : by_seed) {
    sum += baseline;
  }
  return sum / static_cast<double>(by_seed.size());
}

ExperimentConfig load_experiment_config(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("experiment config: ") + e.what());
  }
  if (!j.is_object()) {
    throw ParseError("experiment config: expected a JSON object");
  }
  ExperimentConfig config;
  const auto beta_pair = [](const nlohmann::json& value, const char* key) -> BetaParams {
    if (!value.is_array() || value.size() != 2 || !value[0].is_number() ||
        !value[1].is_number()) {
      throw ParseError(std::string("experiment config: ") + key +
                       " must be [alpha, beta]");
    }
    return {value[0].get<double>(), value[1].get<double>()};
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "n_subjects") {
      config.n_subjects = value.get<int>();
    } else if (key == "images_per_subject") {
      config.images_per_subject = value.get<int>();
    } else if (key == "flip_prob") {
      config.noise.flip_prob = value.get<double>();
    } else if (key == "conf_correct") {
      config.noise.conf_correct = beta_pair(value, "conf_correct");
    } else if (key == "conf_wrong") {
      config.noise.conf_wrong = beta_pair(value, "conf_wrong");
    } else if (key == "quality_link") {
      config.noise.quality_link = value.get<double>();
    } else if (key == "n_attributes") {
      config.n_attributes = value.get<int>();
    } else if (key == "image_size") {
      config.image_size = value.get<int>();
    } else if (key == "strategies") {
      config.strategies.clear();
      for (const auto& name : value) {
        config.strategies.push_back(strategy_from_string(name.get<std::string>()));
      }
    } else if (key == "ks") {
      config.ks = value.get<std::vector<int>>();
    } else if (key == "seeds") {
      config.seeds = value.get<std::vector<std::uint64_t>>();
    } else {
      throw ParseError("experiment config: unknown key '" + key + "'");
    }
  }
  if (config.strategies.empty() || config.ks.empty() || config.seeds.empty()) {
    throw ConfigError("experiment config: strategies, ks and seeds must be non-empty");
  }
  return config;
}

ExperimentConfig load_experiment_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open experiment config: " + path.string());
  }
  return load_experiment_config(in);
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  const bool needs_quality =
      std::find(config.strategies.begin(), config.strategies.end(), Strategy::quality) !=
      config.strategies.end();

  // accuracy[seed][strategy][k]
  std::vector<std::vector<std::vector<double>>> accuracy(
      config.seeds.size(),
      std::vector<std::vector<double>>(config.strategies.size(),
                                       std::vector<double>(config.ks.size(), 0.0)));
  std::vector<double> baselines(config.seeds.size(), 0.0);

  for (std::size_t si = 0; si < config.seeds.size(); ++si) {
    GenerateOptions gen;
    gen.n_subjects = config.n_subjects;
    gen.images_per_subject = config.images_per_subject;
    gen.noise = config.noise;
    gen.seed = config.seeds[si];
    gen.n_attributes = config.n_attributes;
    gen.image_size = config.image_size;
    gen.with_images = needs_quality || config.images_dir.has_value();
    gen.weights = config.weights;
    if (config.images_dir) {
      gen.images_dir = *config.images_dir / ("seed_" + std::to_string(config.seeds[si]));
    }
    gen.jobs = config.jobs;
    const auto [truth, dataset] = generate(gen);
    baselines[si] = baseline_accuracy(dataset, truth);
    for (std::size_t sti = 0; sti < config.strategies.size(); ++sti) {
      for (std::size_t ki = 0; ki < config.ks.size(); ++ki) {
        ConsolidationConfig cc;
        cc.strategy = config.strategies[sti];
        cc.top_k = config.ks[ki];
        cc.weights = config.weights;
        const auto consolidated = consolidate_dataset(dataset, cc, config.jobs);
        accuracy[si][sti][ki] = evaluate(consolidated, truth);
      }
    }
  }

  ExperimentReport report;
  report.generator = kRngAlgorithm;
  for (std::size_t sti = 0; sti < config.strategies.size(); ++sti) {
    for (std::size_t ki = 0; ki < config.ks.size(); ++ki) {
      for (std::size_t si = 0; si < config.seeds.size(); ++si) {
        report.rows.push_back({config.strategies[sti], config.ks[ki], config.seeds[si],
                               accuracy[si][sti][ki], baselines[si]});
      }
    }
  }
  return report;
}

}  // namespace attrcons::synth
