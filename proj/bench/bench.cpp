// Times the OpenMP batch kernels against their serial references on a
// synthetic workload and checks that both produce identical results.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>

#include "attrcons/consolidate.hpp"
#include "attrcons/inconsistency.hpp"
#include "attrcons/parallel.hpp"
#include "attrcons/quality.hpp"
#include "attrcons/synth.hpp"

using namespace attrcons;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Best of three; the first parallel region also pays thread-pool startup,
// which the warm-up in main() absorbs.
template <typename F>
double timed(F&& fn) {
  double best = 1e30;
  for (int rep = 0; rep < 3; ++rep) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, seconds_since(start));
  }
  return best;
}

void report(const char* kernel, double serial, double parallel, bool equal) {
  std::printf("%-16s serial %8.3fs   parallel %8.3fs   speedup %5.2fx   %s\n", kernel, serial,
              parallel, serial / parallel, equal ? "results match" : "RESULTS DIFFER");
}

bool same_im(const ImReport& a, const ImReport& b) {
  if (a.mean_im != b.mean_im || a.subjects.size() != b.subjects.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.subjects.size(); ++i) {
    if (a.subjects[i].per_attribute != b.subjects[i].per_attribute) {
      return false;
    }
  }
  return true;
}

bool same_consolidation(const std::vector<SubjectAttributes>& a,
                        const std::vector<SubjectAttributes>& b) {
  if (a.size() != b.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].labels != b[i].labels) {
      return false;
    }
  }
  return true;
}

bool same_quality(const std::vector<GroupQuality>& a, const std::vector<GroupQuality>& b) {
  if (a.size() != b.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].ranked.size() != b[i].ranked.size()) {
      return false;
    }
    for (std::size_t r = 0; r < a[i].ranked.size(); ++r) {
      if (a[i].ranked[r].image_id != b[i].ranked[r].image_id ||
          a[i].ranked[r].score != b[i].ranked[r].score) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

int main() {
  std::printf("attrcons kernel benchmark, %d worker threads\n", effective_jobs(0));
  parallel_for(1024, 0, [](std::size_t) {});  // spin up the thread pool

  synth::GenerateOptions gen;
  gen.n_subjects = 4000;
  gen.images_per_subject = 24;
  gen.n_attributes = 40;
  gen.noise.flip_prob = 0.2;
  gen.seed = 7;
  const auto [truth, dataset] = synth::generate(gen);
  std::printf("dataset: %zu subjects, %zu records, %zu attributes\n\n", dataset.groups.size(),
              dataset.total_records(), dataset.schema.size());

  {
    ImReport serial_report;
    ImReport parallel_report;
    const double ts = timed([&] { serial_report = dataset_im_serial(dataset); });
    const double tp = timed([&] { parallel_report = dataset_im(dataset); });
    report("inconsistency", ts, tp, same_im(serial_report, parallel_report));
  }

  {
    ConsolidationConfig config;
    config.top_k = 5;
    std::vector<SubjectAttributes> serial_result;
    std::vector<SubjectAttributes> parallel_result;
    const double ts = timed([&] { serial_result = consolidate_dataset_serial(dataset, config); });
    const double tp = timed([&] { parallel_result = consolidate_dataset(dataset, config); });
    report("consolidation", ts, tp, same_consolidation(serial_result, parallel_result));
  }

  {
    // Quality scoring reads PGM files; use a smaller image batch.
    const auto dir = std::filesystem::temp_directory_path() / "attrcons_bench_images";
    synth::GenerateOptions img_gen;
    img_gen.n_subjects = 60;
    img_gen.images_per_subject = 10;
    img_gen.n_attributes = 4;
    img_gen.with_images = true;
    img_gen.image_size = 128;
    img_gen.images_dir = dir;
    img_gen.seed = 11;
    const auto [img_truth, img_dataset] = synth::generate(img_gen);

    std::vector<GroupQuality> serial_result;
    std::vector<GroupQuality> parallel_result;
    const QualityWeights weights;
    const double ts = timed([&] { serial_result = score_dataset_serial(img_dataset, weights); });
    const double tp = timed([&] { parallel_result = score_dataset(img_dataset, weights); });
    report("quality", ts, tp, same_quality(serial_result, parallel_result));
    std::filesystem::remove_all(dir);
  }

  return 0;
}
