#include "attrcons/report.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "text_util.hpp"

namespace attrcons {
namespace {

using detail::format_double;
using detail::format_fixed;
using detail::split_csv;
using detail::strip_cr;
using nlohmann::json;

const char* mode_name(ImMode mode) {
  return mode == ImMode::predictions ? "predictions" : "labels";
}

}  // namespace

std::string report_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_im_csv(std::ostream& out, const ImReport& report) {
  out << "subject_id,attribute,c_pos,c_neg,ratio,im\n";
  for (const auto& subject : report.subjects) {
    for (std::size_t j = 0; j < report.attributes.size(); ++j) {
      const AttributeIm& im = subject.per_attribute[j];
      out << subject.subject_id << ',' << report.attributes[j] << ',' << im.c_pos << ','
          << im.c_neg << ',' << format_fixed(im.ratio, 6) << ',' << format_fixed(im.im, 2)
          << '\n';
    }
  }
  out << "\nattribute,mean_im\n";
  for (std::size_t j = 0; j < report.attributes.size(); ++j) {
    out << report.attributes[j] << ',' << format_fixed(report.mean_im[j], 2) << '\n';
  }
}

void write_im_json(std::ostream& out, const ImReport& report, const ReportMeta& meta) {
  json j;
  j["dataset"] = meta.dataset_id;
  j["mode"] = mode_name(report.mode);
  j["timestamp"] = meta.timestamp;
  j["attributes"] = report.attributes;
  json subjects = json::array();
  for (const auto& subject : report.subjects) {
    json row;
    row["subject_id"] = subject.subject_id;
    row["group_size"] = subject.group_size;
    json ims = json::array();
    for (const auto& im : subject.per_attribute) {
      ims.push_back({{"c_pos", im.c_pos},
                     {"c_neg", im.c_neg},
                     {"ratio", im.ratio},
                     {"im", im.im}});
    }
    row["im"] = std::move(ims);
    subjects.push_back(std::move(row));
  }
  j["subjects"] = std::move(subjects);
  j["mean_im"] = report.mean_im;
  out << j.dump(2) << '\n';
}

void write_quality_csv(std::ostream& out, const std::vector<GroupQuality>& results) {
  out << "image_id,subject_id";
  for (const char* name : kQualityFeatureNames) {
    out << ',' << name;
  }
  out << ",score,rank\n";
  for (const auto& group : results) {
    std::size_t rank = 1;
    for (const auto& scored : group.ranked) {
      out << scored.image_id << ',' << group.subject_id;
      for (const double value : scored.features.as_array()) {
        out << ',' << format_fixed(value, 6);
      }
      out << ',' << format_fixed(scored.score, 6) << ',' << rank << '\n';
      ++rank;
    }
  }
}

void write_quality_json(std::ostream& out, const std::vector<GroupQuality>& results,
                        const ReportMeta& meta) {
  json j;
  j["dataset"] = meta.dataset_id;
  j["timestamp"] = meta.timestamp;
  json groups = json::array();
  for (const auto& group : results) {
    json g;
    g["subject_id"] = group.subject_id;
    json images = json::array();
    std::size_t rank = 1;
    for (const auto& scored : group.ranked) {
      json img;
      img["image_id"] = scored.image_id;
      img["rank"] = rank++;
      img["score"] = scored.score;
      const auto values = scored.features.as_array();
      json features;
      for (std::size_t k = 0; k < kQualityFeatureCount; ++k) {
        features[kQualityFeatureNames[k]] = values[k];
      }
      img["features"] = std::move(features);
      images.push_back(std::move(img));
    }
    g["images"] = std::move(images);
    json errors = json::array();
    for (const auto& error : group.errors) {
      errors.push_back({{"image_id", error.image_id}, {"error", error.message}});
    }
    g["errors"] = std::move(errors);
    groups.push_back(std::move(g));
  }
  j["groups"] = std::move(groups);
  out << j.dump(2) << '\n';
}

void write_consolidated_csv(std::ostream& out, const std::vector<SubjectAttributes>& subjects,
                            const AttributeSchema& schema) {
  out << "subject_id";
  for (const auto& name : schema.names) {
    out << ',' << name;
  }
  out << '\n';
  for (const auto& subject : subjects) {
    out << subject.subject_id;
    for (const int label : subject.labels) {
      out << ',' << label;
    }
    out << '\n';
  }
}

void write_consolidated_json(std::ostream& out, const std::vector<SubjectAttributes>& subjects,
                             const AttributeSchema& schema, const ReportMeta& meta) {
  json j;
  j["dataset"] = meta.dataset_id;
  j["timestamp"] = meta.timestamp;
  j["attributes"] = schema.names;
  json rows = json::array();
  for (const auto& subject : subjects) {
    rows.push_back({{"subject_id", subject.subject_id}, {"labels", subject.labels}});
  }
  j["subjects"] = std::move(rows);
  out << j.dump(2) << '\n';
}

void write_provenance_json(std::ostream& out, const std::vector<SubjectAttributes>& subjects,
                           const AttributeSchema& schema) {
  json j = json::array();
  for (const auto& subject : subjects) {
    json row;
    row["subject_id"] = subject.subject_id;
    json attrs;
    for (std::size_t k = 0; k < subject.provenance.size(); ++k) {
      const AttributeProvenance& prov = subject.provenance[k];
      attrs[schema.names[k]] = {{"strategy", to_string(prov.strategy)},
                                {"contributors", prov.contributors},
                                {"votes_pos", prov.votes_pos},
                                {"votes_neg", prov.votes_neg},
                                {"label", subject.labels[k]}};
    }
    row["attributes"] = std::move(attrs);
    j.push_back(std::move(row));
  }
  out << j.dump(2) << '\n';
}

std::vector<SubjectAttributes> load_consolidated_csv(std::istream& in,
                                                     const AttributeSchema& schema) {
  std::string raw;
  if (!std::getline(in, raw)) {
    throw ParseError(1, "header", "empty consolidated file");
  }
  const auto header = split_csv(strip_cr(raw));
  if (header.size() != schema.size() + 1 || header[0] != "subject_id") {
    throw ParseError(1, "header", "expected subject_id,<attribute names>");
  }
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (header[1 + j] != schema.names[j]) {
      throw ParseError(1, header[1 + j],
                       "expected attribute column '" + schema.names[j] + "'");
    }
  }
  std::vector<SubjectAttributes> subjects;
  std::size_t line = 1;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view trimmed = strip_cr(raw);
    if (trimmed.empty()) {
      continue;
    }
    const auto cells = split_csv(trimmed);
    if (cells.size() != schema.size() + 1) {
      throw ParseError(line, "row", "wrong column count");
    }
    SubjectAttributes subject;
    subject.subject_id = cells[0];
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const std::string& cell = cells[1 + j];
      if (cell != "0" && cell != "1") {
        throw ParseError(line, schema.names[j], "label must be 0 or 1, got '" + cell + "'");
      }
      subject.labels.push_back(cell == "1" ? 1 : 0);
    }
    subjects.push_back(std::move(subject));
  }
  return subjects;
}

std::vector<SubjectAttributes> load_consolidated_csv_file(const std::filesystem::path& path,
                                                          const AttributeSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open consolidated file: " + path.string());
  }
  return load_consolidated_csv(in, schema);
}

void write_changes_csv(std::ostream& out, const std::vector<LabelChange>& changes) {
  out << "image_id,subject_id,attribute,old,new\n";
  for (const auto& change : changes) {
    out << change.image_id << ',' << change.subject_id << ',' << change.attribute << ','
        << change.old_label << ',' << change.new_label << '\n';
  }
}

void write_experiment_csv(std::ostream& out, const synth::ExperimentReport& report) {
  out << "# generator=" << report.generator << '\n';
  out << "strategy,k,seed,accuracy,baseline_accuracy\n";
  for (const auto& row : report.rows) {
    out << to_string(row.strategy) << ',' << row.k << ',' << row.seed << ','
        << format_double(row.accuracy) << ',' << format_double(row.baseline) << '\n';
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content,
                       bool overwrite) {
  if (!overwrite && std::filesystem::exists(path)) {
    throw ValidationError("output file exists (use --force to overwrite): " + path.string());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw ValidationError("cannot write: " + tmp.string());
    }
    out << content;
    if (!out) {
      throw ValidationError("failed writing: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace attrcons
