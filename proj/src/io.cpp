#include "attrcons/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include <json.hpp>

#include "text_util.hpp"

namespace attrcons {
namespace {

using detail::format_double;
using detail::split_csv;
using detail::strip_cr;
using nlohmann::json;

double parse_probability(const std::string& cell, std::size_t line, const std::string& field) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ParseError(line, field, "not a number: '" + cell + "'");
  }
  if (value < 0.0 || value > 1.0) {
    throw ParseError(line, field, "probability outside [0,1]: " + cell);
  }
  return value;
}

// Accumulates records into groups keyed by subject id, first-seen order.
class GroupBuilder {
 public:
  void add(ImageRecord record, std::size_t line) {
    if (record.image_id.empty()) {
      throw ParseError(line, "image_id", "must not be empty");
    }
    if (record.subject_id.empty()) {
      throw ParseError(line, "subject_id", "must not be empty");
    }
    if (!image_ids_.insert(record.image_id).second) {
      throw ParseError(line, "image_id", "duplicate image id '" + record.image_id + "'");
    }
    auto [it, inserted] = index_.try_emplace(record.subject_id, groups_.size());
    if (inserted) {
      groups_.push_back(SubjectGroup{record.subject_id, {}});
    }
    groups_[it->second].images.push_back(std::move(record));
  }

  std::vector<SubjectGroup> take() { return std::move(groups_); }

 private:
  std::vector<SubjectGroup> groups_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_set<std::string> image_ids_;
};

Point2 point_from_json(const json& j, std::size_t line, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ParseError(line, field, "expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

EyePoints eye_from_json(const json& j, std::size_t line, const std::string& field) {
  EyePoints eye;
  eye.outer = point_from_json(j.at("outer"), line, field + ".outer");
  eye.inner = point_from_json(j.at("inner"), line, field + ".inner");
  eye.top = point_from_json(j.at("top"), line, field + ".top");
  eye.bottom = point_from_json(j.at("bottom"), line, field + ".bottom");
  return eye;
}

Landmarks landmarks_from_json(const json& j, std::size_t line) {
  Landmarks lm;
  lm.left_eye = eye_from_json(j.at("left_eye"), line, "landmarks.left_eye");
  lm.right_eye = eye_from_json(j.at("right_eye"), line, "landmarks.right_eye");
  const json& mouth = j.at("mouth");
  lm.mouth.left = point_from_json(mouth.at("left"), line, "landmarks.mouth.left");
  lm.mouth.right = point_from_json(mouth.at("right"), line, "landmarks.mouth.right");
  lm.mouth.top = point_from_json(mouth.at("top"), line, "landmarks.mouth.top");
  lm.mouth.bottom = point_from_json(mouth.at("bottom"), line, "landmarks.mouth.bottom");
  lm.nose_tip = point_from_json(j.at("nose_tip"), line, "landmarks.nose_tip");
  return lm;
}

json point_to_json(const Point2& p) { return json::array({p.x, p.y}); }

json eye_to_json(const EyePoints& eye) {
  return {{"outer", point_to_json(eye.outer)},
          {"inner", point_to_json(eye.inner)},
          {"top", point_to_json(eye.top)},
          {"bottom", point_to_json(eye.bottom)}};
}

json landmarks_to_json(const Landmarks& lm) {
  return {{"left_eye", eye_to_json(lm.left_eye)},
          {"right_eye", eye_to_json(lm.right_eye)},
          {"mouth",
           {{"left", point_to_json(lm.mouth.left)},
            {"right", point_to_json(lm.mouth.right)},
            {"top", point_to_json(lm.mouth.top)},
            {"bottom", point_to_json(lm.mouth.bottom)}}},
          {"nose_tip", point_to_json(lm.nose_tip)}};
}

Dataset load_predictions_csv(std::istream& in, const AttributeSchema& schema) {
  std::string raw;
  if (!std::getline(in, raw)) {
    throw ParseError(1, "header", "empty prediction file");
  }
  const auto header = split_csv(strip_cr(raw));
  const std::size_t expected_cols = 2 + 2 * schema.size();
  if (header.size() != expected_cols) {
    throw ParseError(1, "header",
                     "expected " + std::to_string(expected_cols) + " columns, got " +
                         std::to_string(header.size()));
  }
  if (header[0] != "image_id" || header[1] != "subject_id") {
    throw ParseError(1, "header", "must start with image_id,subject_id");
  }
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const std::string p1 = schema.names[j] + "_p1";
    const std::string p0 = schema.names[j] + "_p0";
    if (header[2 + 2 * j] != p1 || header[3 + 2 * j] != p0) {
      throw ParseError(1, header[2 + 2 * j], "expected columns '" + p1 + "," + p0 + "'");
    }
  }

  GroupBuilder builder;
  std::size_t line = 1;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view trimmed = strip_cr(raw);
    if (trimmed.empty()) {
      continue;
    }
    const auto cells = split_csv(trimmed);
    if (cells.size() != expected_cols) {
      throw ParseError(line, "row",
                       "expected " + std::to_string(expected_cols) + " columns, got " +
                           std::to_string(cells.size()));
    }
    ImageRecord record;
    record.image_id = cells[0];
    record.subject_id = cells[1];
    record.predictions.reserve(schema.size());
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const double p_pos = parse_probability(cells[2 + 2 * j], line, schema.names[j] + "_p1");
      const double p_neg = parse_probability(cells[3 + 2 * j], line, schema.names[j] + "_p0");
      if (std::abs(p_pos + p_neg - 1.0) > kProbabilitySumTolerance) {
        throw ParseError(line, schema.names[j] + "_p1",
                         "p_pos + p_neg must equal 1, got " + format_double(p_pos + p_neg));
      }
      record.predictions.push_back(make_prediction(p_pos, p_neg));
    }
    builder.add(std::move(record), line);
  }
  return Dataset{schema, builder.take()};
}

Dataset load_predictions_jsonl(std::istream& in, const AttributeSchema& schema) {
  GroupBuilder builder;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view trimmed = strip_cr(raw);
    if (trimmed.empty()) {
      continue;
    }
    json j;
    try {
      j = json::parse(trimmed);
    } catch (const json::exception& e) {
      throw ParseError(line, "json", e.what());
    }
    try {
      ImageRecord record;
      record.image_id = j.at("image_id").get<std::string>();
      record.subject_id = j.at("subject_id").get<std::string>();
      if (j.contains("source") && !j["source"].is_null()) {
        record.source = j["source"].get<std::string>();
      }
      const json& p_pos = j.at("p_pos");
      if (!p_pos.is_array() || p_pos.size() != schema.size()) {
        throw ParseError(line, "p_pos",
                         "expected array of " + std::to_string(schema.size()) + " floats");
      }
      record.predictions.reserve(schema.size());
      for (std::size_t k = 0; k < p_pos.size(); ++k) {
        if (!p_pos[k].is_number()) {
          throw ParseError(line, "p_pos[" + std::to_string(k) + "]", "not a number");
        }
        const double v = p_pos[k].get<double>();
        if (v < 0.0 || v > 1.0) {
          throw ParseError(line, "p_pos[" + std::to_string(k) + "]",
                           "probability outside [0,1]: " + format_double(v));
        }
        record.predictions.push_back(make_prediction(v, 1.0 - v));
      }
      if (j.contains("landmarks") && !j["landmarks"].is_null()) {
        record.landmarks = landmarks_from_json(j["landmarks"], line);
      }
      builder.add(std::move(record), line);
    } catch (const json::exception& e) {
      throw ParseError(line, "json", e.what());
    }
  }
  return Dataset{schema, builder.take()};
}

}  // namespace

Dataset load_predictions(std::istream& in, const AttributeSchema& schema,
                         PredictionFormat format) {
  schema.validate();
  Dataset dataset = format == PredictionFormat::csv ? load_predictions_csv(in, schema)
                                                    : load_predictions_jsonl(in, schema);
  dataset.validate();
  return dataset;
}

Dataset load_annotations(std::istream& in, const AttributeSchema& schema) {
  schema.validate();
  std::string raw;
  if (!std::getline(in, raw)) {
    throw ParseError(1, "header", "empty annotation file");
  }
  const auto header = split_csv(strip_cr(raw));
  const std::size_t expected_cols = 2 + schema.size();
  if (header.size() != expected_cols || header[0] != "image_id" || header[1] != "subject_id") {
    throw ParseError(1, "header", "expected image_id,subject_id,<attribute names>");
  }
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (header[2 + j] != schema.names[j]) {
      throw ParseError(1, header[2 + j], "expected attribute column '" + schema.names[j] + "'");
    }
  }

  GroupBuilder builder;
  std::size_t line = 1;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view trimmed = strip_cr(raw);
    if (trimmed.empty()) {
      continue;
    }
    const auto cells = split_csv(trimmed);
    if (cells.size() != expected_cols) {
      throw ParseError(line, "row",
                       "expected " + std::to_string(expected_cols) + " columns, got " +
                           std::to_string(cells.size()));
    }
    ImageRecord record;
    record.image_id = cells[0];
    record.subject_id = cells[1];
    record.predictions.reserve(schema.size());
    for (std::size_t j = 0; j < schema.size(); ++j) {
      const std::string& cell = cells[2 + j];
      if (cell == "1") {
        record.predictions.push_back(prediction_from_label(1));
      } else if (cell == "0") {
        record.predictions.push_back(prediction_from_label(0));
      } else {
        throw ParseError(line, schema.names[j], "label must be 0 or 1, got '" + cell + "'");
      }
    }
    builder.add(std::move(record), line);
  }
  Dataset dataset{schema, builder.take()};
  dataset.validate();
  return dataset;
}

void write_predictions_csv(std::ostream& out, const Dataset& dataset) {
  out << "image_id,subject_id";
  for (const auto& name : dataset.schema.names) {
    out << ',' << name << "_p1," << name << "_p0";
  }
  out << '\n';
  for (const auto& group : dataset.groups) {
    for (const auto& record : group.images) {
      out << record.image_id << ',' << record.subject_id;
      for (const auto& pred : record.predictions) {
        out << ',' << format_double(pred.p_pos) << ',' << format_double(pred.p_neg);
      }
      out << '\n';
    }
  }
}

void write_predictions_jsonl(std::ostream& out, const Dataset& dataset) {
  for (const auto& group : dataset.groups) {
    for (const auto& record : group.images) {
      json j;
      j["image_id"] = record.image_id;
      j["subject_id"] = record.subject_id;
      j["source"] = record.source ? json(*record.source) : json(nullptr);
      json p_pos = json::array();
      for (const auto& pred : record.predictions) {
        p_pos.push_back(pred.p_pos);
      }
      j["p_pos"] = std::move(p_pos);
      j["landmarks"] = record.landmarks ? landmarks_to_json(*record.landmarks) : json(nullptr);
      out << j.dump() << '\n';
    }
  }
}

void write_annotations_csv(std::ostream& out, const Dataset& dataset) {
  out << "image_id,subject_id";
  for (const auto& name : dataset.schema.names) {
    out << ',' << name;
  }
  out << '\n';
  for (const auto& group : dataset.groups) {
    for (const auto& record : group.images) {
      out << record.image_id << ',' << record.subject_id;
      for (const auto& pred : record.predictions) {
        out << ',' << pred.label;
      }
      out << '\n';
    }
  }
}

AttributeSchema load_schema(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("schema file: ") + e.what());
  }
  if (!j.is_array()) {
    throw ParseError("schema file: expected a JSON list of {name, stable} objects");
  }
  AttributeSchema schema;
  for (const auto& entry : j) {
    if (!entry.is_object() || !entry.contains("name")) {
      throw ParseError("schema file: every entry needs a \"name\"");
    }
    schema.names.push_back(entry["name"].get<std::string>());
    schema.stable.push_back(entry.value("stable", true));
  }
  schema.validate();
  return schema;
}

void write_schema(std::ostream& out, const AttributeSchema& schema) {
  json j = json::array();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    j.push_back({{"name", schema.names[i]}, {"stable", static_cast<bool>(schema.stable[i])}});
  }
  out << j.dump(2) << '\n';
}

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open file: " + path.string());
  }
  return in;
}

bool looks_like_jsonl(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  return ext == ".jsonl" || ext == ".ndjson" || ext == ".json";
}

}  // namespace

Dataset load_predictions_file(const std::filesystem::path& path, const AttributeSchema& schema) {
  auto in = open_or_throw(path);
  return load_predictions(in, schema,
                          looks_like_jsonl(path) ? PredictionFormat::jsonl
                                                 : PredictionFormat::csv);
}

Dataset load_annotations_file(const std::filesystem::path& path, const AttributeSchema& schema) {
  auto in = open_or_throw(path);
  return load_annotations(in, schema);
}

AttributeSchema load_schema_file(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return load_schema(in);
}

}  // namespace attrcons
