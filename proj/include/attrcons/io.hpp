#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "attrcons/model.hpp"

namespace attrcons {

enum class PredictionFormat { csv, jsonl };

// Parses a prediction stream into a dataset grouped by subject id.
// Groups appear in first-seen order; record order within a group is the
// input order. Throws ParseError naming line and field on malformed input.
Dataset load_predictions(std::istream& in, const AttributeSchema& schema,
                         PredictionFormat format);

// Parses an annotation CSV (hard 0/1 labels, no probabilities). Labels are
// embedded as degenerate probability pairs.
Dataset load_annotations(std::istream& in, const AttributeSchema& schema);

void write_predictions_csv(std::ostream& out, const Dataset& dataset);
void write_predictions_jsonl(std::ostream& out, const Dataset& dataset);
void write_annotations_csv(std::ostream& out, const Dataset& dataset);

// Schema file: JSON list of {"name": ..., "stable": true|false}.
AttributeSchema load_schema(std::istream& in);
void write_schema(std::ostream& out, const AttributeSchema& schema);

// File-path convenience wrappers. Format is picked by extension
// (".jsonl" / ".ndjson" vs anything else = CSV) unless forced.
Dataset load_predictions_file(const std::filesystem::path& path,
                              const AttributeSchema& schema);
Dataset load_annotations_file(const std::filesystem::path& path,
                              const AttributeSchema& schema);
AttributeSchema load_schema_file(const std::filesystem::path& path);

}  // namespace attrcons
