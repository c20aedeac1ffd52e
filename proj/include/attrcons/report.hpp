#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "attrcons/consolidate.hpp"
#include "attrcons/inconsistency.hpp"
#include "attrcons/quality.hpp"
#include "attrcons/synth.hpp"

namespace attrcons {

// Metadata carried by machine-readable reports.
struct ReportMeta {
  std::string dataset_id;  // typically the input path
  std::string timestamp;   // RFC 3339 UTC
};

// Current UTC time, or SOURCE_DATE_EPOCH when that variable is set so runs
// can be made byte-reproducible.
std::string report_timestamp();

// Per-subject rows followed by a per-attribute summary section, mirroring
// the usual IM table layout. im is fixed to two decimals in CSV; the JSON
// flavour keeps full precision.
void write_im_csv(std::ostream& out, const ImReport& report);
void write_im_json(std::ostream& out, const ImReport& report, const ReportMeta& meta);

void write_quality_csv(std::ostream& out, const std::vector<GroupQuality>& results);
void write_quality_json(std::ostream& out, const std::vector<GroupQuality>& results,
                        const ReportMeta& meta);

// subject_id,<attr...> label matrix.
void write_consolidated_csv(std::ostream& out, const std::vector<SubjectAttributes>& subjects,
                            const AttributeSchema& schema);
void write_consolidated_json(std::ostream& out, const std::vector<SubjectAttributes>& subjects,
                             const AttributeSchema& schema, const ReportMeta& meta);
// Per-attribute contributors and vote counts.
void write_provenance_json(std::ostream& out, const std::vector<SubjectAttributes>& subjects,
                           const AttributeSchema& schema);
// Reads the label matrix back (provenance is not restored).
std::vector<SubjectAttributes> load_consolidated_csv(std::istream& in,
                                                     const AttributeSchema& schema);
std::vector<SubjectAttributes> load_consolidated_csv_file(const std::filesystem::path& path,
                                                          const AttributeSchema& schema);

void write_changes_csv(std::ostream& out, const std::vector<LabelChange>& changes);

// strategy,k,seed,accuracy,baseline_accuracy rows; the generator identifier
// goes into a leading comment line.
void write_experiment_csv(std::ostream& out, const synth::ExperimentReport& report);

// Writes through a temp file in the same directory plus rename, so readers
// never observe a half-written report. Refuses to replace an existing file
// unless overwrite is set.
void write_file_atomic(const std::filesystem::path& path, const std::string& content,
                       bool overwrite);

}  // namespace attrcons
