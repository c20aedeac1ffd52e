#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <sys/wait.h>

#include "attrcons/image.hpp"
#include "attrcons/inconsistency.hpp"
#include "attrcons/io.hpp"
#include "attrcons/report.hpp"
#include "attrcons/synth.hpp"

#ifndef ATTRCONS_BIN
#error "ATTRCONS_BIN must point at the CLI binary"
#endif

using namespace attrcons;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(ATTRCONS_BIN) + " " + args + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() /
          ("attrcons_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }

  fs::path file(const std::string& name, const std::string& content) const {
    const fs::path path = dir / name;
    std::ofstream(path, std::ios::binary) << content;
    return path;
  }
};

const char* kSchemaJson = R"([
  {"name": "Male", "stable": true},
  {"name": "Smiling", "stable": false}
])";

const char* kPredictionsCsv =
    "image_id,subject_id,Male_p1,Male_p0,Smiling_p1,Smiling_p0\n"
    "a1,A,0.9,0.1,0.2,0.8\n"
    "a2,A,0.8,0.2,0.7,0.3\n"
    "a3,A,0.3,0.7,0.6,0.4\n"
    "b1,B,0.1,0.9,0.5,0.5\n"
    "b2,B,0.2,0.8,0.4,0.6\n";

const char* kAnnotationsCsv =
    "image_id,subject_id,Male,Smiling\n"
    "a1,A,1,1\n"
    "a2,A,1,0\n"
    "a3,A,0,1\n"
    "b1,B,0,0\n"
    "b2,B,0,1\n";

}  // namespace

TEST_CASE("im subcommand reproduces the library report byte for byte") {
  Workspace ws;
  const auto schema_path = ws.file("schema.json", kSchemaJson);
  const auto pred_path = ws.file("p.csv", kPredictionsCsv);
  const auto out_path = ws.dir / "report.csv";

  CHECK(run("im --predictions " + pred_path.string() + " --schema " + schema_path.string() +
            " --out " + out_path.string()) == 0);

  const AttributeSchema schema = load_schema_file(schema_path);
  const Dataset dataset = load_predictions_file(pred_path, schema);
  std::ostringstream expected;
  write_im_csv(expected, dataset_im(dataset));
  CHECK(slurp(out_path) == expected.str());
}

TEST_CASE("usage errors exit 1, data errors exit 2") {
  Workspace ws;
  const auto schema_path = ws.file("schema.json", kSchemaJson);

  CHECK(run("im --no-such-flag") == 1);
  CHECK(run("") == 1);  // missing subcommand
  CHECK(run("im") == 1);  // missing required --predictions

  const auto bad = ws.file("bad.csv", "image_id,subject_id,Male_p1\n");
  CHECK(run("im --predictions " + bad.string() + " --schema " + schema_path.string()) == 2);

  const auto malformed = ws.file(
      "mal.csv",
      "image_id,subject_id,Male_p1,Male_p0,Smiling_p1,Smiling_p0\na1,A,1.9,0.1,0.2,0.8\n");
  CHECK(run("im --predictions " + malformed.string() + " --schema " + schema_path.string()) ==
        2);

  CHECK(run("im --predictions " + (ws.dir / "missing.csv").string() + " --schema " +
            schema_path.string()) == 2);
}

TEST_CASE("existing outputs are protected unless --force") {
  Workspace ws;
  const auto schema_path = ws.file("schema.json", kSchemaJson);
  const auto pred_path = ws.file("p.csv", kPredictionsCsv);
  const auto out_path = ws.file("report.csv", "old content");

  const std::string base = "im --predictions " + pred_path.string() + " --schema " +
                           schema_path.string() + " --out " + out_path.string();
  CHECK(run(base) == 2);
  CHECK(slurp(out_path) == "old content");
  CHECK(run(base + " --force") == 0);
  CHECK(slurp(out_path) != "old content");
}

TEST_CASE("audit emits a labels-mode json report") {
  Workspace ws;
  const auto schema_path = ws.file("schema.json", kSchemaJson);
  const auto ann_path = ws.file("a.csv", kAnnotationsCsv);
  const auto out_path = ws.dir / "audit.json";
  CHECK(run("audit --annotations " + ann_path.string() + " --schema " + schema_path.string() +
            " --format json --out " + out_path.string()) == 0);
  const std::string json = slurp(out_path);
  CHECK(json.find("\"mode\": \"labels\"") != std::string::npos);
  CHECK(json.find("\"Male\"") != std::string::npos);
}

TEST_CASE("consolidate writes the label matrix and a provenance sidecar") {
  Workspace ws;
  const auto schema_path = ws.file("schema.json", kSchemaJson);
  const auto pred_path = ws.file("p.csv", kPredictionsCsv);
  const auto out_path = ws.dir / "cons.csv";
  CHECK(run("consolidate --predictions " + pred_path.string() + " --schema " +
            schema_path.string() + " --strategy confidence --top-k 3 --out " +
            out_path.string()) == 0);
  const std::string csv = slurp(out_path);
  CHECK(csv.find("subject_id,Male,Smiling") == 0);
  CHECK(csv.find("A,1,") != std::string::npos);
  CHECK(fs::exists(ws.dir / "cons.provenance.json"));
  const std::string prov = slurp(ws.dir / "cons.provenance.json");
  CHECK(prov.find("\"contributors\"") != std::string::npos);
}

TEST_CASE("correct dry run only reports changes") {
  Workspace ws;
  const auto schema_path = ws.file("schema.json", kSchemaJson);
  const auto ann_path = ws.file("a.csv", kAnnotationsCsv);
  const auto log_path = ws.dir / "changes.csv";
  CHECK(run("correct --annotations " + ann_path.string() + " --schema " +
            schema_path.string() + " --dry-run --out " + log_path.string()) == 0);
  const std::string log = slurp(log_path);
  CHECK(log.find("image_id,subject_id,attribute,old,new") == 0);
  CHECK(log.find("a3,A,Male,0,1") != std::string::npos);
  // Transient attribute never corrected.
  CHECK(log.find("Smiling") == std::string::npos);
  // Annotations untouched and no corrected file produced.
  CHECK(slurp(ann_path) == kAnnotationsCsv);
  CHECK_FALSE(fs::exists(ws.dir / "changes.changes.csv"));
}

TEST_CASE("correct rewrites stable labels to the consolidated value") {
  Workspace ws;
  const auto schema_path = ws.file("schema.json", kSchemaJson);
  const auto ann_path = ws.file("a.csv", kAnnotationsCsv);
  const auto consolidated_path =
      ws.file("cons.csv", "subject_id,Male,Smiling\nA,1,0\nB,0,1\n");
  const auto out_path = ws.dir / "fixed.csv";
  CHECK(run("correct --annotations " + ann_path.string() + " --consolidated " +
            consolidated_path.string() + " --schema " + schema_path.string() + " --out " +
            out_path.string()) == 0);
  CHECK(fs::exists(ws.dir / "fixed.changes.csv"));

  const AttributeSchema schema = load_schema_file(schema_path);
  const Dataset corrected = load_annotations_file(out_path, schema);
  const ImReport report = audit_labels(corrected);
  CHECK(report.at("A", 0).im == 0.0);
  CHECK(report.at("B", 0).im == 0.0);
  // Smiling untouched: subject A still splits 2/1.
  CHECK(report.at("A", 1).im > 0.0);
}

TEST_CASE("synth runs a seeded experiment") {
  Workspace ws;
  const auto config_path = ws.file("exp.json", R"({
    "n_subjects": 20, "images_per_subject": 5, "flip_prob": 0.1,
    "n_attributes": 4, "strategies": ["confidence"], "ks": [1, 3], "seeds": [1]
  })");
  const auto out_path = ws.dir / "exp.csv";
  CHECK(run("synth --config " + config_path.string() + " --seed 9 --out " +
            out_path.string()) == 0);
  const std::string csv = slurp(out_path);
  CHECK(csv.find("# generator=mt19937_64") == 0);
  CHECK(csv.find("confidence,1,9,") != std::string::npos);
  CHECK(csv.find("confidence,3,9,") != std::string::npos);
}

TEST_CASE("quality scores a directory of pgm images") {
  Workspace ws;
  const auto schema_path = ws.file("schema.json", kSchemaJson);
  const auto pred_path = ws.file("p.csv", kPredictionsCsv);
  const fs::path images = ws.dir / "imgs";
  fs::create_directories(images);
  // One distinct image per record; a1..a3, b1..b2.
  for (const auto& [name, blur] :
       std::vector<std::pair<std::string, std::size_t>>{
           {"a1", 0}, {"a2", 1}, {"a3", 2}, {"b1", 0}, {"b2", 3}}) {
    GrayImage img = synth::synthetic_face(32, 7);
    if (blur > 0) {
      img = box_blur(img, blur);
    }
    write_pgm(img, images / (name + ".pgm"));
  }
  const auto out_path = ws.dir / "quality.csv";
  CHECK(run("quality --predictions " + pred_path.string() + " --schema " +
            schema_path.string() + " --images " + images.string() + " --out " +
            out_path.string()) == 0);
  const std::string csv = slurp(out_path);
  CHECK(csv.find("image_id,subject_id,brightness") == 0);
  CHECK(csv.find(",score,rank") != std::string::npos);
  // Sharpest image of subject A leads its group.
  CHECK(csv.find("a1,A") < csv.find("a2,A"));
}

TEST_CASE("reports go to stdout when --out is omitted") {
  Workspace ws;
  const auto schema_path = ws.file("schema.json", kSchemaJson);
  const auto pred_path = ws.file("p.csv", kPredictionsCsv);
  const fs::path stdout_path = ws.dir / "captured.txt";
  const std::string cmd = std::string(ATTRCONS_BIN) + " im --predictions " +
                          pred_path.string() + " --schema " + schema_path.string() + " > " +
                          stdout_path.string() + " 2>/dev/null";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(slurp(stdout_path).find("subject_id,attribute,c_pos,c_neg,ratio,im") == 0);
}
