#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mshf/dataset.hpp"
#include "mshf/pipeline.hpp"

namespace mshf {

// Point file grammar:
//
//   file    := { comment | blank } header { comment | blank | row }
//   header  := "kind=" KIND ws "dim=" INT ws "labels=" ("0" | "1")
//   row     := REAL { sep REAL } [ sep INT ]      ; dim reals, plus a label if labels=1
//   sep     := whitespace and/or a single comma
//   comment := "#" ...
//
// Header fields may appear in any order; dim must equal the kind's
// observation dimension. Labels are nonnegative, 0 marks an outlier.
struct PointFile {
  ModelKind kind = ModelKind::kLine2D;
  DataSet data;
};

PointFile parse_point_file(const std::string& text);
PointFile read_point_file(const std::string& path);

// `comments` are emitted as "# " lines before the header.
std::string format_point_file(const PointFile& file, const std::vector<std::string>& comments = {});

// AdelaideRMF-style correspondences, one per row: "x1 y1 x2 y2 [label]" or
// homogeneous "x1 y1 w1 x2 y2 w2 [label]". Homogeneous rows are dehomogenized.
// All rows must share one layout.
DataSet parse_correspondences(const std::string& text);

// One integer per non-comment line. A point file with labels=1 is accepted
// too, in which case its label column is returned.
std::vector<int> parse_labels(const std::string& text);
std::vector<int> read_labels(const std::string& path);
std::string format_labels(const std::vector<int>& labels,
                          const std::vector<std::pair<std::string, std::string>>& provenance);

// Flat "key = value" lines with "#" comments, applied through RunConfig::set.
void apply_config_text(const std::string& text, RunConfig& cfg);

// Provenance pairs echoed into every result file: the materialized config
// followed by the input path.
std::vector<std::pair<std::string, std::string>> provenance(const FitResult& result,
                                                             const std::string& input);

std::string modes_to_json(const FitResult& result,
                          const std::vector<std::pair<std::string, std::string>>& provenance);

// Columns vertex_index,weight,mtd,retained,mode. vertex_index is the
// hypothesis index; mtd is empty for vertices removed by reduction.
std::string decision_graph_to_csv(const FitResult& result,
                                  const std::vector<std::pair<std::string, std::string>>& provenance);

struct DecisionCsvRow {
  std::size_t vertex_index = 0;
  double weight = 0.0;
  std::optional<double> mtd;
  bool retained = false;
  bool mode = false;
};

// Throws Error(kParseError) on malformed input or when there are no rows.
std::vector<DecisionCsvRow> parse_decision_csv(const std::string& text);

// Scatter of minimum T-distance against weight rank for retained vertices,
// modes drawn as larger red markers. Output depends only on the rows.
std::string render_decision_graph_svg(const std::vector<DecisionCsvRow>& rows);

std::string read_text_file(const std::string& path);

// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

std::string format_double(double v);

}  // namespace mshf
