#include "mshf/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mshf/error.hpp"

namespace mshf {
namespace {

[[noreturn]] void parse_fail(const std::string& message) {
  throw Error(ErrorCode::kParseError, message);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Non-comment, non-blank lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string_view>> content_lines(std::string_view text) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    ++line_no;
    const std::string_view line = trim(text.substr(pos, end - pos));
    if (!line.empty() && line.front() != '#') out.emplace_back(line_no, line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

// Fields separated by whitespace and/or a single comma.
std::vector<std::string_view> split_fields(std::string_view line, std::size_t line_no) {
  std::vector<std::string_view> fields;
  bool pending_comma = false;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else if (c == ',') {
      if (pending_comma || fields.empty()) parse_fail("line " + std::to_string(line_no) + ": empty field");
      pending_comma = true;
      ++i;
    } else {
      const std::size_t start = i;
      while (i < line.size() && line[i] != ',' && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
      fields.push_back(line.substr(start, i - start));
      pending_comma = false;
    }
  }
  if (pending_comma) parse_fail("line " + std::to_string(line_no) + ": trailing comma");
  return fields;
}

double parse_real(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    parse_fail("line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

int parse_label(std::string_view s, std::size_t line_no) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v < 0) {
    parse_fail("line " + std::to_string(line_no) + ": bad label '" + std::string(s) + "'");
  }
  return v;
}

DataSet make_dataset(int dim, std::vector<double> coords, std::vector<int> labels) {
  try {
    return DataSet(dim, std::move(coords), std::move(labels));
  } catch (const Error& e) {
    parse_fail(e.what());
  }
}

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string comment_block(const std::vector<std::pair<std::string, std::string>>& provenance) {
  std::string out;
  for (const auto& [key, value] : provenance) out += "# " + key + "=" + value + "\n";
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parse_fail("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::kInvalidArgument, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::kInvalidArgument, "cannot rename onto '" + path + "': " + ec.message());
  }
}

PointFile parse_point_file(const std::string& text) {
  const auto lines = content_lines(text);
  if (lines.empty()) parse_fail("point file is empty");

  std::optional<ModelKind> kind;
  std::optional<int> dim;
  std::optional<bool> labeled;
  {
    const auto [line_no, header] = lines.front();
    for (std::string_view field : split_fields(header, line_no)) {
      const auto eq = field.find('=');
      if (eq == std::string_view::npos) parse_fail("header field '" + std::string(field) + "' lacks '='");
      const std::string_view key = field.substr(0, eq);
      const std::string_view value = field.substr(eq + 1);
      if (key == "kind") {
        kind = parse_model_kind(value);
      } else if (key == "dim") {
        dim = parse_label(value, line_no);
      } else if (key == "labels") {
        if (value != "0" && value != "1") parse_fail("labels must be 0 or 1");
        labeled = value == "1";
      } else {
        parse_fail("unknown header field '" + std::string(key) + "'");
      }
    }
  }
  if (!kind || !dim || !labeled) parse_fail("header must give kind, dim and labels");
  if (*dim != observation_dim(*kind)) {
    parse_fail("dim=" + std::to_string(*dim) + " does not match kind " + std::string(to_string(*kind)));
  }

  const std::size_t arity = static_cast<std::size_t>(*dim) + (*labeled ? 1 : 0);
  std::vector<double> coords;
  std::vector<int> labels;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto [line_no, line] = lines[k];
    const auto fields = split_fields(line, line_no);
    if (fields.size() != arity) {
      parse_fail("line " + std::to_string(line_no) + ": expected " + std::to_string(arity) +
                 " fields, got " + std::to_string(fields.size()));
    }
    for (int d = 0; d < *dim; ++d) coords.push_back(parse_real(fields[d], line_no));
    if (*labeled) labels.push_back(parse_label(fields.back(), line_no));
  }
  if (coords.empty()) parse_fail("point file has no observations");
  return {*kind, make_dataset(*dim, std::move(coords), std::move(labels))};
}

PointFile read_point_file(const std::string& path) { return parse_point_file(read_text_file(path)); }

std::string format_point_file(const PointFile& file, const std::vector<std::string>& comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  const DataSet& data = file.data;
  out += "kind=" + std::string(to_string(file.kind)) + " dim=" + std::to_string(data.dim()) +
         " labels=" + (data.has_labels() ? "1" : "0") + "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Observation obs = data[i];
    for (std::size_t d = 0; d < obs.size(); ++d) {
      if (d > 0) out += ' ';
      out += format_double(obs[d]);
    }
    if (data.has_labels()) out += ' ' + std::to_string(data.labels()[i]);
    out += '\n';
  }
  return out;
}

DataSet parse_correspondences(const std::string& text) {
  const auto lines = content_lines(text);
  if (lines.empty()) parse_fail("correspondence file is empty");
  std::optional<std::size_t> arity;
  std::vector<double> coords;
  std::vector<int> labels;
  for (const auto& [line_no, line] : lines) {
    const auto fields = split_fields(line, line_no);
    if (!arity) {
      arity = fields.size();
      if (*arity < 4 || *arity > 7) {
        parse_fail("line " + std::to_string(line_no) + ": expected 4 to 7 columns");
      }
    } else if (fields.size() != *arity) {
      parse_fail("line " + std::to_string(line_no) + ": inconsistent column count");
    }
    std::vector<double> v;
    const bool homogeneous = *arity >= 6;
    const std::size_t ncoords = homogeneous ? 6 : 4;
    for (std::size_t c = 0; c < ncoords; ++c) v.push_back(parse_real(fields[c], line_no));
    if (homogeneous) {
      if (v[2] == 0.0 || v[5] == 0.0) parse_fail("line " + std::to_string(line_no) + ": point at infinity");
      coords.insert(coords.end(), {v[0] / v[2], v[1] / v[2], v[3] / v[5], v[4] / v[5]});
    } else {
      coords.insert(coords.end(), v.begin(), v.end());
    }
    if (fields.size() > ncoords) labels.push_back(parse_label(fields[ncoords], line_no));
  }
  return make_dataset(4, std::move(coords), std::move(labels));
}

std::vector<int> parse_labels(const std::string& text) {
  const auto lines = content_lines(text);
  if (lines.empty()) parse_fail("label file is empty");
  if (lines.front().second.find('=') != std::string_view::npos) {
    const PointFile file = parse_point_file(text);
    if (!file.data.has_labels()) parse_fail("point file carries no labels");
    return file.data.labels();
  }
  std::vector<int> labels;
  labels.reserve(lines.size());
  for (const auto& [line_no, line] : lines) labels.push_back(parse_label(line, line_no));
  return labels;
}

std::vector<int> read_labels(const std::string& path) { return parse_labels(read_text_file(path)); }

std::string format_labels(const std::vector<int>& labels,
                          const std::vector<std::pair<std::string, std::string>>& provenance) {
  std::string out = comment_block(provenance);
  for (int l : labels) out += std::to_string(l) + "\n";
  return out;
}

void apply_config_text(const std::string& text, RunConfig& cfg) {
  for (const auto& [line_no, line] : content_lines(text)) {
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      parse_fail("config line " + std::to_string(line_no) + ": expected key=value");
    }
    cfg.set(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
  }
}

std::vector<std::pair<std::string, std::string>> provenance(const FitResult& result,
                                                             const std::string& input) {
  auto out = result.config.materialized();
  out.emplace_back("input", input);
  return out;
}

std::string modes_to_json(const FitResult& result,
                          const std::vector<std::pair<std::string, std::string>>& provenance) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json config;
  for (const auto& [key, value] : provenance) config[key] = value;
  j["config"] = config;
  j["proximity_sigma"] = result.proximity_sigma;
  j["skipped_draws"] = result.skipped_draws;
  j["vertex_count"] = result.vertex_count;
  j["retained_count"] = result.retained_count;
  j["reduction_vacuous"] = result.reduction_vacuous;
  j["selection_degenerate"] = result.selection.degenerate;
  nlohmann::ordered_json modes = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < result.modes.size(); ++k) {
    const Mode& m = result.modes[k];
    modes.push_back({{"label", k + 1},
                     {"hypothesis_index", m.hypothesis_index},
                     {"kind", std::string(to_string(m.params.kind))},
                     {"params", m.params.values},
                     {"scale", m.scale},
                     {"weight", m.weight},
                     {"mtd", m.mtd},
                     {"inliers", m.inliers}});
  }
  j["modes"] = modes;
  return j.dump(2) + "\n";
}

std::string decision_graph_to_csv(const FitResult& result,
                                  const std::vector<std::pair<std::string, std::string>>& provenance) {
  std::string out = comment_block(provenance);
  out += "vertex_index,weight,mtd,retained,mode\n";
  for (const DecisionGraphRow& row : result.decision_graph) {
    out += std::to_string(row.hypothesis_index) + "," + format_double(row.weight) + "," +
           (row.mtd ? format_double(*row.mtd) : std::string()) + "," + (row.retained ? "1" : "0") +
           "," + (row.mode ? "1" : "0") + "\n";
  }
  return out;
}

std::vector<DecisionCsvRow> parse_decision_csv(const std::string& text) {
  const auto lines = content_lines(text);
  if (lines.empty() || lines.front().second != "vertex_index,weight,mtd,retained,mode") {
    parse_fail("decision graph CSV must start with the vertex_index,weight,mtd,retained,mode header");
  }
  std::vector<DecisionCsvRow> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto [line_no, line] = lines[k];
    std::vector<std::string_view> cells;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      cells.push_back(trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos)));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (cells.size() != 5) parse_fail("line " + std::to_string(line_no) + ": expected 5 cells");
    DecisionCsvRow row;
    row.vertex_index = static_cast<std::size_t>(parse_label(cells[0], line_no));
    row.weight = parse_real(cells[1], line_no);
    if (!cells[2].empty()) row.mtd = parse_real(cells[2], line_no);
    auto flag = [&](std::string_view c) {
      if (c != "0" && c != "1") parse_fail("line " + std::to_string(line_no) + ": flag must be 0 or 1");
      return c == "1";
    };
    row.retained = flag(cells[3]);
    row.mode = flag(cells[4]);
    if (row.retained != row.mtd.has_value()) {
      parse_fail("line " + std::to_string(line_no) + ": mtd must be present exactly for retained rows");
    }
    if (row.mode && !row.retained) parse_fail("line " + std::to_string(line_no) + ": mode must be retained");
    rows.push_back(row);
  }
  if (rows.empty()) parse_fail("decision graph CSV has no rows");
  return rows;
}

std::string render_decision_graph_svg(const std::vector<DecisionCsvRow>& rows) {
  constexpr double kWidth = 640, kHeight = 420;
  constexpr double kLeft = 60, kRight = 20, kTop = 30, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  std::vector<const DecisionCsvRow*> shown;
  for (const auto& r : rows) {
    if (r.retained) shown.push_back(&r);
  }
  std::stable_sort(shown.begin(), shown.end(),
                   [](const DecisionCsvRow* a, const DecisionCsvRow* b) { return a->weight < b->weight; });

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\">\n";
  svg += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
         "Decision graph</text>\n";
  // Axes with ticks at 0, 0.5 and 1 on the distance axis.
  svg += "<line x1=\"" + fixed(kLeft, 1) + "\" y1=\"" + fixed(kTop + plot_h, 1) + "\" x2=\"" +
         fixed(kLeft + plot_w, 1) + "\" y2=\"" + fixed(kTop + plot_h, 1) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fixed(kLeft, 1) + "\" y1=\"" + fixed(kTop, 1) + "\" x2=\"" + fixed(kLeft, 1) +
         "\" y2=\"" + fixed(kTop + plot_h, 1) + "\" stroke=\"black\"/>\n";
  for (double t : {0.0, 0.5, 1.0}) {
    const double y = kTop + plot_h * (1.0 - t);
    svg += "<text x=\"" + fixed(kLeft - 8, 1) + "\" y=\"" + fixed(y + 4, 1) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + fixed(t, 1) + "</text>\n";
  }
  svg += "<text x=\"" + fixed(kLeft + plot_w / 2, 1) + "\" y=\"" + fixed(kHeight - 12, 1) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">weight rank (" +
         std::to_string(shown.size()) + " retained vertices)</text>\n";
  svg += "<text x=\"16\" y=\"" + fixed(kTop + plot_h / 2, 1) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " +
         fixed(kTop + plot_h / 2, 1) + ")\">minimum T-distance</text>\n";

  const double denom = shown.size() > 1 ? static_cast<double>(shown.size() - 1) : 1.0;
  std::string modes;
  for (std::size_t k = 0; k < shown.size(); ++k) {
    const double x = kLeft + plot_w * (shown.size() > 1 ? static_cast<double>(k) / denom : 0.5);
    const double mtd = std::clamp(*shown[k]->mtd, 0.0, 1.0);
    const double y = kTop + plot_h * (1.0 - mtd);
    if (shown[k]->mode) {
      modes += "<circle class=\"mode\" cx=\"" + fixed(x, 2) + "\" cy=\"" + fixed(y, 2) +
               "\" r=\"5\" fill=\"red\" stroke=\"black\"><title>vertex " +
               escape_xml(std::to_string(shown[k]->vertex_index)) + "</title></circle>\n";
    } else {
      svg += "<circle cx=\"" + fixed(x, 2) + "\" cy=\"" + fixed(y, 2) + "\" r=\"2\" fill=\"steelblue\"/>\n";
    }
  }
  svg += modes;  // drawn last so modes stay visible
  svg += "</svg>\n";
  return svg;
}

}  // namespace mshf
