// Command-line driver. Exit codes: 0 success, 2 unparseable input or
// arguments, 3 pipeline failure (message names the stage).

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mshf/error.hpp"
#include "mshf/evaluation.hpp"
#include "mshf/io.hpp"
#include "mshf/pipeline.hpp"

namespace {

constexpr int kExitParse = 2;
constexpr int kExitPipeline = 3;

// RunConfig keys exposed as --flags; dashes map to underscores.
const std::vector<std::string> kConfigKeys = {
    "kind",         "hypothesis_count", "k_fraction",      "k_absolute",
    "epsilon",      "variant",          "xi",              "proximity_sigma",
    "rng_seed",     "neighbor_overlap", "peak_fallback",   "max_retries_per_hypothesis",
    "ikose_max_iterations", "ikose_tolerance"};

std::string dashed(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::vector<std::string> sets;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "flat key=value config file");
    for (const auto& key : kConfigKeys) {
      std::string flag = "--" + dashed(key);
      if (key == "rng_seed") flag += ",--seed";
      app->add_option(flag, values[key], "override " + key);
    }
    app->add_option("--set", sets, "extra key=value override (repeatable)");
  }

  // Config file first, then flags, then --set entries.
  mshf::RunConfig resolve(mshf::RunConfig cfg) const {
    if (!config_file.empty()) mshf::apply_config_text(mshf::read_text_file(config_file), cfg);
    for (const auto& key : kConfigKeys) {
      const auto it = values.find(key);
      if (it != values.end() && !it->second.empty()) cfg.set(key, it->second);
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw mshf::Error(mshf::ErrorCode::kParseError, "--set expects key=value");
      cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
    return cfg;
  }
};

int report(const char* what, const std::string& message, int code) {
  std::cerr << "mshf: " << what << ": " << message << "\n";
  return code;
}

bool is_parse_code(mshf::ErrorCode code) {
  return code == mshf::ErrorCode::kParseError || code == mshf::ErrorCode::kUnknownTemplate ||
         code == mshf::ErrorCode::kLengthMismatch;
}

struct GenerateArgs {
  std::string scene;
  std::uint64_t seed = 0;
  std::string out;
  std::optional<double> sigma;
  std::optional<std::size_t> inliers;
  std::optional<std::size_t> outliers;
};

int run_generate(const GenerateArgs& args) {
  mshf::SceneSpec spec = mshf::parse_scene_spec(args.scene);
  spec.inlier_sigma = args.sigma;
  spec.inliers_per_structure = args.inliers;
  spec.outliers = args.outliers;
  const mshf::SyntheticScene scene = mshf::generate_scene(spec, args.seed);
  const std::string text = mshf::format_point_file(
      {scene.kind, scene.data},
      {"scene=" + spec.name(), "seed=" + std::to_string(args.seed),
       "inlier_sigma=" + mshf::format_double(scene.inlier_sigma),
       "outliers=" + std::to_string(scene.outlier_count)});
  mshf::write_file_atomic(args.out, text);
  return 0;
}

struct FitArgs {
  std::string input;
  std::string prefix;
  bool correspondences = false;
  ConfigFlags flags;
};

int run_fit(const FitArgs& args) {
  mshf::RunConfig cfg;
  mshf::DataSet data;
  if (args.correspondences) {
    data = mshf::parse_correspondences(mshf::read_text_file(args.input));
    cfg.kind = mshf::ModelKind::kFundamental;
  } else {
    mshf::PointFile file = mshf::read_point_file(args.input);
    cfg.kind = file.kind;
    data = std::move(file.data);
  }
  cfg = args.flags.resolve(cfg);
  if (data.dim() != mshf::observation_dim(cfg.kind)) {
    throw mshf::Error(mshf::ErrorCode::kParseError,
                      "kind " + std::string(mshf::to_string(cfg.kind)) + " needs " +
                          std::to_string(mshf::observation_dim(cfg.kind)) + "-dimensional rows");
  }

  mshf::FitResult result;
  try {
    result = mshf::fit(data, cfg);
  } catch (const mshf::Error& e) {
    return report("pipeline error", e.what(), kExitPipeline);
  }
  const auto prov = mshf::provenance(result, args.input);
  mshf::write_file_atomic(args.prefix + ".labels", mshf::format_labels(result.labels, prov));
  mshf::write_file_atomic(args.prefix + ".modes.json", mshf::modes_to_json(result, prov));
  mshf::write_file_atomic(args.prefix + ".decision.csv", mshf::decision_graph_to_csv(result, prov));
  std::cout << result.modes.size() << " modes\n";
  return 0;
}

int run_eval(const std::string& labels_path, const std::string& truth_path) {
  const auto estimated = mshf::read_labels(labels_path);
  const auto truth = mshf::read_labels(truth_path);
  const double error = mshf::fitting_error(estimated, truth);
  std::printf("%.2f\n", error);
  return 0;
}

int run_plot(const std::string& csv, const std::string& svg) {
  const auto rows = mshf::parse_decision_csv(mshf::read_text_file(csv));
  mshf::write_file_atomic(svg, mshf::render_decision_graph_svg(rows));
  return 0;
}

struct TrialsArgs {
  std::string scene;
  std::size_t trials = 20;
  std::uint64_t base_seed = 0;
  std::string json;
  ConfigFlags flags;
};

int run_trials_cmd(const TrialsArgs& args) {
  const mshf::SceneSpec spec = mshf::parse_scene_spec(args.scene);
  mshf::RunConfig cfg;
  cfg.kind = mshf::scene_kind(spec);
  cfg = args.flags.resolve(cfg);
  mshf::TrialReport rep;
  try {
    rep = mshf::run_trials(spec, cfg, args.trials, args.base_seed);
  } catch (const mshf::Error& e) {
    if (is_parse_code(e.code())) throw;
    return report("pipeline error", e.what(), kExitPipeline);
  }
  std::cout << mshf::report_to_text(rep);
  if (!args.json.empty()) mshf::write_file_atomic(args.json, mshf::report_to_json(rep));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-structure robust model fitting by mode seeking on hypergraphs"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "write a synthetic scene as a labeled point file");
  generate->add_option("scene", gen.scene, "template, e.g. 3-lines-3d, 5-circles, unbalanced-3-lines:8")
      ->required();
  generate->add_option("--seed", gen.seed, "scene seed");
  generate->add_option("-o,--out", gen.out, "output point file")->required();
  generate->add_option("--sigma", gen.sigma, "inlier noise scale");
  generate->add_option("--inliers", gen.inliers, "inliers per structure");
  generate->add_option("--outliers", gen.outliers, "outlier count");

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "fit a point file; writes PREFIX.labels, PREFIX.modes.json, PREFIX.decision.csv");
  fit->add_option("input", fit_args.input, "point file")->required();
  fit->add_option("-o,--out-prefix", fit_args.prefix, "output prefix")->required();
  fit->add_flag("--correspondences", fit_args.correspondences,
                "input is an AdelaideRMF-style correspondence table");
  fit_args.flags.attach(fit);

  std::string labels_path, truth_path;
  auto* eval = app.add_subcommand("eval", "print the mislabeling percentage");
  eval->add_option("labels", labels_path, "estimated labels")->required();
  eval->add_option("truth", truth_path, "true labels, or a labeled point file")->required();

  std::string csv_path, svg_path;
  auto* plot = app.add_subcommand("plot-decision-graph", "render a decision-graph CSV as SVG");
  plot->add_option("csv", csv_path, "decision graph CSV")->required();
  plot->add_option("svg", svg_path, "output SVG")->required();

  TrialsArgs trial_args;
  auto* trials = app.add_subcommand("trials", "repeat generate+fit over consecutive seeds and summarize");
  trials->add_option("scene", trial_args.scene, "template name")->required();
  trials->add_option("-n,--trials", trial_args.trials, "number of trials")->check(CLI::PositiveNumber);
  trials->add_option("--base-seed", trial_args.base_seed, "first seed");
  trials->add_option("--json", trial_args.json, "write the full report as JSON");
  trial_args.flags.attach(trials);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*fit) return run_fit(fit_args);
    if (*eval) return run_eval(labels_path, truth_path);
    if (*plot) return run_plot(csv_path, svg_path);
    if (*trials) return run_trials_cmd(trial_args);
  } catch (const mshf::Error& e) {
    if (is_parse_code(e.code())) return report("parse error", e.what(), kExitParse);
    return report("error", e.what(), kExitPipeline);
  }
  return 0;
}
