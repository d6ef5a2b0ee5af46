#include <doctest.h>

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "mshf/error.hpp"
#include "mshf/evaluation.hpp"
#include "mshf/io.hpp"

namespace {

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

mshf::ErrorCode parse_code(const std::string& text) {
  try {
    mshf::parse_point_file(text);
  } catch (const mshf::Error& e) {
    return e.code();
  }
  return mshf::ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("point files: grammar") {
  const auto file = mshf::parse_point_file(
      "# comment\n"
      "\n"
      "labels=1 kind=line2d dim=2\n"
      "1.5, -2 3\n"
      "  # interleaved comment\n"
      "4e1 5 0\n");
  CHECK(file.kind == mshf::ModelKind::kLine2D);
  CHECK(file.data.size() == 2);
  CHECK(file.data.coords() == std::vector<double>{1.5, -2, 40, 5});
  CHECK(file.data.labels() == std::vector<int>{3, 0});

  const auto unlabeled = mshf::parse_point_file("kind=line3d dim=3 labels=0\n1 2 3\n");
  CHECK(!unlabeled.data.has_labels());
}

TEST_CASE("point files: malformed input is a parse error") {
  for (const char* bad : {"", "# only a comment\n", "kind=line2d dim=2\n1 2\n", "kind=line2d dim=3 labels=0\n1 2 3\n",
                          "kind=line2d dim=2 labels=0\n1 2 3\n", "kind=line2d dim=2 labels=1\n1 2 -1\n",
                          "kind=line2d dim=2 labels=0\n1 x\n", "kind=plane dim=2 labels=0\n1 2\n",
                          "kind=line2d dim=2 labels=0\n", "kind=line2d dim=2 labels=2\n1 2\n"}) {
    CAPTURE(bad);
    CHECK(parse_code(bad) == mshf::ErrorCode::kParseError);
  }
}

TEST_CASE("point files round-trip exactly") {
  for (const auto& name : mshf::standard_templates()) {
    const auto scene = mshf::generate_scene(mshf::parse_scene_spec(name), 3);
    const mshf::PointFile file{scene.kind, scene.data};
    const std::string text = mshf::format_point_file(file, {"scene=" + name});
    const auto back = mshf::parse_point_file(text);
    CHECK(back.kind == scene.kind);
    CHECK(back.data.coords() == scene.data.coords());
    CHECK(back.data.labels() == scene.data.labels());
    CHECK(mshf::format_point_file(back, {"scene=" + name}) == text);
  }
}

TEST_CASE("correspondence files") {
  const auto plain = mshf::parse_correspondences("1 2 3 4 1\n5 6 7 8 0\n");
  CHECK(plain.dim() == 4);
  CHECK(plain.coords() == std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
  CHECK(plain.labels() == std::vector<int>{1, 0});

  const auto homogeneous = mshf::parse_correspondences("2 4 2 9 3 3 2\n1 1 1 1 1 1 0\n");
  CHECK(homogeneous.coords() == std::vector<double>{1, 2, 3, 1, 1, 1, 1, 1});
  CHECK(homogeneous.labels() == std::vector<int>{2, 0});

  const auto unlabeled = mshf::parse_correspondences("0.25 0.5 100.125 -3\n");
  CHECK(!unlabeled.has_labels());
  CHECK(unlabeled.coords() == std::vector<double>{0.25, 0.5, 100.125, -3});

  CHECK_THROWS_AS(mshf::parse_correspondences("1 2 3\n"), mshf::Error);
  CHECK_THROWS_AS(mshf::parse_correspondences("1 2 3 4\n1 2 3 4 5\n"), mshf::Error);
  CHECK_THROWS_AS(mshf::parse_correspondences("1 2 0 3 4 1\n"), mshf::Error);
}

TEST_CASE("label files") {
  CHECK(mshf::parse_labels("# run\n0\n2\n1\n") == std::vector<int>{0, 2, 1});
  CHECK(mshf::parse_labels("kind=line2d dim=2 labels=1\n0 0 4\n1 1 0\n") == std::vector<int>{4, 0});
  CHECK_THROWS_AS(mshf::parse_labels(""), mshf::Error);
  CHECK_THROWS_AS(mshf::parse_labels("kind=line2d dim=2 labels=0\n0 0\n"), mshf::Error);
  CHECK_THROWS_AS(mshf::parse_labels("1\n-2\n"), mshf::Error);

  const std::string text = mshf::format_labels({0, 3, 1}, {{"seed", "5"}});
  CHECK(text.find("seed") != std::string::npos);
  CHECK(mshf::parse_labels(text) == std::vector<int>{0, 3, 1});
}

TEST_CASE("config text") {
  mshf::RunConfig cfg;
  mshf::apply_config_text("# tuned\nvariant = mshf1\n\nepsilon=0.7\n", cfg);
  CHECK(cfg.variant == mshf::Variant::kMSHF1);
  CHECK(cfg.epsilon == 0.7);
  CHECK_THROWS_AS(mshf::apply_config_text("variant mshf1\n", cfg), mshf::Error);
  CHECK_THROWS_AS(mshf::apply_config_text("nonsense = 1\n", cfg), mshf::Error);
}

TEST_CASE("result files carry provenance and round-trip") {
  const auto scene = mshf::generate_scene(mshf::parse_scene_spec("3-lines-2d"), 1);
  mshf::RunConfig cfg;
  cfg.kind = scene.kind;
  cfg.hypothesis_count = 800;
  cfg.rng_seed = 12;
  const auto result = mshf::fit(scene.data, cfg);
  const auto prov = mshf::provenance(result, "in.txt");
  CHECK(prov.back() == std::pair<std::string, std::string>{"input", "in.txt"});

  const auto json = nlohmann::json::parse(mshf::modes_to_json(result, prov));
  CHECK(json["config"]["rng_seed"] == "12");
  CHECK(json["config"]["input"] == "in.txt");
  CHECK(json["modes"].size() == result.modes.size());
  CHECK(json["modes"][0]["inliers"].size() == result.modes[0].inliers.size());

  const std::string csv = mshf::decision_graph_to_csv(result, prov);
  CHECK(csv.find("# rng_seed") != std::string::npos);
  const auto rows = mshf::parse_decision_csv(csv);
  REQUIRE(rows.size() == result.decision_graph.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].vertex_index == result.decision_graph[i].hypothesis_index);
    CHECK(rows[i].weight == result.decision_graph[i].weight);
    CHECK(rows[i].mtd == result.decision_graph[i].mtd);
    CHECK(rows[i].mode == result.decision_graph[i].mode);
  }

  const std::string svg = mshf::render_decision_graph_svg(rows);
  CHECK(svg == mshf::render_decision_graph_svg(rows));
  CHECK(count_of(svg, "class=\"mode\"") == result.modes.size());
}

TEST_CASE("decision CSV rejects malformed input") {
  const std::string header = "vertex_index,weight,mtd,retained,mode\n";
  for (const std::string bad : {std::string(), header, header + "1,0.5,,1,0\n", header + "1,0.5,0.2,0,0\n",
                                header + "1,0.5,,0,1\n", header + "1,0.5\n", std::string("a,b,c,d,e\n1,2,3,1,1\n")}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(mshf::parse_decision_csv(bad), mshf::Error);
  }
}

TEST_CASE("atomic writes and shortest round-trip doubles") {
  const auto dir = std::filesystem::temp_directory_path() / "mshf_test_io";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "out.txt").string();
  mshf::write_file_atomic(path, "first\n");
  mshf::write_file_atomic(path, "second\n");
  CHECK(mshf::read_text_file(path) == "second\n");
  CHECK(!std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(mshf::read_text_file((dir / "missing").string()), mshf::Error);

  CHECK(mshf::format_double(0.1) == "0.1");
  CHECK(mshf::format_double(-2.0) == "-2");
  const double third = 1.0 / 3.0;
  CHECK(std::stod(mshf::format_double(third)) == third);
}
