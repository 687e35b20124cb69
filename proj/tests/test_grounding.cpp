#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "pc/errors.hpp"
#include "pc/grounding.hpp"

using namespace pc;

namespace {

ImageRecord demo_image() {
  ImageRecord img;
  img.image_id = "img1";
  img.width = 640;
  img.height = 480;
  img.attributes = {{"red", "bird"}, {"red", "beak"}, {"black", "face"}};
  return img;
}

std::map<std::string, ImageRecord> demo_images() {
  std::map<std::string, ImageRecord> m;
  m["img1"] = demo_image();
  return m;
}

}  // namespace

TEST_CASE("file grounder replays its rows exactly") {
  const auto path = std::filesystem::temp_directory_path() / "pc_groundings.jsonl";
  const auto phrase = testutil::make_phrase("red", "beak");
  Grounding g;
  g.phrase = phrase;
  g.box = {1.0, 2.0, 30.0, 40.0};
  g.score = 0.9;
  g.features = {0.25, -0.5, 0.125, 1.0};
  save_groundings(path.string(), {{"img1", g}});

  auto grounder = FileGrounder::load(path.string());
  CHECK(grounder->feature_dim() == 4);
  const Grounding got = grounder->ground("img1", phrase);
  CHECK(got == g);

  const auto missing = testutil::make_phrase("blue", "wing");
  CHECK_THROWS_AS(grounder->ground("img1", missing), MissingGroundingError);

  // two loads agree
  auto again = FileGrounder::load(path.string());
  CHECK(again->ground("img1", phrase) == got);
  std::filesystem::remove(path);
}

TEST_CASE("file grounder write-then-load round trip is bit exact") {
  const auto path = std::filesystem::temp_directory_path() / "pc_groundings_rt.jsonl";
  Rng rng(31);
  std::vector<std::pair<std::string, Grounding>> rows;
  for (int i = 0; i < 20; ++i) {
    auto phrase = testutil::make_phrase("red", "noun" + std::to_string(i));
    rows.emplace_back("img" + std::to_string(i % 3),
                      testutil::random_grounding(phrase, 8, rng));
  }
  save_groundings(path.string(), rows);
  auto grounder = FileGrounder::load(path.string());
  for (const auto& [id, g] : rows) CHECK(grounder->ground(id, g.phrase) == g);
  std::filesystem::remove(path);
}

TEST_CASE("file grounder parse errors carry the line number") {
  const auto path = std::filesystem::temp_directory_path() / "pc_groundings_bad.jsonl";
  {
    std::ofstream out(path);
    out << R"({"image_id":"a","phrase":"red beak","box":[0,0,1,1],"score":0.5,"features":[1.0]})"
        << "\n";
    out << "not json\n";
  }
  CHECK_THROWS_WITH_AS(FileGrounder::load(path.string()), doctest::Contains(":2:"),
                       FormatError);

  {
    std::ofstream out(path);
    out << R"({"image_id":"a","phrase":"red beak","box":[0,0,1,1],"score":0.5,"features":[1.0]})"
        << "\n";
    out << R"({"image_id":"a","phrase":"red wing","box":[0,0,1,1],"score":0.5,"features":[1.0,2.0]})"
        << "\n";
  }
  CHECK_THROWS_WITH_AS(FileGrounder::load(path.string()),
                       doctest::Contains("feature dimension"), FormatError);
  std::filesystem::remove(path);
}

TEST_CASE("synthetic grounder scores matched and mismatched phrases") {
  SyntheticGrounderConfig config;
  config.feature_dim = 8;
  config.sigma = 0.0;
  SyntheticGrounder grounder(demo_images(), config);

  const auto matched = grounder.ground("img1", testutil::make_phrase("red", "beak"));
  CHECK(matched.score == 0.8);
  const auto missed = grounder.ground("img1", testutil::make_phrase("black", "beak"));
  CHECK(missed.score == 0.2);

  // determinism: bit-identical on repeat
  CHECK(grounder.ground("img1", testutil::make_phrase("red", "beak")) == matched);

  // unit-norm features
  double norm_sq = 0.0;
  for (double v : matched.features) norm_sq += v * v;
  CHECK(norm_sq == doctest::Approx(1.0).epsilon(1e-12));

  // box inside the image
  CHECK(matched.box.x >= 0.0);
  CHECK(matched.box.y >= 0.0);
  CHECK(matched.box.w > 0.0);
  CHECK(matched.box.h > 0.0);
  CHECK(matched.box.x + matched.box.w <= 640.0);
  CHECK(matched.box.y + matched.box.h <= 480.0);
}

TEST_CASE("synthetic grounder separability under noise") {
  SyntheticGrounderConfig config;
  config.feature_dim = 4;
  config.sigma = 0.25;  // < (0.8 - 0.2) / 2
  SyntheticGrounder grounder(demo_images(), config);
  static const std::vector<std::string> nouns = {"beak", "face", "bird", "wing", "tail"};
  static const std::vector<std::string> attrs = {"red", "black", "white", "long"};
  for (const auto& noun : nouns) {
    for (const auto& attr : attrs) {
      const auto g = grounder.ground("img1", testutil::make_phrase(attr, noun));
      const bool matched = demo_image().has_attribute(attr, noun);
      if (matched)
        CHECK(g.score > 0.5);
      else
        CHECK(g.score < 0.5);
    }
  }
}

TEST_CASE("grounder determinism probe") {
  SyntheticGrounderConfig config;
  SyntheticGrounder grounder(demo_images(), config);
  Rng rng(8);
  static const std::vector<std::string> attrs = {"red", "black", "white", "long", "big"};
  static const std::vector<std::string> nouns = {"beak", "face", "bird", "wing", "eye"};
  for (int k = 0; k < 1000; ++k) {
    const auto phrase = testutil::make_phrase(attrs[rng.below(attrs.size())],
                                              nouns[rng.below(nouns.size())]);
    CHECK(grounder.ground("img1", phrase) == grounder.ground("img1", phrase));
  }
}

TEST_CASE("ground_all preserves order and names failures") {
  SyntheticGrounderConfig config;
  SyntheticGrounder grounder(demo_images(), config);
  std::vector<AttributePhrase> phrases = {
      testutil::make_phrase("red", "bird", AttrCategory::Color, 0),
      testutil::make_phrase("red", "beak", AttrCategory::Color, 2),
      testutil::make_phrase("black", "face", AttrCategory::Color, 4),
  };
  const auto groundings = ground_all(grounder, "img1", phrases);
  REQUIRE(groundings.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(groundings[i].phrase == phrases[i]);
    CHECK(groundings[i].score == 0.8);  // all three are true attributes
  }

  CHECK_THROWS_AS(ground_all(grounder, "img1", {}), std::invalid_argument);
  CHECK_THROWS_WITH_AS(ground_all(grounder, "nope", phrases),
                       doctest::Contains("unknown image"), MissingGroundingError);
}
