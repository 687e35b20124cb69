#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "helpers.hpp"
#include "pc/dataset.hpp"
#include "pc/errors.hpp"

using namespace pc;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / "pc_dataset_test") {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("images round trip") {
  TempDir dir;
  std::vector<ImageRecord> images(2);
  images[0].image_id = "a";
  images[0].width = 640;
  images[0].height = 480;
  images[0].attributes = {{"red", "beak"}, {"long", "neck"}};
  images[1].image_id = "b";
  images[1].width = 320;
  images[1].height = 240;
  save_images(dir.file("images.jsonl"), images);
  CHECK(load_images(dir.file("images.jsonl")) == images);
}

TEST_CASE("candidates round trip and validation") {
  TempDir dir;
  std::vector<ExplanationCandidate> candidates;
  ExplanationCandidate c;
  c.image_id = "a";
  c.sentence = "this bird has a red beak.";
  c.log_prob = -2.5;
  c.candidate_index = 0;
  c.tokens = tokenize(c.sentence);
  candidates.push_back(c);
  save_candidates(dir.file("cands.jsonl"), candidates);
  const auto loaded = load_candidates(dir.file("cands.jsonl"));
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].image_id == c.image_id);
  CHECK(loaded[0].sentence == c.sentence);
  CHECK(loaded[0].log_prob == c.log_prob);
  CHECK(loaded[0].tokens.tokens == c.tokens.tokens);

  {
    std::ofstream out(dir.file("bad.jsonl"));
    out << R"({"image_id":"a","sentence":"x","log_prob":0.5,"candidate_index":0})" << "\n";
  }
  CHECK_THROWS_AS(load_candidates(dir.file("bad.jsonl")), FormatError);

  {
    std::ofstream out(dir.file("bad2.jsonl"));
    out << "{oops\n";
  }
  CHECK_THROWS_WITH_AS(load_candidates(dir.file("bad2.jsonl")), doctest::Contains(":1:"),
                       FormatError);
}

TEST_CASE("load_dataset referential integrity") {
  TempDir dir;
  std::vector<ImageRecord> images(1);
  images[0].image_id = "a";
  images[0].width = 10;
  images[0].height = 10;
  save_images(dir.file("images.jsonl"), images);
  Lexicon::builtin().save(dir.file("lexicon.json"));

  {
    std::ofstream out(dir.file("cands.jsonl"));
    out << R"({"image_id":"zzz","sentence":"a bird.","log_prob":-1.0,"candidate_index":0})"
        << "\n";
  }
  CHECK_THROWS_WITH_AS(
      load_dataset(dir.file("images.jsonl"), dir.file("cands.jsonl"),
                   dir.file("lexicon.json")),
      doctest::Contains("unknown image"), DataError);

  // empty candidates file is a valid dataset
  { std::ofstream out(dir.file("empty.jsonl")); }
  const Dataset ds = load_dataset(dir.file("images.jsonl"), dir.file("empty.jsonl"),
                                  dir.file("lexicon.json"));
  CHECK(ds.candidates.empty());
  CHECK(ds.images.size() == 1);
}

TEST_CASE("ranked records round trip including the -inf sentinel") {
  TempDir dir;
  std::vector<RankedRecord> records(2);
  records[0].image_id = "a";
  records[0].rank = 1;
  records[0].sentence = "this bird has a red beak.";
  records[0].relevance = 1.25;
  records[0].log_prob = -2.0;
  records[0].combined = -0.75;
  records[0].phrases = {{"red beak", {1.0, 2.0, 3.0, 4.0}, 0.8}};
  records[1].image_id = "a";
  records[1].rank = 2;
  records[1].sentence = "this is a bird.";
  records[1].log_prob = -8.0;
  records[1].combined = -std::numeric_limits<double>::infinity();
  save_ranked(dir.file("ranked.jsonl"), records);
  CHECK(load_ranked(dir.file("ranked.jsonl")) == records);
}

TEST_CASE("attribute_relevance") {
  const Lexicon lex = Lexicon::builtin();
  ImageRecord img;
  img.image_id = "a";
  img.width = 10;
  img.height = 10;
  img.attributes = {{"red", "beak"}, {"white", "eye"}};
  CHECK(attribute_relevance("this bird has a red beak and a white eye.", img, lex) == 1.0);
  CHECK(attribute_relevance("this bird has a red beak and a black eye.", img, lex) == 0.5);
  CHECK(attribute_relevance("this is a bird.", img, lex) == 0.0);
}

TEST_CASE("synth-gen is deterministic and self-consistent") {
  SynthConfig config;
  config.seed = 9;
  config.train_images = 4;
  config.test_images = 2;
  config.attributes_per_image = 4;
  config.candidates_per_image = 8;

  const SynthBenchmark a = generate_synth(config);
  const SynthBenchmark b = generate_synth(config);
  CHECK(a.train_images == b.train_images);
  CHECK(a.test_images == b.test_images);
  REQUIRE(a.train_candidates.size() == b.train_candidates.size());
  for (std::size_t i = 0; i < a.train_candidates.size(); ++i) {
    CHECK(a.train_candidates[i].sentence == b.train_candidates[i].sentence);
    CHECK(a.train_candidates[i].log_prob == b.train_candidates[i].log_prob);
  }

  CHECK(a.train_images.size() == 4);
  CHECK(a.test_images.size() == 2);
  CHECK(a.train_candidates.size() == 4 * 8);
  for (const auto& img : a.train_images) {
    CHECK(img.attributes.size() == 4);
    for (const auto& [attr, noun] : img.attributes)
      CHECK(a.lexicon.attribute_category(attr).has_value());
  }
  for (const auto& c : a.train_candidates) CHECK(c.log_prob <= 0.0);
}

TEST_CASE("synth-gen output files re-parse (format closure)") {
  TempDir dir;
  SynthConfig config;
  config.seed = 1;
  config.train_images = 3;
  config.test_images = 2;
  config.attributes_per_image = 3;
  config.candidates_per_image = 5;
  const SynthBenchmark bench = generate_synth(config);
  write_synth(bench, dir.path.string());

  const Dataset ds =
      load_dataset(dir.file("images_train.jsonl"), dir.file("candidates_train.jsonl"),
                   dir.file("lexicon.json"));
  CHECK(ds.images == bench.train_images);
  std::size_t total = 0;
  for (const auto& [id, list] : ds.candidates) total += list.size();
  CHECK(total == bench.train_candidates.size());
}
