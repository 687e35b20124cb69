#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "doctest.h"
#include "helpers.hpp"
#include "pc/critic.hpp"
#include "pc/dataset.hpp"
#include "pc/errors.hpp"

using namespace pc;

namespace {

CriticModel zero_model() {
  CriticModel model = CriticModel::init(testutil::small_dims(), 0);
  for (ParamRef& ref : model.params())
    for (double& v : *ref.values) v = 0.0;
  return model;
}

}  // namespace

TEST_CASE("embed_phrase") {
  CriticModel model = zero_model();
  const auto phrase = testutil::make_phrase("red", "beak");
  CHECK(embed_phrase(model, phrase) == Vector(model.dims.d_w, 0.0));

  // single word phrase returns that word's row
  Rng rng(2);
  for (double& v : model.embedding.values) v = rng.uniform(-1.0, 1.0);
  AttributePhrase single;
  single.attribute_tokens.push_back({"red", AttrCategory::Color});
  single.head_noun = "red";  // same bucket twice: mean equals the row
  const auto emb = embed_phrase(model, single);
  const std::size_t row = embedding_bucket("red", model.dims.buckets);
  for (std::size_t j = 0; j < model.dims.d_w; ++j)
    CHECK(emb[j] == doctest::Approx(model.embedding.at(row, j)).epsilon(1e-15));

  // "red beak" is the elementwise mean of the two rows
  const auto two = embed_phrase(model, phrase);
  const std::size_t r1 = embedding_bucket("red", model.dims.buckets);
  const std::size_t r2 = embedding_bucket("beak", model.dims.buckets);
  for (std::size_t j = 0; j < model.dims.d_w; ++j)
    CHECK(two[j] == doctest::Approx(0.5 * (model.embedding.at(r1, j) +
                                           model.embedding.at(r2, j)))
                        .epsilon(1e-12));
}

TEST_CASE("encode_step_input layout") {
  CriticModel model = zero_model();
  REQUIRE(model.dims.d_w == 4);
  Grounding g;
  g.phrase = testutil::make_phrase("red", "beak");
  g.features = {1.0, 2.0, 3.0, 4.0};
  g.score = 0.5;
  const Vector x = encode_step_input(model, g);
  CHECK(x.size() == model.dims.d_w + model.dims.d_r + 1);
  CHECK(x == Vector{0, 0, 0, 0, 1.0, 2.0, 3.0, 4.0, 0.5});

  Grounding other = g;
  other.score = 0.9;
  const Vector y = encode_step_input(model, other);
  for (std::size_t i = 0; i + 1 < x.size(); ++i) CHECK(x[i] == y[i]);
  CHECK(y.back() == 0.9);

  Grounding bad = g;
  bad.features = {1.0};
  CHECK_THROWS_AS(encode_step_input(model, bad), std::invalid_argument);
}

TEST_CASE("critic_score zero model and bias propagation") {
  CriticModel model = zero_model();
  Rng rng(6);
  const auto seq = testutil::random_sequence(3, model.dims.d_r, rng);
  CHECK(critic_score(model, seq) == 0.0);

  model.regressor.b2 = {3.0};
  CHECK(critic_score(model, seq) == 3.0);

  CHECK_THROWS_AS(critic_score(model, {}), std::invalid_argument);
}

TEST_CASE("critic_score equals a straight-line unrolled reference") {
  CriticModel model = CriticModel::init(testutil::small_dims(), 21);
  Rng rng(22);
  for (std::size_t len = 1; len <= 4; ++len) {
    const auto seq = testutil::random_sequence(len, model.dims.d_r, rng);
    // manual unroll through the public single-step pieces
    Vector h(model.dims.d_h, 0.0), c(model.dims.d_h, 0.0);
    for (const Grounding& g : seq) {
      const auto state = lstm_cell_forward(model.lstm, encode_step_input(model, g), h, c);
      h = state.h;
      c = state.c;
    }
    const double expected = two_layer_forward(model.regressor, h);
    CHECK(critic_score(model, seq) == expected);
  }
}

TEST_CASE("train_pair_loss on the zero model equals the margin") {
  CriticModel model = zero_model();
  Rng rng(14);
  TrainPair pair;
  pair.positive = testutil::random_sequence(2, model.dims.d_r, rng);
  pair.negative = testutil::random_sequence(2, model.dims.d_r, rng);
  CHECK(train_pair_loss(model, pair, 1.0) == 1.0);
  CHECK(train_pair_loss(model, pair, 0.25) == 0.25);
}

TEST_CASE("pairwise_accuracy") {
  CriticModel model = zero_model();
  Rng rng(15);
  TrainPair pair;
  pair.positive = testutil::random_sequence(2, model.dims.d_r, rng);
  pair.negative = testutil::random_sequence(2, model.dims.d_r, rng);
  // all ties on the zero model
  CHECK(pairwise_accuracy(model, {pair}) == 0.0);
  CHECK_THROWS_AS(pairwise_accuracy(model, {}), std::invalid_argument);
}

TEST_CASE("training is deterministic and lr = 0 freezes parameters") {
  const SynthConfig synth{/*seed=*/5, /*train_images=*/6, /*test_images=*/2,
                          /*attributes_per_image=*/4, /*candidates_per_image=*/4};
  const SynthBenchmark bench = generate_synth(synth);
  SyntheticGrounderConfig gconf;
  gconf.feature_dim = testutil::small_dims().d_r;
  std::map<std::string, ImageRecord> by_id;
  for (const auto& img : bench.train_images) by_id[img.image_id] = img;
  SyntheticGrounder grounder(by_id, gconf);

  TrainConfig config;
  config.epochs = 3;
  config.seed = 77;
  config.negatives_per_image = 2;

  CriticModel a = CriticModel::init(testutil::small_dims(), 77);
  CriticModel b = CriticModel::init(testutil::small_dims(), 77);
  const auto hist_a = train(a, bench.train_images, grounder, bench.lexicon, config);
  const auto hist_b = train(b, bench.train_images, grounder, bench.lexicon, config);
  CHECK(hist_a == hist_b);
  for (std::size_t i = 0; i < a.params().size(); ++i)
    CHECK(*a.params()[i].values == *b.params()[i].values);

  CriticModel frozen = CriticModel::init(testutil::small_dims(), 77);
  const CriticModel before = frozen;
  TrainConfig zero_lr = config;
  zero_lr.learning_rate = 0.0;
  const auto hist = train(frozen, bench.train_images, grounder, bench.lexicon, zero_lr);
  for (std::size_t i = 0; i < frozen.params().size(); ++i)
    CHECK(*frozen.params()[i].values ==
          *const_cast<CriticModel&>(before).params()[i].values);
  CHECK(hist.size() == zero_lr.epochs);
}

TEST_CASE("train rejects an empty dataset") {
  CriticModel model = CriticModel::init(testutil::small_dims(), 1);
  SyntheticGrounderConfig gconf;
  gconf.feature_dim = model.dims.d_r;
  SyntheticGrounder grounder({}, gconf);
  TrainConfig config;
  CHECK_THROWS_AS(train(model, {}, grounder, Lexicon::builtin(), config),
                  std::invalid_argument);
}

TEST_CASE("checkpoint round trip and shape rejection") {
  const auto path = std::filesystem::temp_directory_path() / "pc_ckpt.json";
  CriticModel model = CriticModel::init(testutil::small_dims(), 123);
  save_checkpoint(model, 123, path.string());

  std::uint64_t seed = 0;
  CriticModel loaded = load_checkpoint(path.string(), &seed);
  CHECK(seed == 123);
  CHECK(loaded.dims == model.dims);
  auto refs_a = model.params();
  auto refs_b = loaded.params();
  for (std::size_t i = 0; i < refs_a.size(); ++i)
    CHECK(*refs_a[i].values == *refs_b[i].values);  // bit exact through JSON

  // corrupt a shape
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  in.close();
  const auto pos = text.find("\"d_h\":6");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 7, "\"d_h\":7");
  std::ofstream out(path);
  out << text;
  out.close();
  CHECK_THROWS_AS(load_checkpoint(path.string()), DataError);
  std::filesystem::remove(path);
}
