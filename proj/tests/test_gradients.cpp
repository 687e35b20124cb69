// Finite-difference verification of the analytic backward pass over the
// full critic composition.

#include <cmath>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "pc/critic.hpp"
#include "pc/errors.hpp"
#include "pc/mlp.hpp"

using namespace pc;

namespace {

void check_grads_against_fd(CriticModel& model, const TrainPair& pair, double margin,
                            double rel_tol, double abs_floor) {
  GradStore grads = model.zero_grads();
  train_pair_loss_backward(model, pair, margin, grads);

  for (ParamRef& ref : model.params()) {
    auto loss_fn = [&] { return train_pair_loss(model, pair, margin); };
    const Vector fd = finite_diff_grad(loss_fn, *ref.values, 1e-5);
    const Vector& an = grads.at(ref.name);
    REQUIRE(fd.size() == an.size());
    for (std::size_t i = 0; i < fd.size(); ++i) {
      const double err = std::abs(an[i] - fd[i]);
      const double scale = std::max(std::abs(fd[i]), std::abs(an[i]));
      const bool ok = err <= abs_floor || err <= rel_tol * scale;
      if (!ok) {
        CAPTURE(ref.name);
        CAPTURE(i);
        CAPTURE(an[i]);
        CAPTURE(fd[i]);
      }
      CHECK(ok);
    }
  }
}

// Keep the pair away from the hinge kink so central differences are valid.
bool near_kink(const CriticModel& model, const TrainPair& pair, double margin) {
  const double s_pos = critic_score(model, pair.positive);
  const double s_neg = critic_score(model, pair.negative);
  return std::abs(s_neg - s_pos + margin) < 1e-3;
}

}  // namespace

TEST_CASE("loss independent of a parameter gives exactly zero gradient") {
  CriticModel model = CriticModel::init(testutil::small_dims(), 42);
  Rng rng(1);
  TrainPair pair;
  pair.positive = testutil::random_sequence(2, model.dims.d_r, rng);
  pair.negative = testutil::random_sequence(2, model.dims.d_r, rng);
  GradStore grads = model.zero_grads();
  train_pair_loss_backward(model, pair, 1.0, grads);

  // Embedding rows never touched by the phrases must have zero gradient.
  std::set<std::size_t> used;
  for (const auto* seq : {&pair.positive, &pair.negative})
    for (const auto& g : *seq) {
      for (const auto& t : g.phrase.attribute_tokens)
        used.insert(embedding_bucket(t.word, model.dims.buckets));
      used.insert(embedding_bucket(g.phrase.head_noun, model.dims.buckets));
    }
  const Vector& demb = grads.at("embedding");
  for (std::size_t row = 0; row < model.dims.buckets; ++row) {
    if (used.count(row)) continue;
    for (std::size_t j = 0; j < model.dims.d_w; ++j)
      CHECK(demb[row * model.dims.d_w + j] == 0.0);
  }
}

TEST_CASE("single linear layer: gradient of bias is one") {
  Matrix W(1, 2);
  W.values = {0.3, -0.8};
  Vector b{0.25};
  const Vector x{1.0, 2.0};

  // loss = output; d loss / d b = 1, d loss / d W = x
  Vector fd_b = finite_diff_grad([&] { return linear_forward(W, b, x)[0]; }, b, 1e-6);
  CHECK(fd_b[0] == doctest::Approx(1.0).epsilon(1e-7));
  Vector fd_W =
      finite_diff_grad([&] { return linear_forward(W, b, x)[0]; }, W.values, 1e-6);
  CHECK(fd_W[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(fd_W[1] == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("backward before forward is a state error") {
  CriticModel model = CriticModel::init(testutil::small_dims(), 5);
  CriticTape tape;
  GradStore grads = model.zero_grads();
  CHECK_THROWS_AS(critic_backward(model, tape, 1.0, grads), StateError);
}

TEST_CASE("full critic gradient on a 3-phrase input matches finite differences") {
  CriticModel model = CriticModel::init(testutil::small_dims(), 7);
  Rng rng(77);
  TrainPair pair;
  pair.positive = testutil::random_sequence(3, model.dims.d_r, rng);
  pair.negative = testutil::random_sequence(3, model.dims.d_r, rng);
  REQUIRE_FALSE(near_kink(model, pair, 1.0));
  check_grads_against_fd(model, pair, 1.0, 1e-4, 1e-7);
}

TEST_CASE("randomized gradient check over 100 seeds, d <= 8, length <= 5") {
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    CriticDims dims = testutil::small_dims();
    Rng rng(seed * 1000 + 17);
    dims.d_w = 2 + rng.below(3);  // <= 4
    dims.d_r = 2 + rng.below(3);
    dims.d_h = 3 + rng.below(4);  // <= 6
    dims.d_hidden = 2 + rng.below(3);
    CriticModel model = CriticModel::init(dims, seed);
    TrainPair pair;
    pair.positive = testutil::random_sequence(1 + rng.below(5), dims.d_r, rng);
    pair.negative = testutil::random_sequence(1 + rng.below(5), dims.d_r, rng);
    if (near_kink(model, pair, 1.0)) continue;
    check_grads_against_fd(model, pair, 1.0, 1e-4, 1e-7);
    ++checked;
  }
  CHECK(checked >= 95);  // the kink skip should be rare
}
