#include "pc/critic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "pc/errors.hpp"

namespace pc {

using nlohmann::json;

namespace {

constexpr int kCheckpointVersion = 1;

void fill_uniform(Vector& v, Rng& rng, double lo, double hi) {
  for (double& x : v) x = rng.uniform(lo, hi);
}

std::vector<std::string> phrase_words(const AttributePhrase& phrase) {
  std::vector<std::string> words;
  words.reserve(phrase.attribute_tokens.size() + 1);
  for (const AttrToken& t : phrase.attribute_tokens) words.push_back(t.word);
  words.push_back(phrase.head_noun);
  return words;
}

}  // namespace

std::size_t embedding_bucket(const std::string& word, std::size_t buckets) {
  return static_cast<std::size_t>(fnv1a(word) % buckets);
}

CriticModel CriticModel::init(const CriticDims& dims, std::uint64_t seed) {
  CriticModel model;
  model.dims = dims;
  const std::size_t d_in = dims.d_w + dims.d_r + 1;
  model.embedding = Matrix(dims.buckets, dims.d_w);
  model.lstm = LstmCellParams(d_in, dims.d_h);
  model.regressor = TwoLayerParams(dims.d_h, dims.d_hidden);

  Rng rng(seed);
  fill_uniform(model.embedding.values, rng, -0.08, 0.08);
  for (Matrix* w : {&model.lstm.w_i, &model.lstm.w_f, &model.lstm.w_o, &model.lstm.w_g})
    fill_uniform(w->values, rng, -0.08, 0.08);

  const double lim1 = std::sqrt(6.0 / static_cast<double>(dims.d_h + dims.d_hidden));
  fill_uniform(model.regressor.w1.values, rng, -lim1, lim1);
  const double lim2 = std::sqrt(6.0 / static_cast<double>(dims.d_hidden + 1));
  fill_uniform(model.regressor.w2.values, rng, -lim2, lim2);
  return model;
}

std::vector<ParamRef> CriticModel::params() {
  return {
      {"embedding", &embedding.values},
      {"lstm.w_i", &lstm.w_i.values},
      {"lstm.w_f", &lstm.w_f.values},
      {"lstm.w_o", &lstm.w_o.values},
      {"lstm.w_g", &lstm.w_g.values},
      {"lstm.b_i", &lstm.b_i},
      {"lstm.b_f", &lstm.b_f},
      {"lstm.b_o", &lstm.b_o},
      {"lstm.b_g", &lstm.b_g},
      {"regressor.w1", &regressor.w1.values},
      {"regressor.b1", &regressor.b1},
      {"regressor.w2", &regressor.w2.values},
      {"regressor.b2", &regressor.b2},
  };
}

GradStore CriticModel::zero_grads() const {
  GradStore grads;
  auto& self = const_cast<CriticModel&>(*this);
  for (const ParamRef& ref : self.params())
    grads[ref.name] = Vector(ref.values->size(), 0.0);
  return grads;
}

void TrainConfig::validate() const {
  if (margin < 0.0) throw ConfigError("margin must be >= 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (learning_rate < 0.0) throw ConfigError("learning_rate must be >= 0");
  if (negatives_per_image < 1) throw ConfigError("negatives_per_image must be >= 1");
  flip_policy.validate();
}

Vector embed_phrase(const CriticModel& model, const AttributePhrase& phrase) {
  const auto words = phrase_words(phrase);
  Vector out(model.dims.d_w, 0.0);
  for (const std::string& w : words) {
    const std::size_t row = embedding_bucket(w, model.dims.buckets);
    for (std::size_t j = 0; j < model.dims.d_w; ++j)
      out[j] += model.embedding.at(row, j);
  }
  const double inv = 1.0 / static_cast<double>(words.size());
  for (double& v : out) v *= inv;
  return out;
}

Vector encode_step_input(const CriticModel& model, const Grounding& g) {
  if (g.features.size() != model.dims.d_r)
    throw std::invalid_argument("encode_step_input: features have length " +
                                std::to_string(g.features.size()) + ", expected " +
                                std::to_string(model.dims.d_r));
  Vector x = embed_phrase(model, g.phrase);
  x.reserve(model.dims.d_w + model.dims.d_r + 1);
  x.insert(x.end(), g.features.begin(), g.features.end());
  x.push_back(g.score);
  return x;
}

double critic_score(const CriticModel& model, const std::vector<Grounding>& groundings,
                    CriticTape* tape) {
  if (groundings.empty())
    throw std::invalid_argument("critic_score: empty grounding list");
  Vector h(model.dims.d_h, 0.0);
  Vector c(model.dims.d_h, 0.0);
  std::vector<LstmStepCache> steps(tape ? groundings.size() : 0);
  for (std::size_t t = 0; t < groundings.size(); ++t) {
    const Vector x = encode_step_input(model, groundings[t]);
    LstmState state =
        lstm_cell_forward(model.lstm, x, h, c, tape ? &steps[t] : nullptr);
    h = std::move(state.h);
    c = std::move(state.c);
  }
  TwoLayerCache rcache;
  const double score =
      two_layer_forward(model.regressor, h, tape ? &rcache : nullptr);
  if (tape) {
    tape->groundings = groundings;
    tape->steps = std::move(steps);
    tape->regressor = std::move(rcache);
    tape->score = score;
    tape->valid = true;
  }
  return score;
}

void critic_backward(const CriticModel& model, const CriticTape& tape,
                     double upstream, GradStore& grads) {
  if (!tape.valid)
    throw StateError("critic_backward: no forward pass recorded on this tape");

  TwoLayerGrads rgrads(model.regressor);
  Vector dh = two_layer_backward(model.regressor, tape.regressor, upstream, rgrads);
  Vector dc(model.dims.d_h, 0.0);

  LstmGrads lgrads(model.lstm);
  Vector& demb = grads.at("embedding");
  for (std::size_t t = tape.steps.size(); t-- > 0;) {
    Vector dx, dh_prev, dc_prev;
    lstm_cell_backward(model.lstm, tape.steps[t], dh, dc, lgrads, dx, dh_prev, dc_prev);
    const auto words = phrase_words(tape.groundings[t].phrase);
    const double inv = 1.0 / static_cast<double>(words.size());
    for (const std::string& w : words) {
      const std::size_t row = embedding_bucket(w, model.dims.buckets);
      for (std::size_t j = 0; j < model.dims.d_w; ++j)
        demb[row * model.dims.d_w + j] += dx[j] * inv;
    }
    dh = std::move(dh_prev);
    dc = std::move(dc_prev);
  }

  auto add = [&grads](const std::string& name, const Vector& src) {
    Vector& dst = grads.at(name);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
  };
  add("lstm.w_i", lgrads.w_i.values);
  add("lstm.w_f", lgrads.w_f.values);
  add("lstm.w_o", lgrads.w_o.values);
  add("lstm.w_g", lgrads.w_g.values);
  add("lstm.b_i", lgrads.b_i);
  add("lstm.b_f", lgrads.b_f);
  add("lstm.b_o", lgrads.b_o);
  add("lstm.b_g", lgrads.b_g);
  add("regressor.w1", rgrads.w1.values);
  add("regressor.b1", rgrads.b1);
  add("regressor.w2", rgrads.w2.values);
  add("regressor.b2", rgrads.b2);
}

double train_pair_loss(const CriticModel& model, const TrainPair& pair, double margin) {
  const double s_pos = critic_score(model, pair.positive);
  const double s_neg = critic_score(model, pair.negative);
  return margin_ranking_loss(s_pos, s_neg, margin);
}

double train_pair_loss_backward(const CriticModel& model, const TrainPair& pair,
                                double margin, GradStore& grads) {
  CriticTape pos_tape, neg_tape;
  const double s_pos = critic_score(model, pair.positive, &pos_tape);
  const double s_neg = critic_score(model, pair.negative, &neg_tape);
  const double loss = margin_ranking_loss(s_pos, s_neg, margin);
  const auto [g_pos, g_neg] = margin_ranking_loss_grad(s_pos, s_neg, margin);
  if (g_pos != 0.0) critic_backward(model, pos_tape, g_pos, grads);
  if (g_neg != 0.0) critic_backward(model, neg_tape, g_neg, grads);
  return loss;
}

std::vector<AttributePhrase> image_phrases(const ImageRecord& image,
                                           const Lexicon& lex) {
  std::vector<AttributePhrase> phrases;
  std::size_t pos = 0;
  for (const auto& [attr, noun] : image.attributes) {
    const auto cat = lex.attribute_category(attr);
    if (!cat)
      throw DataError("image '" + image.image_id + "': attribute '" + attr +
                      "' is not in the lexicon");
    AttributePhrase p;
    p.attribute_tokens.push_back({attr, *cat});
    p.head_noun = noun;
    p.span_begin = pos;
    p.span_end = pos + 1;
    pos += 2;
    phrases.push_back(std::move(p));
  }
  return phrases;
}

namespace {

TrainPair build_one_pair(const ImageRecord& image,
                         const std::vector<AttributePhrase>& phrases,
                         const std::vector<Grounding>& positive,
                         const AttrNounSet& attr_set,
                         const std::map<std::string, std::vector<AttributePhrase>>& all,
                         const Grounder& grounder, const Lexicon& lex,
                         const FlipPolicy& policy, Rng& rng) {
  std::vector<AttributePhrase> neg_phrases;
  try {
    neg_phrases = make_negative(phrases, lex, policy, rng, &attr_set);
  } catch (const NotFlippableError&) {
    neg_phrases = sample_mismatch(all, image.image_id, rng);
  }
  TrainPair pair;
  pair.image_id = image.image_id;
  pair.positive = positive;
  pair.negative = ground_all(grounder, image.image_id, neg_phrases);
  return pair;
}

}  // namespace

std::vector<TrainPair> build_pairs(const std::vector<ImageRecord>& images,
                                   const Grounder& grounder, const Lexicon& lex,
                                   const FlipPolicy& policy,
                                   std::size_t pairs_per_image, Rng& rng) {
  std::map<std::string, std::vector<AttributePhrase>> all;
  for (const ImageRecord& img : images) all[img.image_id] = image_phrases(img, lex);

  std::vector<TrainPair> pairs;
  for (const ImageRecord& img : images) {
    const auto& phrases = all.at(img.image_id);
    if (phrases.empty())
      throw DataError("image '" + img.image_id + "' has no attributes");
    const auto positive = ground_all(grounder, img.image_id, phrases);
    const auto attr_set = img.attribute_set();
    for (std::size_t k = 0; k < pairs_per_image; ++k)
      pairs.push_back(build_one_pair(img, phrases, positive, attr_set, all, grounder,
                                     lex, policy, rng));
  }
  return pairs;
}

std::vector<double> train(CriticModel& model, const std::vector<ImageRecord>& images,
                          const Grounder& grounder, const Lexicon& lex,
                          const TrainConfig& config) {
  config.validate();
  if (images.empty()) throw std::invalid_argument("train: empty dataset");
  if (grounder.feature_dim() != model.dims.d_r)
    throw std::invalid_argument("train: grounder feature_dim " +
                                std::to_string(grounder.feature_dim()) +
                                " does not match model d_r " +
                                std::to_string(model.dims.d_r));

  std::map<std::string, std::vector<AttributePhrase>> all;
  for (const ImageRecord& img : images) all[img.image_id] = image_phrases(img, lex);

  AdamState opt;
  opt.lr = config.learning_rate;
  Rng rng(config.seed);
  auto params = model.params();

  std::vector<double> history;
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double total = 0.0;
    std::size_t count = 0;
    for (const ImageRecord& img : images) {
      const auto& phrases = all.at(img.image_id);
      if (phrases.empty())
        throw DataError("image '" + img.image_id + "' has no attributes");
      const auto positive = ground_all(grounder, img.image_id, phrases);
      const auto attr_set = img.attribute_set();
      for (std::size_t k = 0; k < config.negatives_per_image; ++k) {
        const TrainPair pair = build_one_pair(img, phrases, positive, attr_set, all,
                                              grounder, lex, config.flip_policy, rng);
        GradStore grads = model.zero_grads();
        total += train_pair_loss_backward(model, pair, config.margin, grads);
        ++count;
        adam_step(opt, params, grads);
      }
    }
    const double mean = total / static_cast<double>(count);
    check_finite(mean, "train: epoch mean loss");
    history.push_back(mean);
    if (mean < best) {
      best = mean;
      since_best = 0;
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      break;
    }
  }
  return history;
}

double pairwise_accuracy(const CriticModel& model,
                         const std::vector<TrainPair>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("pairwise_accuracy: empty pair list");
  std::size_t wins = 0;
  for (const TrainPair& pair : pairs)
    if (critic_score(model, pair.positive) > critic_score(model, pair.negative))
      ++wins;
  return static_cast<double>(wins) / static_cast<double>(pairs.size());
}

void save_checkpoint(const CriticModel& model, std::uint64_t seed,
                     const std::string& path) {
  json doc;
  doc["format_version"] = kCheckpointVersion;
  doc["dims"] = {{"d_w", model.dims.d_w},
                 {"d_r", model.dims.d_r},
                 {"d_h", model.dims.d_h},
                 {"d_hidden", model.dims.d_hidden},
                 {"buckets", model.dims.buckets}};
  doc["seed"] = seed;
  json params = json::array();
  auto& self = const_cast<CriticModel&>(model);
  const std::size_t d_in = model.dims.d_w + model.dims.d_r + 1;
  const std::map<std::string, std::vector<std::size_t>> shapes = {
      {"embedding", {model.dims.buckets, model.dims.d_w}},
      {"lstm.w_i", {model.dims.d_h, d_in + model.dims.d_h}},
      {"lstm.w_f", {model.dims.d_h, d_in + model.dims.d_h}},
      {"lstm.w_o", {model.dims.d_h, d_in + model.dims.d_h}},
      {"lstm.w_g", {model.dims.d_h, d_in + model.dims.d_h}},
      {"lstm.b_i", {model.dims.d_h}},
      {"lstm.b_f", {model.dims.d_h}},
      {"lstm.b_o", {model.dims.d_h}},
      {"lstm.b_g", {model.dims.d_h}},
      {"regressor.w1", {model.dims.d_hidden, model.dims.d_h}},
      {"regressor.b1", {model.dims.d_hidden}},
      {"regressor.w2", {1, model.dims.d_hidden}},
      {"regressor.b2", {1}},
  };
  for (const ParamRef& ref : self.params()) {
    json entry;
    entry["name"] = ref.name;
    entry["shape"] = shapes.at(ref.name);
    entry["values"] = *ref.values;
    params.push_back(std::move(entry));
  }
  doc["params"] = std::move(params);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out << doc.dump() << "\n";
}

CriticModel load_checkpoint(const std::string& path, std::uint64_t* seed) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
  try {
    if (doc.at("format_version").get<int>() != kCheckpointVersion)
      throw DataError("checkpoint '" + path + "': unsupported format version");
    CriticDims dims;
    const auto& d = doc.at("dims");
    dims.d_w = d.at("d_w").get<std::size_t>();
    dims.d_r = d.at("d_r").get<std::size_t>();
    dims.d_h = d.at("d_h").get<std::size_t>();
    dims.d_hidden = d.at("d_hidden").get<std::size_t>();
    dims.buckets = d.at("buckets").get<std::size_t>();
    CriticModel model = CriticModel::init(dims, 0);
    if (seed) *seed = doc.at("seed").get<std::uint64_t>();

    std::map<std::string, Vector> loaded;
    for (const auto& entry : doc.at("params")) {
      std::size_t numel = 1;
      for (const auto& dim : entry.at("shape")) numel *= dim.get<std::size_t>();
      Vector values = entry.at("values").get<Vector>();
      if (values.size() != numel)
        throw DataError("checkpoint '" + path + "': shape mismatch for parameter '" +
                        entry.at("name").get<std::string>() + "'");
      loaded[entry.at("name").get<std::string>()] = std::move(values);
    }
    for (ParamRef& ref : model.params()) {
      auto it = loaded.find(ref.name);
      if (it == loaded.end())
        throw DataError("checkpoint '" + path + "': missing parameter '" + ref.name + "'");
      if (it->second.size() != ref.values->size())
        throw DataError("checkpoint '" + path + "': parameter '" + ref.name +
                        "' does not match the stored dims");
      *ref.values = std::move(it->second);
    }
    return model;
  } catch (const json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace pc
