// phrase-critic command line: dataset generation, chunking, training,
// ranking, and evaluation. See README.md for the file formats.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pc/critic.hpp"
#include "pc/dataset.hpp"
#include "pc/errors.hpp"
#include "pc/kernels.hpp"
#include "pc/ranker.hpp"

using nlohmann::json;

namespace {

struct GrounderSpec {
  std::string kind = "synthetic";  // "synthetic" | path to a groundings file
  pc::SyntheticGrounderConfig synthetic;
};

struct RunConfig {
  std::uint64_t seed = 0;
  double lambda = 1.0;
  pc::CriticDims dims;
  pc::TrainConfig train;
  GrounderSpec grounder;
  double holdout_fraction = 0.2;
};

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pc::ConfigError("cannot open config file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw pc::ConfigError(path + ": " + e.what());
  }
  try {
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("lambda")) cfg.lambda = doc["lambda"].get<double>();
    if (doc.contains("holdout_fraction"))
      cfg.holdout_fraction = doc["holdout_fraction"].get<double>();
    if (doc.contains("dims")) {
      const auto& d = doc["dims"];
      if (d.contains("d_w")) cfg.dims.d_w = d["d_w"].get<std::size_t>();
      if (d.contains("d_r")) cfg.dims.d_r = d["d_r"].get<std::size_t>();
      if (d.contains("d_h")) cfg.dims.d_h = d["d_h"].get<std::size_t>();
      if (d.contains("d_hidden")) cfg.dims.d_hidden = d["d_hidden"].get<std::size_t>();
      if (d.contains("buckets")) cfg.dims.buckets = d["buckets"].get<std::size_t>();
    }
    if (doc.contains("train")) {
      const auto& t = doc["train"];
      if (t.contains("margin")) cfg.train.margin = t["margin"].get<double>();
      if (t.contains("epochs")) cfg.train.epochs = t["epochs"].get<std::size_t>();
      if (t.contains("learning_rate"))
        cfg.train.learning_rate = t["learning_rate"].get<double>();
      if (t.contains("negatives_per_image"))
        cfg.train.negatives_per_image = t["negatives_per_image"].get<std::size_t>();
      if (t.contains("patience")) cfg.train.patience = t["patience"].get<std::size_t>();
      if (t.contains("flip")) {
        const auto& f = t["flip"];
        if (f.contains("probability"))
          cfg.train.flip_policy.flip_probability = f["probability"].get<double>();
        if (f.contains("min_flips"))
          cfg.train.flip_policy.min_flips = f["min_flips"].get<std::size_t>();
        if (f.contains("exclude_image_attributes"))
          cfg.train.flip_policy.exclude_image_attributes =
              f["exclude_image_attributes"].get<bool>();
      }
    }
    if (doc.contains("grounder")) {
      const auto& g = doc["grounder"];
      if (g.contains("kind")) cfg.grounder.kind = g["kind"].get<std::string>();
      if (g.contains("feature_dim"))
        cfg.grounder.synthetic.feature_dim = g["feature_dim"].get<std::size_t>();
      if (g.contains("sigma")) cfg.grounder.synthetic.sigma = g["sigma"].get<double>();
      if (g.contains("base_match"))
        cfg.grounder.synthetic.base_match = g["base_match"].get<double>();
      if (g.contains("base_miss"))
        cfg.grounder.synthetic.base_miss = g["base_miss"].get<double>();
    }
  } catch (const json::exception& e) {
    throw pc::ConfigError(path + ": " + e.what());
  }
}

std::unique_ptr<pc::Grounder> make_grounder(const GrounderSpec& spec,
                                            const std::vector<pc::ImageRecord>& images) {
  if (spec.kind == "synthetic") {
    std::map<std::string, pc::ImageRecord> by_id;
    for (const auto& img : images) by_id[img.image_id] = img;
    return std::make_unique<pc::SyntheticGrounder>(std::move(by_id), spec.synthetic);
  }
  return pc::FileGrounder::load(spec.kind);
}

pc::Lexicon load_lexicon_or_builtin(const std::string& path) {
  if (path.empty()) return pc::Lexicon::builtin();
  return pc::Lexicon::load(path);
}

std::ostream& output_stream(std::ofstream& file, const std::string& out_path) {
  if (out_path.empty()) return std::cout;
  file.open(out_path);
  if (!file) throw pc::DataError("cannot write output file: " + out_path);
  return file;
}

json phrase_to_json(const pc::AttributePhrase& p) {
  json tokens = json::array();
  for (const auto& t : p.attribute_tokens)
    tokens.push_back({{"word", t.word}, {"category", pc::to_string(t.category)}});
  return {{"text", p.text()},
          {"attributes", tokens},
          {"noun", p.head_noun},
          {"span", {p.span_begin, p.span_end}}};
}

int cmd_chunk(const std::string& sentence, const std::string& input_path,
              const std::string& lexicon_path, const std::string& out_path) {
  const pc::Lexicon lex = load_lexicon_or_builtin(lexicon_path);
  std::vector<std::string> sentences;
  if (!sentence.empty()) {
    sentences.push_back(sentence);
  } else if (!input_path.empty()) {
    std::ifstream in(input_path);
    if (!in) throw pc::DataError("cannot open input file: " + input_path);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) sentences.push_back(line);
  } else {
    throw pc::ConfigError("chunk: provide --sentence or --input");
  }

  std::ofstream file;
  std::ostream& out = output_stream(file, out_path);
  for (const std::string& s : sentences) {
    const auto phrases = pc::chunk_phrases(pc::tokenize(s), lex);
    json row;
    row["sentence"] = s;
    json list = json::array();
    for (const auto& p : phrases) list.push_back(phrase_to_json(p));
    row["phrases"] = std::move(list);
    out << row.dump() << "\n";
  }
  return 0;
}

int cmd_flip(const std::string& sentence, const std::string& lexicon_path,
             std::uint64_t seed, const RunConfig& cfg, const std::string& out_path) {
  const pc::Lexicon lex = load_lexicon_or_builtin(lexicon_path);
  const auto phrases = pc::chunk_phrases(pc::tokenize(sentence), lex);
  if (phrases.empty()) throw pc::DataError("flip: no attribute phrases in sentence");
  pc::Rng rng(seed);
  const auto flipped = pc::make_negative(phrases, lex, cfg.train.flip_policy, rng);

  std::ofstream file;
  std::ostream& out = output_stream(file, out_path);
  json row;
  row["sentence"] = sentence;
  json orig = json::array(), neg = json::array();
  for (const auto& p : phrases) orig.push_back(phrase_to_json(p));
  for (const auto& p : flipped) neg.push_back(phrase_to_json(p));
  row["phrases"] = std::move(orig);
  row["flipped"] = std::move(neg);
  out << row.dump() << "\n";
  return 0;
}

int cmd_synth_gen(const pc::SynthConfig& config, const std::string& out_dir) {
  if (out_dir.empty()) throw pc::ConfigError("synth-gen: --out directory is required");
  pc::write_synth(pc::generate_synth(config), out_dir);
  std::cout << "wrote synthetic benchmark to " << out_dir << "\n";
  return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& images_path,
              const std::string& lexicon_path, const std::string& out_path,
              const std::string& loss_out_path) {
  if (out_path.empty()) throw pc::ConfigError("train: --out checkpoint path is required");
  pc::TrainConfig train_cfg = cfg.train;
  train_cfg.seed = cfg.seed;
  train_cfg.validate();

  const pc::Lexicon lex = load_lexicon_or_builtin(lexicon_path);
  std::vector<pc::ImageRecord> images = pc::load_images(images_path);
  if (images.empty()) throw pc::DataError("train: images file is empty");
  auto grounder = make_grounder(cfg.grounder, images);

  pc::CriticDims dims = cfg.dims;
  dims.d_r = grounder->feature_dim();

  // Seeded holdout split for the reported pairwise accuracy.
  std::vector<std::size_t> order(images.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  pc::Rng split_rng(cfg.seed);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[split_rng.below(i)]);
  const std::size_t held = static_cast<std::size_t>(
      static_cast<double>(images.size()) * cfg.holdout_fraction);
  std::vector<pc::ImageRecord> train_images, held_images;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < held ? held_images : train_images).push_back(images[order[i]]);
  if (train_images.empty()) train_images = images;

  pc::CriticModel model = pc::CriticModel::init(dims, cfg.seed);
  const auto history = pc::train(model, train_images, *grounder, lex, train_cfg);

  pc::save_checkpoint(model, cfg.seed, out_path);
  if (!loss_out_path.empty()) {
    std::ofstream out(loss_out_path);
    if (!out) throw pc::DataError("cannot write loss history: " + loss_out_path);
    for (std::size_t e = 0; e < history.size(); ++e)
      out << json({{"epoch", e}, {"mean_loss", history[e]}}).dump() << "\n";
  }

  std::cout << "epochs: " << history.size() << "\n";
  std::cout << "final mean loss: " << history.back() << "\n";
  if (!held_images.empty()) {
    pc::Rng eval_rng(cfg.seed + 1);
    const auto pairs =
        pc::build_pairs(held_images, *grounder, lex, train_cfg.flip_policy,
                        train_cfg.negatives_per_image, eval_rng);
    std::cout << "held-out pairwise accuracy: "
              << pc::pairwise_accuracy(model, pairs) << "\n";
  }
  return 0;
}

int cmd_score(const RunConfig& cfg, const std::string& checkpoint_path,
              const std::string& images_path, const std::string& lexicon_path,
              const std::string& image_id, const std::string& sentence) {
  const pc::Lexicon lex = load_lexicon_or_builtin(lexicon_path);
  const auto images = pc::load_images(images_path);
  auto grounder = make_grounder(cfg.grounder, images);
  const pc::CriticModel model = pc::load_checkpoint(checkpoint_path);
  if (model.dims.d_r != grounder->feature_dim())
    throw pc::DataError("checkpoint incompatible: d_r " +
                        std::to_string(model.dims.d_r) + " vs grounder feature_dim " +
                        std::to_string(grounder->feature_dim()));

  const auto phrases = pc::chunk_phrases(pc::tokenize(sentence), lex);
  if (phrases.empty()) throw pc::DataError("score: no attribute phrases in sentence");
  const auto groundings = pc::ground_all(*grounder, image_id, phrases);
  json row;
  row["image_id"] = image_id;
  row["sentence"] = sentence;
  row["S_r"] = pc::critic_score(model, groundings);
  json list = json::array();
  for (const auto& g : groundings)
    list.push_back({{"text", g.phrase.text()},
                    {"box", {g.box.x, g.box.y, g.box.w, g.box.h}},
                    {"s_i", g.score}});
  row["phrases"] = std::move(list);
  std::cout << row.dump() << "\n";
  return 0;
}

int cmd_rank(const RunConfig& cfg, const std::string& images_path,
             const std::string& candidates_path, const std::string& lexicon_path,
             const std::string& checkpoint_path, const std::string& out_path) {
  if (out_path.empty()) throw pc::ConfigError("rank: --out path is required");
  pc::Dataset ds;
  ds.images = pc::load_images(images_path);
  ds.lexicon = load_lexicon_or_builtin(lexicon_path);
  auto grounder = make_grounder(cfg.grounder, ds.images);
  const pc::CriticModel model = pc::load_checkpoint(checkpoint_path);
  if (model.dims.d_r != grounder->feature_dim())
    throw pc::DataError("checkpoint incompatible: d_r " +
                        std::to_string(model.dims.d_r) + " vs grounder feature_dim " +
                        std::to_string(grounder->feature_dim()));

  std::map<std::string, std::vector<pc::ExplanationCandidate>> per_image;
  std::set<std::string> known;
  for (const auto& img : ds.images) known.insert(img.image_id);
  for (auto& c : pc::load_candidates(candidates_path)) {
    if (!known.count(c.image_id))
      throw pc::DataError("candidate references unknown image '" + c.image_id + "'");
    per_image[c.image_id].push_back(std::move(c));
  }

  std::vector<pc::RankedRecord> records;
  for (const auto& [image_id, candidates] : per_image) {
    const auto ranked = pc::rank(candidates, model, *grounder, ds.lexicon, cfg.lambda);
    for (const auto& r : ranked) records.push_back(pc::to_record(image_id, r));
  }
  pc::save_ranked(out_path, records);
  std::cout << "ranked " << records.size() << " candidates over " << per_image.size()
            << " images -> " << out_path << "\n";
  return 0;
}

int cmd_eval(const std::string& ranked_path, const std::string& images_path,
             const std::string& lexicon_path, const std::string& out_path) {
  const pc::Lexicon lex = load_lexicon_or_builtin(lexicon_path);
  const auto images = pc::load_images(images_path);
  const auto records = pc::load_ranked(ranked_path);
  const pc::EvalReport report = pc::evaluate_ranked(records, images, lex);
  json row;
  row["images"] = report.images;
  row["critic_relevance"] = report.critic_relevance;
  row["fluency_relevance"] = report.fluency_relevance;
  row["gap"] = report.critic_relevance - report.fluency_relevance;
  std::ofstream file;
  std::ostream& out = output_stream(file, out_path);
  out << row.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phrase-critic: attribute-phrase chunking, grounding-based "
               "explanation scoring, and candidate reranking"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", cfg.seed, "global RNG seed");
  app.add_option("--lambda", cfg.lambda, "fluency weight in S_r + lambda * S_f");
  app.add_option("--grounder", cfg.grounder.kind,
                 "'synthetic' or path to a groundings file");
  std::string out_path;
  app.add_option("--out", out_path, "output path");
  bool serial = false;
  app.add_flag("--serial", serial, "disable OpenMP kernels");

  std::string sentence, input_path, lexicon_path, images_path, candidates_path;
  std::string checkpoint_path, ranked_path, loss_out_path, image_id;

  auto* chunk = app.add_subcommand("chunk", "extract attribute phrases");
  chunk->add_option("--sentence", sentence, "single sentence");
  chunk->add_option("--input", input_path, "file with one sentence per line");
  chunk->add_option("--lexicon", lexicon_path, "lexicon JSON file");

  auto* flip = app.add_subcommand("flip", "flip color/size attributes of a sentence");
  flip->add_option("--sentence", sentence, "sentence to flip")->required();
  flip->add_option("--lexicon", lexicon_path, "lexicon JSON file");

  pc::SynthConfig synth;
  auto* synth_gen = app.add_subcommand("synth-gen", "generate a synthetic benchmark");
  synth_gen->add_option("--train-images", synth.train_images, "train image count");
  synth_gen->add_option("--test-images", synth.test_images, "test image count");
  synth_gen->add_option("--attributes", synth.attributes_per_image,
                        "attributes per image");
  synth_gen->add_option("--candidates", synth.candidates_per_image,
                        "candidates per image");

  auto* train = app.add_subcommand("train", "train the critic");
  train->add_option("--images", images_path, "images JSONL")->required();
  train->add_option("--lexicon", lexicon_path, "lexicon JSON file");
  train->add_option("--epochs", cfg.train.epochs, "training epochs");
  train->add_option("--lr", cfg.train.learning_rate, "learning rate");
  train->add_option("--margin", cfg.train.margin, "ranking margin M");
  train->add_option("--negatives", cfg.train.negatives_per_image,
                    "negative pairs per image per epoch");
  train->add_option("--patience", cfg.train.patience, "early-stop patience (0 = off)");
  train->add_option("--holdout", cfg.holdout_fraction, "held-out image fraction");
  train->add_option("--loss-out", loss_out_path, "per-epoch loss JSONL");

  auto* score = app.add_subcommand("score", "score one sentence against one image");
  score->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
  score->add_option("--images", images_path, "images JSONL")->required();
  score->add_option("--lexicon", lexicon_path, "lexicon JSON file");
  score->add_option("--image-id", image_id, "image to ground against")->required();
  score->add_option("--sentence", sentence, "sentence to score")->required();

  auto* rank = app.add_subcommand("rank", "rerank candidate explanations");
  rank->add_option("--images", images_path, "images JSONL")->required();
  rank->add_option("--candidates", candidates_path, "candidates JSONL")->required();
  rank->add_option("--lexicon", lexicon_path, "lexicon JSON file");
  rank->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();

  auto* eval = app.add_subcommand("eval", "attribute-relevance report");
  eval->add_option("--ranked", ranked_path, "ranked output JSONL")->required();
  eval->add_option("--images", images_path, "images JSONL")->required();
  eval->add_option("--lexicon", lexicon_path, "lexicon JSON file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    // Explicit flags take precedence over the config file.
    for (auto* opt : {app.get_option("--seed"), app.get_option("--lambda"),
                      app.get_option("--grounder")})
      if (opt->count() > 0) opt->run_callback();
    pc::kernels::set_parallel(!serial);
    synth.seed = cfg.seed;

    if (chunk->parsed()) return cmd_chunk(sentence, input_path, lexicon_path, out_path);
    if (flip->parsed()) return cmd_flip(sentence, lexicon_path, cfg.seed, cfg, out_path);
    if (synth_gen->parsed()) return cmd_synth_gen(synth, out_path);
    if (train->parsed())
      return cmd_train(cfg, images_path, lexicon_path, out_path, loss_out_path);
    if (score->parsed())
      return cmd_score(cfg, checkpoint_path, images_path, lexicon_path, image_id,
                       sentence);
    if (rank->parsed())
      return cmd_rank(cfg, images_path, candidates_path, lexicon_path, checkpoint_path,
                      out_path);
    if (eval->parsed()) return cmd_eval(ranked_path, images_path, lexicon_path, out_path);
    throw pc::ConfigError("no subcommand given");
  } catch (const pc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return 2;
  } catch (const pc::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const pc::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
