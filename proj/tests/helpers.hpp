#pragma once

// Shared test fixtures: small random models, random groundings, and a
// scalar LSTM reference kept independent of the library implementation.

#include <cmath>
#include <string>
#include <vector>

#include "pc/critic.hpp"
#include "pc/grounding.hpp"
#include "pc/rng.hpp"

namespace testutil {

inline pc::CriticDims small_dims() {
  pc::CriticDims dims;
  dims.d_w = 4;
  dims.d_r = 4;
  dims.d_h = 6;
  dims.d_hidden = 4;
  dims.buckets = 16;
  return dims;
}

inline pc::AttributePhrase make_phrase(const std::string& attr, const std::string& noun,
                                       pc::AttrCategory cat = pc::AttrCategory::Color,
                                       std::size_t span = 0) {
  pc::AttributePhrase p;
  p.attribute_tokens.push_back({attr, cat});
  p.head_noun = noun;
  p.span_begin = span;
  p.span_end = span + 1;
  return p;
}

inline pc::Grounding random_grounding(const pc::AttributePhrase& phrase,
                                      std::size_t d_r, pc::Rng& rng) {
  pc::Grounding g;
  g.phrase = phrase;
  g.features.resize(d_r);
  for (double& v : g.features) v = rng.uniform(-1.0, 1.0);
  g.score = rng.uniform(0.0, 1.0);
  g.box = {rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0), rng.uniform(1.0, 10.0),
           rng.uniform(1.0, 10.0)};
  return g;
}

inline std::vector<pc::Grounding> random_sequence(std::size_t len, std::size_t d_r,
                                                  pc::Rng& rng) {
  static const std::vector<std::string> attrs = {"red", "black", "long", "white", "big"};
  static const std::vector<std::string> nouns = {"beak", "eye", "neck", "wing", "tail"};
  std::vector<pc::Grounding> seq;
  for (std::size_t i = 0; i < len; ++i) {
    const auto phrase = make_phrase(attrs[rng.below(attrs.size())],
                                    nouns[rng.below(nouns.size())],
                                    pc::AttrCategory::Color, i * 2);
    seq.push_back(random_grounding(phrase, d_r, rng));
  }
  return seq;
}

// Independent scalar reference for a d_in = d_h = 1 LSTM cell, written from
// the gate equations directly.
struct ScalarLstmRef {
  double wi_x, wi_h, bi;
  double wf_x, wf_h, bf;
  double wo_x, wo_h, bo;
  double wg_x, wg_h, bg;

  static double sigm(double v) { return 1.0 / (1.0 + std::exp(-v)); }

  std::pair<double, double> step(double x, double h_prev, double c_prev) const {
    const double i = sigm(wi_x * x + wi_h * h_prev + bi);
    const double f = sigm(wf_x * x + wf_h * h_prev + bf);
    const double o = sigm(wo_x * x + wo_h * h_prev + bo);
    const double g = std::tanh(wg_x * x + wg_h * h_prev + bg);
    const double c = f * c_prev + i * g;
    const double h = o * std::tanh(c);
    return {h, c};
  }
};

}  // namespace testutil
