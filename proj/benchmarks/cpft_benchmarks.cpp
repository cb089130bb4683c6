// Copyright 2026 The cpft Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <array>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "cpft/metrics.hpp"
#include "cpft/scoring_model.hpp"
#include "cpft/synthetic.hpp"
#include "cpft/training.hpp"

namespace {

using namespace cpft;

struct Bench {
  Dataset data;
  std::shared_ptr<const Tokenizer> tokenizer;

  Bench() {
    SyntheticSpec spec;
    spec.num_prompts = 4;
    spec.answers_per_prompt = 64;
    spec.vocabulary_seed = 1;
    spec.paraphrase_noise_rate = 0.2;
    spec.distractor_rate = 0.3;
    data = generate_synthetic_corpus(spec);
    const std::array<Dataset, 1> all{data};
    tokenizer = std::make_shared<const Tokenizer>(build_tokenizer(all));
  }
};

const Bench& bench() {
  static const Bench b;
  return b;
}

EncoderConfig encoder_of(int kind) {
  EncoderConfig c;
  c.kind = kind == 0 ? EncoderKind::kTinyTransformer : EncoderKind::kBagOfEmbeddings;
  return c;
}

/// Full-length input: the answer text repeated until the sequence is truncated.
InputSequence long_input(const ScoringModel& model) {
  const Answer& a = bench().data.answers()[0];
  std::string text;
  for (int i = 0; i < 16; ++i) text += a.text + " ";
  return model.build_input(bench().data.prompt(a.prompt_id), text, InputMode::kKeyPhrase);
}

void BM_Forward(benchmark::State& state) {
  const ScoringModel model =
      ScoringModel::create(encoder_of(static_cast<int>(state.range(0))), bench().tokenizer, 1);
  const InputSequence input = long_input(model);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict_score(input));
  state.SetLabel(std::to_string(input.token_ids.size()) + " tokens");
}
BENCHMARK(BM_Forward)->Arg(0)->Arg(1);

void BM_ForwardBackward(benchmark::State& state) {
  const ScoringModel model =
      ScoringModel::create(encoder_of(static_cast<int>(state.range(0))), bench().tokenizer, 1);
  const InputSequence input = long_input(model);
  std::vector<double> grad(model.parameters().size());
  for (auto _ : state) {
    const ScoringModel::ForwardPass pass = model.forward(input);
    model.backward(pass, pass.prediction - 0.5, grad);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(0)->Arg(1);

void BM_TrainEpoch(benchmark::State& state) {
  const ScoringModel model = ScoringModel::create(EncoderConfig{}, bench().tokenizer, 1);
  const std::vector<Answer> answers = bench().data.answers_for(bench().data.prompt_ids()[0]);
  const std::vector<Example> examples =
      make_examples(model, bench().data, answers, InputMode::kKeyPhrase);
  TrainConfig config;
  config.epochs = 1;
  config.checkpoint_selection = CheckpointSelection::kLastEpoch;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train(model, examples, {}, config, InputMode::kKeyPhrase));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(examples.size()));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_Qwk(benchmark::State& state) {
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<int> rating(0, 4);
  std::vector<int> gold(static_cast<std::size_t>(state.range(0)));
  std::vector<int> pred(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    gold[i] = rating(gen);
    pred[i] = rating(gen);
  }
  for (auto _ : state) benchmark::DoNotOptimize(qwk(gold, pred, 0, 4));
}
BENCHMARK(BM_Qwk)->Arg(50)->Arg(250)->Arg(5000);

void BM_EditDistance(benchmark::State& state) {
  const std::string a(static_cast<std::size_t>(state.range(0)), 'a');
  std::string b = a;
  for (std::size_t i = 0; i < b.size(); i += 3) b[i] = 'b';
  for (auto _ : state) benchmark::DoNotOptimize(normalized_edit_distance(a, b));
}
BENCHMARK(BM_EditDistance)->Arg(16)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
