#include <gtest/gtest.h>

#include <fstream>

#include "bourne/checkpoint.hpp"
#include "bourne/errors.hpp"
#include "bourne/trainer.hpp"
#include "test_support.hpp"

namespace bourne {
namespace {

using testing::random_matrix;
using testing::TempDir;

std::vector<Parameter> sample_parameters() {
  auto rng = make_rng({11});
  std::vector<Parameter> ps;
  ps.emplace_back("a", random_matrix(3, 4, rng));
  ps.emplace_back("b", random_matrix(1, 1, rng));
  ps.emplace_back("c", random_matrix(5, 2, rng));
  return ps;
}

std::vector<const Parameter*> pointers(const std::vector<Parameter>& ps) {
  std::vector<const Parameter*> out;
  for (const auto& p : ps) out.push_back(&p);
  return out;
}

TEST(Checkpoint, RoundTripWithoutOptimizer) {
  TempDir dir("ckpt");
  const auto ps = sample_parameters();
  const nlohmann::json extra = {{"note", "x"}, {"n", 3}};
  save_checkpoint(dir.path() / "m.bin", pointers(ps), 42, 0.99f, extra, std::nullopt);
  const auto data = load_checkpoint(dir.path() / "m.bin");
  ASSERT_EQ(data.parameters.size(), ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    EXPECT_EQ(data.parameters[i].name, ps[i].name);
    EXPECT_EQ(data.parameters[i].value, ps[i].value);  // bitwise
  }
  EXPECT_EQ(data.step, 42);
  EXPECT_EQ(data.tau, 0.99f);
  EXPECT_EQ(data.extra, extra);
  EXPECT_FALSE(data.optimizer.has_value());
}

TEST(Checkpoint, RoundTripWithAdamState) {
  TempDir dir("ckpt");
  auto ps = sample_parameters();
  std::vector<Parameter*> raw;
  for (auto& p : ps) raw.push_back(&p);
  Adam adam({1e-2f}, raw);
  auto rng = make_rng({12});
  for (int step = 0; step < 3; ++step) {
    for (auto& p : ps) p.grad = random_matrix(p.value.rows(), p.value.cols(), rng);
    adam.step();
  }
  save_checkpoint(dir.path() / "m.bin", pointers(ps), adam.step_count(), 0.5f, {},
                  snapshot(adam));
  const auto data = load_checkpoint(dir.path() / "m.bin");
  ASSERT_TRUE(data.optimizer.has_value());
  EXPECT_EQ(data.optimizer->step, 3);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    EXPECT_EQ(data.optimizer->first_moments[i], adam.first_moments()[i]);
    EXPECT_EQ(data.optimizer->second_moments[i], adam.second_moments()[i]);
  }

  // Resuming from the restored state matches continuing in memory.
  auto resumed = data.parameters;
  std::vector<Parameter*> rraw;
  for (auto& p : resumed) rraw.push_back(&p);
  Adam adam2({1e-2f}, rraw);
  adam2.restore(data.optimizer->step, data.optimizer->first_moments,
                data.optimizer->second_moments);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    ps[i].grad = Matrix::Constant(ps[i].value.rows(), ps[i].value.cols(), 0.3f);
    resumed[i].grad = ps[i].grad;
  }
  adam.step();
  adam2.step();
  for (std::size_t i = 0; i < ps.size(); ++i) EXPECT_EQ(ps[i].value, resumed[i].value);
}

TEST(Checkpoint, RejectsCorruptFiles) {
  TempDir dir("ckpt");
  const auto ps = sample_parameters();
  const auto good = dir.path() / "m.bin";
  save_checkpoint(good, pointers(ps), 1, 0.9f, {}, std::nullopt);

  EXPECT_THROW(load_checkpoint(dir.path() / "missing.bin"), InvalidInput);

  {
    std::ofstream(dir.path() / "magic.bin") << "NOTACKPT and more bytes";
  }
  EXPECT_THROW(load_checkpoint(dir.path() / "magic.bin"), InvalidInput);

  const auto size = std::filesystem::file_size(good);
  std::filesystem::copy_file(good, dir.path() / "short.bin");
  std::filesystem::resize_file(dir.path() / "short.bin", size - 4);
  EXPECT_THROW(load_checkpoint(dir.path() / "short.bin"), InvalidInput);
}

TEST(Checkpoint, ModelRoundTripKeepsConfigAndWeights) {
  TempDir dir("ckpt");
  TrainConfig cfg;
  cfg.embedding_dim = 8;
  cfg.predictor_hidden = 16;
  cfg.seed = 5;
  cfg.weights.alpha = 0.4f;
  BourneModel model(cfg.model_config(6), 77);
  model.target.hgnn_weights[0].value.array() += 0.5f;
  save_model(dir.path() / "m.bin", model, cfg, 10);
  const auto loaded = load_model(dir.path() / "m.bin");
  EXPECT_EQ(loaded.step, 10);
  EXPECT_EQ(loaded.config.weights.alpha, 0.4f);
  EXPECT_EQ(loaded.config.embedding_dim, 8u);
  const auto a = model.all_parameters();
  const auto b = loaded.model.all_parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i]->name, b[i]->name);
    EXPECT_EQ(a[i]->value, b[i]->value);
  }
}

}  // namespace
}  // namespace bourne
