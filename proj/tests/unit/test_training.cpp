#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "apmionet/training/config.hpp"
#include "apmionet/training/dataset.hpp"
#include "apmionet/training/optimizer.hpp"
#include "apmionet/training/trainer.hpp"

using namespace apmionet;

namespace {

ExperimentConfig tiny_config() {
  auto cfg = parse_config(R"(
[problem]
id = landau
collision = fokker_planck
epsilon = 1
[sampling]
n_train = 4
n_test = 1
sensors_x = 4
sensors_v = 4
n_dom = 32
n_init = 16
[optimizer]
iterations = 6
batch_dom = 8
batch_ic = 4
log_every = 2
[network]
hidden_layers = 2
width = 8
p = 8
[runtime]
seed = 11
wall_clock = false
)");
  return cfg;
}

std::filesystem::path tmp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("apmionet_train_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST(Schedule, StepDecay) {
  OptimizerConfig o;
  EXPECT_DOUBLE_EQ(learning_rate(o, 0), 1e-3);
  EXPECT_DOUBLE_EQ(learning_rate(o, 999), 1e-3);
  EXPECT_NEAR(learning_rate(o, 2500), 0.81e-3, 1e-18);
  EXPECT_NEAR(learning_rate(o, 1000), 0.9e-3, 1e-18);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  OptimizerConfig o;
  std::vector<double> w{1.0, -2.0, 3.5};
  const auto w0 = w;
  const std::vector<double> g(3, 0.0);
  AdamState st;
  for (int i = 0; i < 10; ++i) adam_step(w, g, st, i, o);
  EXPECT_EQ(w, w0);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  OptimizerConfig o;
  std::vector<double> w{0.0, 0.0};
  AdamState st;
  adam_step(w, std::vector<double>{3.0, -0.01}, st, 0, o);
  EXPECT_NEAR(w[0], -1e-3, 1e-9);
  EXPECT_NEAR(w[1], 1e-3, 1e-6);
}

TEST(Adam, ConvergesOnQuadratic) {
  OptimizerConfig o;
  o.lr0 = 0.05;
  o.decay = 1.0;
  std::vector<double> w{2.0, -3.0, 0.5};
  const std::vector<double> a{1.0, 4.0, 0.25};
  AdamState st;
  for (int i = 0; i < 4000; ++i) {
    std::vector<double> g(3);
    for (int j = 0; j < 3; ++j) g[j] = 2.0 * a[j] * (w[j] - 1.0);
    adam_step(w, g, st, i, o);
  }
  for (double x : w) EXPECT_NEAR(x, 1.0, 1e-3);
}

TEST(Adam, SingleParameterQuadraticWithSchedule) {
  OptimizerConfig o;
  std::vector<double> w{0.0};
  AdamState st;
  for (int i = 0; i < 5000; ++i) adam_step(w, std::vector<double>{2.0 * (w[0] - 1.0)}, st, i, o);
  EXPECT_NEAR(w[0], 1.0, 1e-6);
}

TEST(EarlyStopping, MonotoneStreamNeverStops) {
  EarlyStopping es(3);
  for (int i = 1; i <= 100; ++i) EXPECT_FALSE(es.update(1.0 / i));
}

TEST(EarlyStopping, ConstantStreamStopsAfterPatience) {
  EarlyStopping es(3);
  EXPECT_FALSE(es.update(1.0));
  EXPECT_FALSE(es.update(1.0));
  EXPECT_FALSE(es.update(1.0));
  EXPECT_TRUE(es.update(1.0));
  EXPECT_EQ(es.checks(), 4);
}

TEST(EarlyStopping, DipThenPlateauKeepsDip) {
  EarlyStopping es(2);
  EXPECT_FALSE(es.update(1.0));
  EXPECT_FALSE(es.update(0.5));
  EXPECT_TRUE(es.improved());
  EXPECT_FALSE(es.update(0.7));
  EXPECT_TRUE(es.update(0.7));
  EXPECT_DOUBLE_EQ(es.best(), 0.5);
}

TEST(Config, DefaultsAndOverrides) {
  const auto cfg = tiny_config();
  EXPECT_EQ(cfg.problem, ProblemId::landau);
  EXPECT_DOUBLE_EQ(cfg.domain.period, 4.0 * std::numbers::pi);
  EXPECT_DOUBLE_EQ(cfg.domain.T, 5.0);
  EXPECT_EQ(cfg.sampling.sensors_x, 4);
  EXPECT_EQ(cfg.network.width, 8);
  EXPECT_EQ(cfg.seed, 11u);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, MixingDefaults) {
  const auto cfg = parse_config("[problem]\nid = mixing\n");
  EXPECT_EQ(cfg.collision, CollisionKind::Degenerate);
  EXPECT_EQ(cfg.epsilon_mode, "mixing");
  EXPECT_NEAR(cfg.epsilon_profile()(0.5), 1e-3, 1e-15);
  EXPECT_NEAR(cfg.epsilon_profile()(0.0), 1e-3 + std::tanh(5.0), 1e-14);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("[problem]\nid = nonsense\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("[bogus]\nx = 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("[optimizer]\nlearning = 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("[optimizer]\niterations = ten\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("seed = 3\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("[runtime]\nwall_clock = maybe\n"), std::invalid_argument);
  EXPECT_THROW(load_config("/nonexistent/apmionet.ini"), std::invalid_argument);
  auto bad = tiny_config();
  bad.sampling.n_test = 3;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Dataset, LandauInitialSensor) {
  auto cfg = parse_config("[sampling]\nfixed = true\nfixed_h = 1\nfixed_alpha = 0.05\nsensors_x = 8\nsensors_v = 9\n");
  const auto ds = sample_dataset(cfg, 0);
  ASSERT_EQ(ds.train.size(), 1u);
  ASSERT_EQ(ds.test.size(), 1u);
  // sensor (x = 0, v = 0) is row 0, middle column
  EXPECT_NEAR(ds.train[0].f0_sensors[4], 1.05 / std::sqrt(2.0 * std::numbers::pi), 1e-14);
  EXPECT_DOUBLE_EQ(ds.train[0].h_sensors[0], 1.0);
}

TEST(Dataset, DeterministicAndInRange) {
  auto cfg = tiny_config();
  const auto a = sample_dataset(cfg, 5);
  const auto b = sample_dataset(cfg, 5);
  const auto c = sample_dataset(cfg, 6);
  ASSERT_EQ(a.train.size(), 4u);
  ASSERT_EQ(a.test.size(), 1u);
  std::set<double> alphas;
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(a.train[i].f0_sensors, b.train[i].f0_sensors);
    EXPECT_NE(a.train[i].alpha, c.train[i].alpha);
    EXPECT_GE(a.train[i].alpha, cfg.sampling.alpha_min);
    EXPECT_LE(a.train[i].alpha, cfg.sampling.alpha_max);
    EXPECT_GE(a.train[i].h, cfg.sampling.h_min);
    EXPECT_LE(a.train[i].h, cfg.sampling.h_max);
    alphas.insert(a.train[i].alpha);
  }
  EXPECT_EQ(alphas.size(), a.train.size());
}

TEST(Dataset, RoundTripAndCorruption) {
  const auto dir = tmp_dir("ds");
  const auto ds = sample_dataset(tiny_config(), 1);
  const auto p = (dir / "d.bin").string();
  save_dataset(p, ds);
  const auto back = load_dataset(p);
  ASSERT_EQ(back.train.size(), ds.train.size());
  EXPECT_EQ(back.train[2].f0_sensors, ds.train[2].f0_sensors);
  EXPECT_EQ(back.test[0].h_sensors, ds.test[0].h_sensors);
  EXPECT_EQ(back.uses_f0, ds.uses_f0);
  std::filesystem::resize_file(p, std::filesystem::file_size(p) - 3);
  EXPECT_THROW(load_dataset(p), std::runtime_error);
}

TEST(Trainer, ZeroIterationsLeavesParameters) {
  auto cfg = tiny_config();
  cfg.optimizer.iterations = 0;
  const auto ds = sample_dataset(cfg, cfg.seed);
  const auto r = train(cfg, ds);
  EXPECT_EQ(r.iterations_run, 0);
  EXPECT_EQ(r.triple.params(), make_triple(cfg, ds).params());
  EXPECT_TRUE(r.history.rows.empty());
}

TEST(Trainer, BitwiseReproducibleAndLogged) {
  auto cfg = tiny_config();
  const auto ds = sample_dataset(cfg, cfg.seed);
  const auto dir = tmp_dir("repro");
  TrainOptions o1;
  o1.log_csv = (dir / "a.csv").string();
  TrainOptions o2;
  o2.log_csv = (dir / "b.csv").string();
  const auto a = train(cfg, ds, o1);
  const auto b = train(cfg, ds, o2);
  EXPECT_EQ(a.triple.params(), b.triple.params());
  EXPECT_NE(a.triple.params(), make_triple(cfg, ds).params());
  auto slurp = [](const std::string& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  const auto text = slurp(o1.log_csv);
  EXPECT_EQ(text, slurp(o2.log_csv));
  EXPECT_EQ(text.substr(0, text.find('\n')), kTrainLogHeader);
  // iterations 0, 2, 4 and the final 5
  ASSERT_EQ(a.history.rows.size(), 4u);
  EXPECT_EQ(a.history.rows.back().iter, 5);
  for (const auto& r : a.history.rows) EXPECT_GT(r.loss.total, 0.0);
}

TEST(Trainer, LossDecreasesOnFixedCouple) {
  auto cfg = tiny_config();
  cfg.sampling.fixed = true;
  cfg.optimizer.iterations = 150;
  cfg.optimizer.lr0 = 3e-3;
  cfg.optimizer.log_every = 149;
  const auto ds = sample_dataset(cfg, cfg.seed);
  const auto before = evaluate_loss(cfg, make_triple(cfg, ds), ds.train, true, 64, 32, 3).total;
  const auto r = train(cfg, ds);
  const auto after = evaluate_loss(cfg, r.triple, ds.train, true, 64, 32, 3).total;
  EXPECT_LT(after, 0.5 * before);
}

TEST(Trainer, BaselineHasNoDensityNet) {
  auto cfg = tiny_config();
  cfg.loss = "pi";
  cfg.optimizer.iterations = 2;
  const auto ds = sample_dataset(cfg, cfg.seed);
  const auto r = train(cfg, ds);
  EXPECT_FALSE(r.triple.has(NetId::P));
  EXPECT_TRUE(std::isfinite(r.history.rows.back().loss.total));
}

TEST(Trainer, CheckpointsAndEarlyStop) {
  auto cfg = tiny_config();
  cfg.optimizer.iterations = 40;
  cfg.optimizer.checkpoint_every = 10;
  cfg.optimizer.patience = 1;
  cfg.optimizer.validate_every = 5;
  cfg.optimizer.lr0 = 1e-300;
  const auto ds = sample_dataset(cfg, cfg.seed);
  const auto dir = tmp_dir("ckpt");
  TrainOptions o;
  o.checkpoint_dir = (dir / "ck").string();
  const auto r = train(cfg, ds, o);
  // a frozen model cannot improve: the second check stops
  EXPECT_TRUE(r.stopped_early);
  EXPECT_EQ(r.iterations_run, 10);
  ASSERT_EQ(r.checkpoints.size(), 1u);
  const auto saved = load_checkpoint(r.checkpoints[0]).params();
  ASSERT_EQ(saved.size(), r.triple.n_params());
  for (std::size_t i = 0; i < saved.size(); ++i) EXPECT_NEAR(saved[i], r.triple.params()[i], 1e-250);
}

TEST(Trainer, DivergenceIsReported) {
  auto cfg = tiny_config();
  cfg.weights.lambda1 = 1e9;
  const auto ds = sample_dataset(cfg, cfg.seed);
  try {
    train(cfg, ds);
    FAIL() << "expected NumericFailure";
  } catch (const NumericFailure& e) {
    EXPECT_NE(std::string(e.what()).find("diverged"), std::string::npos);
  }
}

TEST(Trainer, RejectsThreads) {
  auto cfg = tiny_config();
  cfg.threads = 4;
  EXPECT_THROW(train(cfg, sample_dataset(cfg, 0)), std::invalid_argument);
}

#ifdef APMIONET_CONFIG_DIR
TEST(Config, ShippedConfigsParse) {
  int n = 0;
  for (const auto& e : std::filesystem::directory_iterator(APMIONET_CONFIG_DIR)) {
    if (e.path().extension() != ".ini") continue;
    EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
    ++n;
  }
  EXPECT_GE(n, 11);
  const auto hf = load_config(std::string(APMIONET_CONFIG_DIR) + "/landau_highfield.ini");
  EXPECT_EQ(hf.weights.lambda1, 500.0);
  EXPECT_EQ(hf.epsilon, 1e-3);
  EXPECT_EQ(hf.network.width, 64);
  const auto desk = load_config(std::string(APMIONET_CONFIG_DIR) + "/desk_landau_eps1.ini");
  EXPECT_TRUE(desk.sampling.fixed);
  EXPECT_EQ(desk.network.hidden_layers, 3);
  EXPECT_EQ(desk.optimizer.iterations, 20000);
}
#endif
