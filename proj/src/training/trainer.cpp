#include "apmionet/training/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "apmionet/training/optimizer.hpp"

namespace apmionet {

void TrainHistory::append(const TrainLogRow& r) {
  if (!rows.empty() && r.iter <= rows.back().iter) throw std::logic_error("training history must be increasing");
  rows.push_back(r);
}

std::string format_log_row(const TrainLogRow& r) {
  char buf[512];
  const auto& l = r.loss;
  std::snprintf(buf, sizeof buf, "%ld,%.10e,%.10e,%.10e,%.10e,%.10e,%.10e,%.10e,%.10e,%.10e,%.3f", r.iter, r.lr,
                l.total, l.kinetic, l.mass, l.poisson, l.consistency, l.ic_rho, l.ic_f, l.ic_phi, r.wall_s);
  return buf;
}

OperatorTriple make_triple(const ExperimentConfig& cfg, const Dataset& ds) {
  const int nf = ds.uses_f0 ? ds.sensors_x * ds.sensors_v : 0;
  OperatorTriple t(cfg.network, nf, ds.sensors_x, cfg.domain.period, cfg.loss == "ap");
  t.initialize(cfg.seed);
  return t;
}

namespace {

std::string non_finite_terms(const LossBreakdown& l) {
  std::string s;
  const std::pair<const char*, double> terms[] = {{"kinetic", l.kinetic}, {"mass", l.mass},
                                                  {"poisson", l.poisson}, {"consistency", l.consistency},
                                                  {"ic_rho", l.ic_rho},   {"ic_f", l.ic_f},
                                                  {"ic_phi", l.ic_phi}};
  for (const auto& [name, v] : terms) {
    if (!std::isfinite(v)) s += (s.empty() ? "" : ",") + std::string(name);
  }
  return s;
}

template <class T>
LossTerms<T> run_loss(const ExperimentConfig& cfg, FieldModel<T>& m, const CollocationBatch& b,
                      const EpsilonProfile& eps, const CollisionSpec& spec) {
  if (cfg.loss == "pi") return pi_loss<T>(m, b, cfg.pi_weights, eps, spec);
  return ap_loss<T>(m, b, cfg.weights, eps, spec);
}

// Copies the selected pool points into `mb` (sensors stay in place).
void select_points(const CollocationBatch& pool, CollocationBatch& mb, std::span<const std::size_t> dom,
                   std::span<const std::size_t> ic) {
  mb.dom_couple.resize(dom.size());
  mb.dom_t.resize(dom.size());
  mb.dom_x.resize(dom.size());
  mb.dom_v.resize(dom.size());
  for (std::size_t k = 0; k < dom.size(); ++k) {
    mb.dom_couple[k] = pool.dom_couple[dom[k]];
    mb.dom_t[k] = pool.dom_t[dom[k]];
    mb.dom_x[k] = pool.dom_x[dom[k]];
    mb.dom_v[k] = pool.dom_v[dom[k]];
  }
  mb.ic_couple.resize(ic.size());
  mb.ic_x.resize(ic.size());
  mb.ic_v.resize(ic.size());
  mb.ic_f0.resize(ic.size());
  mb.ic_rho0.resize(ic.size());
  mb.ic_phi0.resize(ic.size());
  for (std::size_t k = 0; k < ic.size(); ++k) {
    mb.ic_couple[k] = pool.ic_couple[ic[k]];
    mb.ic_x[k] = pool.ic_x[ic[k]];
    mb.ic_v[k] = pool.ic_v[ic[k]];
    mb.ic_f0[k] = pool.ic_f0[ic[k]];
    mb.ic_rho0[k] = pool.ic_rho0[ic[k]];
    mb.ic_phi0[k] = pool.ic_phi0[ic[k]];
  }
}

void draw_indices(std::mt19937_64& rng, std::size_t pool, int want, std::vector<std::size_t>& out) {
  out.clear();
  if (static_cast<std::size_t>(want) >= pool) {
    for (std::size_t i = 0; i < pool; ++i) out.push_back(i);
    return;
  }
  std::uniform_int_distribution<std::size_t> U(0, pool - 1);
  for (int k = 0; k < want; ++k) out.push_back(U(rng));
}

}  // namespace

LossBreakdown evaluate_loss(const ExperimentConfig& cfg, const OperatorTriple& triple,
                            std::span<const InputCouple> couples, bool with_f0, int n_dom, int n_ic,
                            std::uint64_t seed) {
  const auto ics = couple_initial_conditions(cfg, couples);
  const auto b = sample_collocation(sensor_table(couples, with_f0), ics, cfg.domain, n_dom, n_ic, seed);
  NetworkModel m(triple);
  return run_loss<double>(cfg, m, b, cfg.epsilon_profile(), cfg.collision_spec()).values();
}

TrainResult train(const ExperimentConfig& cfg, const Dataset& ds, const TrainOptions& opts) {
  cfg.validate();
  if (cfg.threads != 1) throw std::invalid_argument("only single-threaded training is implemented (threads = 1)");
  if (ds.train.empty()) throw std::invalid_argument("training set is empty");
  const auto& o = cfg.optimizer;
  const auto spec = cfg.collision_spec();
  const auto eps = cfg.epsilon_profile();
  const auto ics = couple_initial_conditions(cfg, ds.train);
  const SensorTable sensors = sensor_table(ds.train, ds.uses_f0);

  TrainResult res;
  res.triple = make_triple(cfg, ds);

  std::ofstream log;
  if (!opts.log_csv.empty()) {
    log.open(opts.log_csv, std::ios::trunc);
    if (!log) throw std::runtime_error("cannot open training log: " + opts.log_csv);
    log << kTrainLogHeader << '\n';
  }
  if (!opts.checkpoint_dir.empty() && o.checkpoint_every > 0) std::filesystem::create_directories(opts.checkpoint_dir);

  const auto& val_couples = ds.test.empty() ? ds.train : ds.test;
  const std::uint64_t val_seed = splitmix64(cfg.seed ^ 0x76616cULL);
  std::optional<EarlyStopping> stopper;
  std::vector<double> best_params;
  if (o.patience > 0) stopper.emplace(o.patience);

  const std::size_t pool_dom = ds.train.size() * static_cast<std::size_t>(cfg.sampling.n_dom);
  const long epoch_len = std::max<long>(1, static_cast<long>((pool_dom + o.batch_dom - 1) / o.batch_dom));
  std::mt19937_64 pick(splitmix64(cfg.seed ^ 0x7069636bULL));
  CollocationBatch pool;
  CollocationBatch mb;
  mb.sensors = sensors;
  std::vector<std::size_t> di, ii;
  AdamState adam;
  const auto t0 = std::chrono::steady_clock::now();

  for (long it = 0; it < o.iterations; ++it) {
    if (it % epoch_len == 0) {
      const auto epoch_seed = splitmix64(cfg.seed + 0x1000003ULL * static_cast<std::uint64_t>(it / epoch_len + 1));
      pool = sample_collocation(sensors, ics, cfg.domain, cfg.sampling.n_dom, cfg.sampling.n_init, epoch_seed);
      mb.h = pool.h;
    }
    draw_indices(pick, static_cast<std::size_t>(pool.n_dom()), o.batch_dom, di);
    draw_indices(pick, static_cast<std::size_t>(pool.n_ic()), o.batch_ic, ii);
    select_points(pool, mb, di, ii);

    ParamTape tape(res.triple.n_params());
    TapedNetworkModel model(res.triple, tape);
    const auto terms = run_loss<Var>(cfg, model, mb, eps, spec);
    const LossBreakdown lb = terms.values();
    if (!std::isfinite(lb.total)) {
      throw NumericFailure("non-finite loss at iteration " + std::to_string(it) + " in: " + non_finite_terms(lb));
    }
    if (lb.total > 1e6) {
      throw NumericFailure("diverged at iteration " + std::to_string(it) + ": total loss " + std::to_string(lb.total));
    }
    const auto grad = tape.reverse_sweep(terms.total);
    for (double g : grad) {
      if (!std::isfinite(g)) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "non-finite gradient at iteration %ld (kinetic %.3e mass %.3e poisson %.3e)", it,
                      lb.kinetic, lb.mass, lb.poisson);
        throw NumericFailure(buf);
      }
    }

    if (it % o.log_every == 0 || it + 1 == o.iterations) {
      TrainLogRow row{it, learning_rate(o, it), lb, 0.0};
      if (cfg.wall_clock) row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      res.history.append(row);
      if (log) log << format_log_row(row) << '\n' << std::flush;
      if (opts.on_log) opts.on_log(row);
    }

    adam_step(res.triple.params(), grad, adam, it, o);
    res.iterations_run = it + 1;

    if (o.checkpoint_every > 0 && !opts.checkpoint_dir.empty() && (it + 1) % o.checkpoint_every == 0) {
      const auto p = (std::filesystem::path(opts.checkpoint_dir) / ("ckpt_" + std::to_string(it + 1) + ".bin")).string();
      save_checkpoint(p, res.triple);
      res.checkpoints.push_back(p);
    }
    if (stopper && (it + 1) % o.validate_every == 0) {
      const double v = evaluate_loss(cfg, res.triple, val_couples, ds.uses_f0, o.val_dom, o.val_ic, val_seed).total;
      const bool stop = stopper->update(v);
      if (stopper->improved()) best_params = res.triple.params();
      if (stop) {
        res.stopped_early = true;
        break;
      }
    }
  }
  if (stopper && !best_params.empty()) res.triple.params() = best_params;
  return res;
}

}  // namespace apmionet
