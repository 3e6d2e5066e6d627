#include "apmionet/cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "apmionet/cli/artifacts.hpp"
#include "apmionet/diffcore/errors.hpp"
#include "apmionet/refsolver/limit.hpp"
#include "apmionet/training/trainer.hpp"

namespace apmionet {

namespace fs = std::filesystem;

ReferenceSolver parse_reference_solver(const std::string& s) {
  if (s == "auto") return ReferenceSolver::Auto;
  if (s == "kinetic") return ReferenceSolver::Kinetic;
  if (s == "limit") return ReferenceSolver::Limit;
  throw std::invalid_argument("unknown solver '" + s + "' (auto, kinetic, limit)");
}

RefProblem reference_problem(const ExperimentConfig& cfg, double h, double alpha) {
  RefProblem p;
  p.name = to_string(cfg.problem);
  p.ic = cfg.initial_condition(h, alpha);
  p.alpha = alpha;
  p.collision = cfg.collision;
  p.psi = cfg.cross_section_kernel();
  p.epsilon = cfg.epsilon_profile();
  if (cfg.epsilon_mode == "mixing") {
    p.epsilon_label = "mixing";
  } else {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", cfg.epsilon);
    p.epsilon_label = buf;
  }
  return p;
}

PhaseGrid reference_grid(const ExperimentConfig& cfg) {
  const auto& d = cfg.domain;
  return PhaseGrid(cfg.reference.nx, cfg.reference.nv, d.x_min, d.period, d.v_min, d.v_max);
}

SolutionField run_reference(const ExperimentConfig& cfg, double h, double alpha, ReferenceSolver solver) {
  if (solver == ReferenceSolver::Auto) {
    solver = cfg.epsilon_mode == "constant" && cfg.epsilon < 1e-2 ? ReferenceSolver::Limit : ReferenceSolver::Kinetic;
  }
  TimeOptions o;
  o.cfl = cfg.reference.cfl;
  o.dt_out = cfg.reference.dt_out;
  const auto prob = reference_problem(cfg, h, alpha);
  if (solver == ReferenceSolver::Limit) return highfield_limit_solve(prob, reference_grid(cfg), cfg.domain.T, o);
  return kinetic_integrate(prob, reference_grid(cfg), cfg.domain.T, o);
}

FieldMetrics compare_fields(const RowMat& rho, const RowMat& E, const SolutionField& ref) {
  FieldMetrics m;
  m.rho = relative_l2(rho, ref.rho);
  m.E = relative_l2(E, ref.E);
  const auto ep = electric_energy(E, ref.grid.dx());
  const auto er = electric_energy(ref.E, ref.grid.dx());
  m.energy = relative_l2(Eigen::Map<const RowMat>(ep.data(), 1, static_cast<Eigen::Index>(ep.size())),
                         Eigen::Map<const RowMat>(er.data(), 1, static_cast<Eigen::Index>(er.size())));
  return m;
}

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

struct Context {
  ExperimentConfig cfg;
  std::uint64_t seed = 0;
  ManifestInfo manifest;
};

Context open_context(const std::string& command, const Common& c) {
  Context ctx;
  ctx.cfg = load_config(c.config);
  if (c.seed) ctx.cfg.seed = *c.seed;
  ctx.seed = ctx.cfg.seed;
  fs::create_directories(c.out);
  ctx.manifest.command = command;
  ctx.manifest.config_path = c.config;
  ctx.manifest.config_sha1 = git_blob_sha1_file(c.config);
  ctx.manifest.seed = ctx.seed;
  ctx.manifest.out_dir = c.out;
  ctx.manifest.started = utc_timestamp();
  return ctx;
}

void finish(Context& ctx) {
  ctx.manifest.finished = utc_timestamp();
  write_manifest(ctx.manifest);
}

std::string out_path(const Common& c, const std::string& name) { return (fs::path(c.out) / name).string(); }

Dataset dataset_for(const Context& ctx, const std::string& path) {
  return path.empty() ? sample_dataset(ctx.cfg, ctx.seed) : load_dataset(path);
}

void cmd_generate(const Common& c) {
  auto ctx = open_context("generate", c);
  const auto ds = sample_dataset(ctx.cfg, ctx.seed);
  save_dataset(out_path(c, "dataset.bin"), ds);
  std::cout << "generated " << ds.train.size() << " training and " << ds.test.size() << " test couples\n";
  finish(ctx);
}

void cmd_train(const Common& c, const std::string& dataset, bool baseline, std::optional<int> iterations) {
  auto ctx = open_context("train", c);
  if (baseline) ctx.cfg.loss = "pi";
  if (iterations) ctx.cfg.optimizer.iterations = *iterations;
  const auto ds = dataset_for(ctx, dataset);
  TrainOptions o;
  o.log_csv = out_path(c, "train_log.csv");
  o.checkpoint_dir = out_path(c, "checkpoints");
  o.on_log = [](const TrainLogRow& r) {
    std::printf("iter %ld lr %.3e total %.4e kinetic %.3e mass %.3e poisson %.3e\n", r.iter, r.lr, r.loss.total,
                r.loss.kinetic, r.loss.mass, r.loss.poisson);
    std::fflush(stdout);
  };
  const auto res = train(ctx.cfg, ds, o);
  save_checkpoint(out_path(c, "checkpoint.bin"), res.triple);
  std::cout << "trained " << res.iterations_run << " iterations" << (res.stopped_early ? " (early stop)" : "") << '\n';
  finish(ctx);
}

void cmd_reference(const Common& c, const std::string& dataset, const std::string& solver, int max_couples) {
  auto ctx = open_context("reference", c);
  const auto which = parse_reference_solver(solver);
  const auto ds = dataset_for(ctx, dataset);
  const auto& couples = ds.test.empty() ? ds.train : ds.test;
  const int n = max_couples > 0 ? std::min<int>(max_couples, static_cast<int>(couples.size()))
                                : static_cast<int>(couples.size());
  for (int i = 0; i < n; ++i) {
    const auto& u = couples[static_cast<std::size_t>(i)];
    const auto field = run_reference(ctx.cfg, u.h, u.alpha, which);
    char name[32];
    std::snprintf(name, sizeof name, "reference_%03d", i);
    save_field(out_path(c, std::string(name) + ".bin"), field);
    write_field_csv(out_path(c, std::string(name) + ".csv"), field);
    std::printf("reference %d: h %.6f alpha %.6f, %zu times\n", i, u.h, u.alpha, field.times.size());
  }
  finish(ctx);
}

std::vector<std::string> expand_fields(const std::vector<std::string>& inputs) {
  std::vector<std::string> out;
  for (const auto& p : inputs) {
    if (fs::is_directory(p)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.path().extension() == ".bin" && e.path().filename().string().rfind("reference_", 0) == 0) {
          found.push_back(e.path().string());
        }
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  if (out.empty()) throw UsageError("no reference fields given");
  return out;
}

Prediction model_prediction(const ExperimentConfig& cfg, const OperatorTriple& triple, const SolutionField& ref) {
  const bool with_f0 = cfg.problem != ProblemId::mixing;
  const auto couple = make_couple(cfg, ref.h, ref.alpha);
  return predict_fields(cfg, triple, couple, with_f0, ref.times, ref.grid.xs());
}

void cmd_evaluate(const Common& c, const std::string& checkpoint, const std::vector<std::string>& predictions,
                  const std::vector<std::string>& references) {
  if (checkpoint.empty() == predictions.empty()) throw UsageError("give exactly one of --checkpoint or --prediction");
  auto ctx = open_context("evaluate", c);
  const auto refs = expand_fields(references);
  std::vector<std::string> preds;
  if (!predictions.empty()) {
    preds = expand_fields(predictions);
    if (preds.size() != refs.size()) throw UsageError("prediction and reference counts differ");
  }
  std::optional<OperatorTriple> triple;
  if (!checkpoint.empty()) triple = load_checkpoint(checkpoint);
  FieldMetrics sum;
  std::string problem, epsilon;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto ref = load_field(refs[i]);
    FieldMetrics m;
    if (triple) {
      const auto p = model_prediction(ctx.cfg, *triple, ref);
      m = compare_fields(p.rho, p.E, ref);
    } else {
      const auto p = load_field(preds[i]);
      m = compare_fields(p.rho, p.E, ref);
    }
    sum.rho += m.rho;
    sum.E += m.E;
    sum.energy += m.energy;
    problem = ref.problem;
    epsilon = triple ? reference_problem(ctx.cfg, 1.0, 0.0).epsilon_label : ref.epsilon;
  }
  const double n = static_cast<double>(refs.size());
  std::ofstream os(out_path(c, "metrics.csv"), std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write metrics.csv");
  os << "metric,value,problem,epsilon,n_test\n";
  const std::pair<const char*, double> rows[] = {
      {"rel_l2_rho", sum.rho / n}, {"rel_l2_E", sum.E / n}, {"rel_l2_energy", sum.energy / n}};
  for (const auto& [name, v] : rows) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%.10e,%s,%s,%zu\n", name, v, problem.c_str(), epsilon.c_str(), refs.size());
    os << buf;
    std::cout << buf;
  }
  os.close();
  finish(ctx);
}

void write_table(const std::string& path, const std::string& header, const std::vector<std::vector<double>>& cols) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot write " + path);
  std::fprintf(fp, "%s\n", header.c_str());
  for (std::size_t r = 0; r < cols.front().size(); ++r) {
    for (std::size_t k = 0; k < cols.size(); ++k) std::fprintf(fp, k ? ",%.12e" : "%.10g", cols[k][r]);
    std::fprintf(fp, "\n");
  }
  if (std::fclose(fp) != 0) throw std::runtime_error("failed writing " + path);
}

void cmd_export(const Common& c, const std::string& checkpoint, const std::string& reference) {
  auto ctx = open_context("export", c);
  const auto ref = load_field(reference);
  std::optional<Prediction> pred;
  if (!checkpoint.empty()) pred = model_prediction(ctx.cfg, load_checkpoint(checkpoint), ref);
  const auto nt = ref.times.size();
  const auto nx = static_cast<std::size_t>(ref.grid.nx());

  std::vector<std::vector<double>> dens(pred ? 4 : 3), field(pred ? 4 : 3);
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t i = 0; i < nx; ++i) {
      const auto r = static_cast<Eigen::Index>(t);
      const auto k = static_cast<Eigen::Index>(i);
      for (auto* tab : {&dens, &field}) {
        (*tab)[0].push_back(ref.times[t]);
        (*tab)[1].push_back(ref.grid.x(static_cast<int>(i)));
      }
      dens[2].push_back(ref.rho(r, k));
      field[2].push_back(ref.E(r, k));
      if (pred) {
        dens[3].push_back(pred->rho(r, k));
        field[3].push_back(pred->E(r, k));
      }
    }
  }
  write_table(out_path(c, "density.csv"), pred ? "t,x,rho_ref,rho_pred" : "t,x,rho_ref", dens);
  write_table(out_path(c, "field.csv"), pred ? "t,x,E_ref,E_pred" : "t,x,E_ref", field);

  const auto er = electric_energy(ref.E, ref.grid.dx());
  std::vector<std::vector<double>> energy{ref.times, er};
  std::vector<LineSeries> lines{{ref.times, er}};
  if (pred) {
    const auto ep = electric_energy(pred->E, ref.grid.dx());
    energy.push_back(ep);
    lines.push_back({ref.times, ep});
  }
  write_table(out_path(c, "energy.csv"), pred ? "t,energy_ref,energy_pred" : "t,energy_ref", energy);
  write_lines_png(out_path(c, "energy.png"), lines, true);

  const auto last = static_cast<Eigen::Index>(nt - 1);
  std::vector<std::vector<double>> prof{ref.grid.xs(), {}, {}};
  for (std::size_t i = 0; i < nx; ++i) {
    prof[1].push_back(ref.rho(last, static_cast<Eigen::Index>(i)));
    prof[2].push_back(ref.E(last, static_cast<Eigen::Index>(i)));
  }
  std::vector<LineSeries> rho_lines{{prof[0], prof[1]}};
  if (pred) {
    prof.emplace_back();
    prof.emplace_back();
    for (std::size_t i = 0; i < nx; ++i) {
      prof[3].push_back(pred->rho(last, static_cast<Eigen::Index>(i)));
      prof[4].push_back(pred->E(last, static_cast<Eigen::Index>(i)));
    }
    rho_lines.push_back({prof[0], prof[3]});
  }
  write_table(out_path(c, "profile_final.csv"), pred ? "x,rho_ref,E_ref,rho_pred,E_pred" : "x,rho_ref,E_ref", prof);
  write_lines_png(out_path(c, "profile_final.png"), rho_lines, false);

  write_heatmap_png(out_path(c, "density_ref.png"), ref.rho);
  write_heatmap_png(out_path(c, "field_ref.png"), ref.E);
  if (pred) {
    write_heatmap_png(out_path(c, "density_pred.png"), pred->rho);
    write_heatmap_png(out_path(c, "field_pred.png"), pred->E);
    write_heatmap_png(out_path(c, "density_error.png"), (pred->rho - ref.rho).cwiseAbs());
  }
  std::cout << "exported " << nt << " time levels\n";
  finish(ctx);
}

std::set<fs::path> snapshot(const std::string& dir) {
  std::set<fs::path> s;
  std::error_code ec;
  if (!fs::exists(dir, ec)) return s;
  for (const auto& e : fs::recursive_directory_iterator(dir, ec)) s.insert(e.path());
  return s;
}

// Removes everything below dir that was not there before the command.
void remove_partial(const std::string& dir, const std::set<fs::path>& before, bool dir_existed) {
  std::error_code ec;
  if (dir.empty() || !fs::exists(dir, ec)) return;
  if (!dir_existed) {
    fs::remove_all(dir, ec);
    return;
  }
  std::vector<fs::path> added;
  for (const auto& e : fs::recursive_directory_iterator(dir, ec)) {
    if (!before.count(e.path())) added.push_back(e.path());
  }
  std::sort(added.rbegin(), added.rend());
  for (const auto& p : added) fs::remove_all(p, ec);
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '"', '\'');
  return s;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"AP-MIONet operator learning and reference solvers"};
  app.require_subcommand(1);
  Common common;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "INI configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Random seed (overrides runtime.seed)");
    sub->add_option("--out", common.out, "Output directory")->required();
  };
  auto* gen = app.add_subcommand("generate", "Sample the input-couple dataset");
  add_common(gen);

  auto* tr = app.add_subcommand("train", "Train the operator networks");
  add_common(tr);
  std::string dataset;
  bool baseline = false;
  int iterations = -1;
  tr->add_option("--dataset", dataset, "Dataset written by generate (default: sample from the config)");
  tr->add_flag("--baseline-pi", baseline, "Use the non-AP physics-informed loss");
  tr->add_option("--iterations", iterations, "Override optimizer.iterations")->check(CLI::NonNegativeNumber);

  auto* ref = app.add_subcommand("reference", "Classical reference solutions for the test couples");
  add_common(ref);
  std::string solver = "auto";
  int max_couples = 0;
  ref->add_option("--dataset", dataset, "Dataset written by generate");
  ref->add_option("--solver", solver, "auto, kinetic or limit");
  ref->add_option("--max-couples", max_couples, "Solve only the first N couples (0 = all)");

  auto* ev = app.add_subcommand("evaluate", "Relative errors against reference fields");
  add_common(ev);
  std::string checkpoint;
  std::vector<std::string> predictions, references;
  ev->add_option("--checkpoint", checkpoint, "Trained checkpoint")->check(CLI::ExistingFile);
  ev->add_option("--prediction", predictions, "Predicted fields (files or directories)");
  ev->add_option("--reference", references, "Reference fields (files or directories)")->required();

  auto* ex = app.add_subcommand("export", "Figure data and images");
  add_common(ex);
  std::string reference;
  ex->add_option("--checkpoint", checkpoint, "Trained checkpoint")->check(CLI::ExistingFile);
  ex->add_option("--reference", reference, "Reference field")->required()->check(CLI::ExistingFile);

  std::string command = "none";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    for (auto* s : app.get_subcommands()) command = s->get_name();
    std::cout << "status=usage_error command=" << command << " exit=1 cause=\"" << one_line(e.what()) << "\"\n";
    return 1;
  }
  command = app.get_subcommands().front()->get_name();
  if (app.get_subcommands().front()->count("--seed") > 0) common.seed = seed;

  const bool existed = !common.out.empty() && fs::exists(common.out);
  const auto before = snapshot(common.out);
  int code = 0;
  std::string status = "ok";
  std::string cause;
  try {
    if (command == "generate") cmd_generate(common);
    if (command == "train") cmd_train(common, dataset, baseline, iterations >= 0 ? std::optional<int>(iterations) : std::nullopt);
    if (command == "reference") cmd_reference(common, dataset, solver, max_couples);
    if (command == "evaluate") cmd_evaluate(common, checkpoint, predictions, references);
    if (command == "export") cmd_export(common, checkpoint, reference);
  } catch (const NumericFailure& e) {
    code = 2;
    status = "numeric_failure";
    cause = e.what();
  } catch (const std::exception& e) {
    code = 1;
    status = "error";
    cause = e.what();
  }
  if (code != 0) {
    remove_partial(common.out, before, existed);
    std::cerr << command << ": " << one_line(cause) << '\n';
    std::cout << "status=" << status << " command=" << command << " exit=" << code << " cause=\"" << one_line(cause)
              << "\"\n";
    return code;
  }
  std::cout << "status=ok command=" << command << " exit=0 out=" << common.out << '\n';
  return 0;
}

}  // namespace apmionet
