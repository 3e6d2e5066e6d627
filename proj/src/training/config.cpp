#include "apmionet/training/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace apmionet {

namespace pt = boost::property_tree;

EpsilonProfile ExperimentConfig::epsilon_profile() const {
  if (epsilon_mode == "mixing") {
    const double e0 = eps0;
    return [e0](double x) { return mixing_epsilon(x, e0); };
  }
  return constant_epsilon(epsilon);
}

CrossSection ExperimentConfig::cross_section_kernel() const {
  if (cross_section == "anisotropic") return psi_anisotropic;
  if (cross_section == "unit") return [](double, double) { return 1.0; };
  throw std::invalid_argument("unknown cross_section '" + cross_section + "'");
}

CollisionSpec ExperimentConfig::collision_spec() const {
  return CollisionSpec(collision, gauss_legendre(quad_nodes, domain.v_min, domain.v_max), cross_section_kernel());
}

InitialCondition ExperimentConfig::initial_condition(double h, double alpha) const {
  return initial_conditions(problem, h, alpha, k, domain.v_min, domain.v_max);
}

void ExperimentConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("config: " + what);
  };
  need(epsilon_mode == "constant" || epsilon_mode == "mixing", "epsilon must be a number or 'mixing'");
  need(epsilon >= 0.0 && eps0 >= 0.0, "epsilon must be nonnegative");
  need(loss == "ap" || loss == "pi", "loss must be 'ap' or 'pi'");
  need(k > 0.0, "k must be positive");
  need(domain.T > 0.0 && domain.period > 0.0 && domain.v_max > domain.v_min, "empty domain");
  need(quad_nodes >= 1, "quad_nodes must be >= 1");
  need(sampling.h_min <= sampling.h_max && sampling.alpha_min <= sampling.alpha_max, "empty sampling range");
  need(sampling.n_train >= 1 && sampling.n_test >= 0, "n_train must be >= 1");
  need(sampling.fixed || sampling.n_train == 4 * sampling.n_test, "n_train : n_test must be 4 : 1");
  need(sampling.sensors_x >= 2 && sampling.sensors_v >= 2, "at least two sensors per direction");
  need(sampling.n_dom >= 1 && sampling.n_init >= 1, "collocation counts must be >= 1");
  weights.validate();
  need(pi_weights.mu1 >= 0 && pi_weights.mu2 >= 0 && pi_weights.mu3 >= 0, "baseline weights must be >= 0");
  const auto& o = optimizer;
  need(o.lr0 > 0 && o.decay > 0 && o.decay <= 1 && o.decay_every >= 1, "bad learning-rate schedule");
  need(o.beta1 >= 0 && o.beta1 < 1 && o.beta2 >= 0 && o.beta2 < 1 && o.eps > 0, "bad Adam constants");
  need(o.iterations >= 0 && o.batch_dom >= 1 && o.batch_ic >= 1 && o.log_every >= 1, "bad iteration settings");
  need(o.checkpoint_every >= 0 && o.patience >= 0 && o.validate_every >= 1, "bad cadence settings");
  need(network.hidden_layers >= 1 && network.width >= 1 && network.p >= 1 && network.modes >= 1, "bad network size");
  need(reference.nx >= 8 && reference.nv >= 8 && reference.cfl > 0 && reference.dt_out > 0, "bad reference grid");
  need(threads >= 1, "threads must be >= 1");
  if (epsilon_mode == "mixing") need(domain.x_min >= -1.0 && domain.x_min + domain.period <= 1.0, "mixing profile needs x in [-1, 1]");
}

namespace {

double to_double(const std::string& key, const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size()) throw std::invalid_argument("config: " + key + " expects a number, got '" + s + "'");
  return v;
}

long long to_int(const std::string& key, const std::string& s) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size()) throw std::invalid_argument("config: " + key + " expects an integer, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("config: " + key + " expects true/false, got '" + s + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

Setter num(double ExperimentConfig::*m) {
  return [m](ExperimentConfig& c, const std::string& k, const std::string& s) { c.*m = to_double(k, s); };
}
template <class S>
Setter num(S ExperimentConfig::*sect, double S::*m) {
  return [sect, m](ExperimentConfig& c, const std::string& k, const std::string& s) { (c.*sect).*m = to_double(k, s); };
}
template <class S>
Setter integer(S ExperimentConfig::*sect, int S::*m) {
  return [sect, m](ExperimentConfig& c, const std::string& k, const std::string& s) {
    (c.*sect).*m = static_cast<int>(to_int(k, s));
  };
}

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  using C = ExperimentConfig;
  static const std::map<std::string, std::map<std::string, Setter>> s = {
      {"problem",
       {{"id", [](C& c, const std::string&, const std::string& v) { c.problem = parse_problem(v); }},
        {"collision", [](C& c, const std::string&, const std::string& v) { c.collision = parse_collision_kind(v); }},
        {"cross_section", [](C& c, const std::string&, const std::string& v) { c.cross_section = v; }},
        {"epsilon",
         [](C& c, const std::string& k, const std::string& v) {
           if (v == "mixing") {
             c.epsilon_mode = "mixing";
           } else {
             c.epsilon_mode = "constant";
             c.epsilon = to_double(k, v);
           }
         }},
        {"eps0", num(&C::eps0)},
        {"k", num(&C::k)},
        {"loss", [](C& c, const std::string&, const std::string& v) { c.loss = v; }}}},
      {"domain",
       {{"T", num(&C::domain, &Domain::T)},
        {"x_min", num(&C::domain, &Domain::x_min)},
        {"period", num(&C::domain, &Domain::period)},
        {"v_min", num(&C::domain, &Domain::v_min)},
        {"v_max", num(&C::domain, &Domain::v_max)},
        {"quad_nodes", [](C& c, const std::string& k, const std::string& v) { c.quad_nodes = static_cast<int>(to_int(k, v)); }}}},
      {"sampling",
       {{"h_min", num(&C::sampling, &SamplingConfig::h_min)},
        {"h_max", num(&C::sampling, &SamplingConfig::h_max)},
        {"alpha_min", num(&C::sampling, &SamplingConfig::alpha_min)},
        {"alpha_max", num(&C::sampling, &SamplingConfig::alpha_max)},
        {"n_train", integer(&C::sampling, &SamplingConfig::n_train)},
        {"n_test", integer(&C::sampling, &SamplingConfig::n_test)},
        {"sensors_x", integer(&C::sampling, &SamplingConfig::sensors_x)},
        {"sensors_v", integer(&C::sampling, &SamplingConfig::sensors_v)},
        {"n_dom", integer(&C::sampling, &SamplingConfig::n_dom)},
        {"n_init", integer(&C::sampling, &SamplingConfig::n_init)},
        {"fixed", [](C& c, const std::string& k, const std::string& v) { c.sampling.fixed = to_bool(k, v); }},
        {"fixed_h", num(&C::sampling, &SamplingConfig::fixed_h)},
        {"fixed_alpha", num(&C::sampling, &SamplingConfig::fixed_alpha)}}},
      {"weights",
       {{"lambda1", num(&C::weights, &PenaltyWeights::lambda1)},
        {"lambda2", num(&C::weights, &PenaltyWeights::lambda2)},
        {"lambda3_rho", num(&C::weights, &PenaltyWeights::lambda3_rho)},
        {"lambda3_f", num(&C::weights, &PenaltyWeights::lambda3_f)},
        {"lambda3_phi", num(&C::weights, &PenaltyWeights::lambda3_phi)},
        {"lambda4", num(&C::weights, &PenaltyWeights::lambda4)},
        {"mu1", num(&C::pi_weights, &PiWeights::mu1)},
        {"mu2", num(&C::pi_weights, &PiWeights::mu2)},
        {"mu3", num(&C::pi_weights, &PiWeights::mu3)}}},
      {"optimizer",
       {{"lr0", num(&C::optimizer, &OptimizerConfig::lr0)},
        {"decay", num(&C::optimizer, &OptimizerConfig::decay)},
        {"decay_every", integer(&C::optimizer, &OptimizerConfig::decay_every)},
        {"beta1", num(&C::optimizer, &OptimizerConfig::beta1)},
        {"beta2", num(&C::optimizer, &OptimizerConfig::beta2)},
        {"eps", num(&C::optimizer, &OptimizerConfig::eps)},
        {"iterations", integer(&C::optimizer, &OptimizerConfig::iterations)},
        {"batch_dom", integer(&C::optimizer, &OptimizerConfig::batch_dom)},
        {"batch_ic", integer(&C::optimizer, &OptimizerConfig::batch_ic)},
        {"log_every", integer(&C::optimizer, &OptimizerConfig::log_every)},
        {"checkpoint_every", integer(&C::optimizer, &OptimizerConfig::checkpoint_every)},
        {"patience", integer(&C::optimizer, &OptimizerConfig::patience)},
        {"validate_every", integer(&C::optimizer, &OptimizerConfig::validate_every)},
        {"val_dom", integer(&C::optimizer, &OptimizerConfig::val_dom)},
        {"val_ic", integer(&C::optimizer, &OptimizerConfig::val_ic)}}},
      {"network",
       {{"hidden_layers", integer(&C::network, &NetworkConfig::hidden_layers)},
        {"width", integer(&C::network, &NetworkConfig::width)},
        {"p", integer(&C::network, &NetworkConfig::p)},
        {"modes", integer(&C::network, &NetworkConfig::modes)}}},
      {"reference",
       {{"nx", integer(&C::reference, &ReferenceConfig::nx)},
        {"nv", integer(&C::reference, &ReferenceConfig::nv)},
        {"cfl", num(&C::reference, &ReferenceConfig::cfl)},
        {"dt_out", num(&C::reference, &ReferenceConfig::dt_out)}}},
      {"runtime",
       {{"seed",
         [](C& c, const std::string& k, const std::string& v) {
           const long long s = to_int(k, v);
           if (s < 0) throw std::invalid_argument("config: seed must be nonnegative");
           c.seed = static_cast<std::uint64_t>(s);
         }},
        {"threads", [](C& c, const std::string& k, const std::string& v) { c.threads = static_cast<int>(to_int(k, v)); }},
        {"wall_clock", [](C& c, const std::string& k, const std::string& v) { c.wall_clock = to_bool(k, v); }}}},
  };
  return s;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.message() + " at line " + std::to_string(e.line()));
  }
  const auto& sch = schema();
  // problem-dependent defaults, then explicit keys
  ExperimentConfig c;
  if (auto p = tree.get_optional<std::string>("problem.id")) c.problem = parse_problem(*p);
  if (auto k = tree.get_optional<std::string>("problem.k")) c.k = to_double("problem.k", *k);
  c.domain = default_domain(c.problem, c.k);
  if (c.problem == ProblemId::mixing) {
    c.epsilon_mode = "mixing";
    c.sampling.h_min = 0.80;
    c.sampling.h_max = 0.85;
    c.collision = CollisionKind::Degenerate;
  }
  for (const auto& [section, body] : tree) {
    const auto sit = sch.find(section);
    if (sit == sch.end()) {
      if (!body.data().empty()) throw std::invalid_argument("config: key outside a section: " + section);
      throw std::invalid_argument("config: unknown section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      const auto kit = sit->second.find(key);
      if (kit == sit->second.end()) throw std::invalid_argument("config: unknown key " + section + "." + key);
      kit->second(c, section + "." + key, node.data());
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

}  // namespace apmionet
