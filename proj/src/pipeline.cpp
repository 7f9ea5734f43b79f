#include "brand/pipeline.hpp"

#include <charconv>
#include <functional>

#include "brand/error.hpp"

namespace brand::pipeline {

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidArgument, "config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "on" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "off" || text == "no") return false;
  throw Error(ErrorCode::InvalidArgument, "config key '" + key + "': expected a boolean, got '" + text + "'");
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t root, SeedStream stream) {
  return derive_seed(root, static_cast<std::uint64_t>(stream));
}

void RunConfig::apply(const io::KeyValues& values) {
  using Setter = std::function<void(const std::string&, const std::string&)>;
  auto real = [](double& field) -> Setter { return [&field](const auto& k, const auto& v) { field = parse_number<double>(k, v); }; };
  auto integer = [](int& field) -> Setter { return [&field](const auto& k, const auto& v) { field = parse_number<int>(k, v); }; };
  auto text = [](std::string& field) -> Setter { return [&field](const auto&, const auto& v) { field = v; }; };
  const std::map<std::string, Setter> setters = {
      {"seed", [this](const auto& k, const auto& v) { seed = parse_number<std::uint64_t>(k, v); }},
      {"eta", real(eta)},
      {"n_starts", integer(n_starts)},
      {"max_csteps", integer(max_csteps)},
      {"max_condition", real(max_condition)},
      {"mrcd_rho", real(mrcd_rho)},
      {"n_iter", integer(n_iter)},
      {"n_burnin", integer(n_burnin)},
      {"kappa", real(kappa)},
      {"a0", real(a0)},
      {"gamma", real(gamma)},
      {"gamma_prior", [this](const auto& k, const auto& v) { gamma_prior = parse_bool(k, v); }},
      {"gamma_shape", real(gamma_shape)},
      {"gamma_rate", real(gamma_rate)},
      {"atom_thin", integer(atom_thin)},
      {"lambda_tr", real(lambda_tr)},
      {"nu_tr", real(nu_tr)},
      {"base_lambda", real(base_lambda)},
      {"base_nu", real(base_nu)},
      {"base_scale", real(base_scale)},
      {"freeze_threshold", real(freeze_threshold)},
      {"n_basis", integer(n_basis)},
      {"order", integer(order)},
      {"a_tau", real(a_tau)},
      {"b_tau", real(b_tau)},
      {"s2", real(s2)},
      {"a_H", real(a_H)},
      {"b_H", real(b_H)},
      {"phi", real(phi)},
      {"v", real(v)},
      {"layout", text(layout)},
      {"ppn_threshold", real(ppn_threshold)},
      {"min_size", integer(min_size)},
      {"trace_format", text(trace_format)},
  };
  for (const auto& [key, value] : values) {
    if (key.starts_with("eta.")) {
      class_eta[parse_number<int>(key, key.substr(4))] = parse_number<double>(key, value);
      continue;
    }
    const auto it = setters.find(key);
    if (it == setters.end()) throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    it->second(key, value);
  }
  if (trace_format != "bin" && trace_format != "csv") {
    throw Error(ErrorCode::InvalidArgument, "trace_format must be bin or csv");
  }
  io::parse_layout(layout);
}

io::Json RunConfig::to_json() const {
  io::Json eta_map = io::Json::object();
  for (const auto& [j, e] : class_eta) eta_map[std::to_string(j)] = e;
  return io::Json{
      {"seed", seed},           {"eta", eta},
      {"class_eta", eta_map},   {"n_starts", n_starts},
      {"max_csteps", max_csteps}, {"max_condition", max_condition},
      {"mrcd_rho", mrcd_rho},   {"n_iter", n_iter},
      {"n_burnin", n_burnin},   {"kappa", kappa},
      {"a0", a0},               {"gamma", gamma},
      {"gamma_prior", gamma_prior}, {"gamma_shape", gamma_shape},
      {"gamma_rate", gamma_rate}, {"atom_thin", atom_thin},
      {"lambda_tr", lambda_tr}, {"nu_tr", nu_tr},
      {"base_lambda", base_lambda}, {"base_nu", base_nu},
      {"base_scale", base_scale}, {"freeze_threshold", freeze_threshold},
      {"n_basis", n_basis},     {"order", order},
      {"a_tau", a_tau},         {"b_tau", b_tau},
      {"s2", s2},               {"a_H", a_H},
      {"b_H", b_H},             {"phi", phi},
      {"v", v},                 {"layout", layout},
      {"ppn_threshold", ppn_threshold}, {"min_size", min_size},
      {"trace_format", trace_format},
  };
}

McdConfig RunConfig::mcd() const {
  McdConfig cfg;
  cfg.eta = eta;
  cfg.n_starts = n_starts;
  cfg.max_csteps = max_csteps;
  cfg.max_condition = max_condition;
  if (mrcd_rho >= 0.0) cfg.mrcd_rho = mrcd_rho;
  cfg.class_eta = class_eta;
  cfg.seed = stream_seed(seed, SeedStream::RobustPrior);
  return cfg;
}

ChainControls RunConfig::chain(std::span<const int> class_sizes) const {
  ChainControls c;
  c.a = default_weights(class_sizes, a0);
  c.gamma = gamma;
  if (gamma_prior) c.gamma_prior = GammaPrior{gamma_shape, gamma_rate};
  c.kappa = kappa;
  c.n_iter = n_iter;
  c.n_burnin = n_burnin;
  c.atom_thin = atom_thin;
  c.seed = stream_seed(seed, SeedStream::Chain);
  return c;
}

Hyperparameters RunConfig::hyperparameters(std::span<const int> class_sizes, int dim) const {
  Hyperparameters hp;
  hp.chain = chain(class_sizes);
  hp.lambda_tr = lambda_tr;
  hp.nu_tr = nu_tr;
  hp.base_measure = default_base_measure(dim, base_scale);
  hp.base_measure.precision_scale = base_lambda;
  hp.base_measure.dof = base_nu;
  hp.freeze_threshold = freeze_threshold;
  return hp;
}

functional::BasisSpec RunConfig::basis() const {
  functional::BasisSpec spec;
  spec.n_basis = n_basis;
  spec.order = order;
  return spec;
}

functional::FunctionalHyper RunConfig::functional_hyper(std::span<const int> class_sizes) const {
  functional::FunctionalHyper h;
  h.chain = chain(class_sizes);
  h.a_tau = a_tau;
  h.b_tau = b_tau;
  h.s2 = s2;
  h.a_H = a_H;
  h.b_H = b_H;
  h.basis = basis();
  return h;
}

PostprocessConfig RunConfig::postprocess() const {
  PostprocessConfig p;
  p.ppn_threshold = ppn_threshold;
  if (min_size > 0) p.min_size = min_size;
  return p;
}

std::vector<RobustClassSummary> extract_priors(const LabeledDataset& train, const RunConfig& cfg) {
  return extract_class_priors(train, cfg.mcd());
}

FitResult fit(const LabeledDataset& train, const TestDataset& test, const RunConfig& cfg, const std::vector<int>* truth) {
  train.validate();
  if (test.dim() != train.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "test data has " + std::to_string(test.dim()) + " columns, training data " +
                                                  std::to_string(train.dim()));
  }
  FitResult out;
  out.priors = extract_priors(train, cfg);
  const auto sizes = train.class_sizes();
  out.chain = run_chain(test, out.priors, cfg.hyperparameters(sizes, train.dim()));
  out.summary = summarize(out.chain, cfg.postprocess());
  if (truth) out.summary.metrics = evaluate(out.summary.labels, *truth, train.n_classes());
  return out;
}

FunctionalFitResult fit_functional(const functional::CurveSet& train, const functional::CurveSet& test,
                                   const RunConfig& cfg, const std::vector<int>* truth) {
  FunctionalFitResult out;
  out.priors = functional::extract_functional_priors(train, cfg.basis(), cfg.mcd(), cfg.phi, cfg.v);
  const LabeledDataset labels_only{Matrix(train.n_curves(), 0), train.labels};
  const auto sizes = labels_only.class_sizes();
  out.chain = functional::run_functional_chain(test, out.priors, cfg.functional_hyper(sizes));
  out.summary = summarize(out.chain, cfg.postprocess());
  if (truth) out.summary.metrics = evaluate(out.summary.labels, *truth, static_cast<int>(out.priors.size()));
  int top = 0;
  for (int l : out.summary.labels) top = std::max(top, l);
  out.label_means = functional::group_mean_curves(test.values, out.summary.labels, top);
  return out;
}

}  // namespace brand::pipeline
