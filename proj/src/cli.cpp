#include "sgdinfer/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "sgdinfer/baselines.hpp"
#include "sgdinfer/experiments.hpp"
#include "sgdinfer/io.hpp"
#include "sgdinfer/parallel.hpp"
#include "sgdinfer/solver.hpp"

namespace sgdinfer::cli {

using nlohmann::json;

namespace {

enum class KeyType { Int, UInt, Real, String, RealList, IntList };

struct KeySpec {
  const char* name;
  KeyType type;
  const char* help;
};

constexpr KeySpec kKeys[] = {
    {"seed", KeyType::UInt, "master seed (required)"},
    {"level", KeyType::Real, "confidence level"},
    {"out", KeyType::String, "output directory"},
    {"generator", KeyType::String, "normal_mean|exponential|poisson|linear_exp1|linear_exp2|logistic_exp1|logistic_exp2"},
    {"input", KeyType::String, "CSV dataset (header row, response column y)"},
    {"family", KeyType::String, "mean|linear|logistic|logistic_modified|exponential|poisson"},
    {"n", KeyType::Int, "sample size"},
    {"p", KeyType::Int, "dimension"},
    {"sigma", KeyType::Real, "linear noise standard deviation"},
    {"rho", KeyType::Real, "Toeplitz correlation"},
    {"signal", KeyType::Real, "logistic class-mean scale"},
    {"lambda", KeyType::Real, "univariate rate"},
    {"c", KeyType::Real, "modified logistic offset"},
    {"psi_mode", KeyType::String, "with_replacement|without_replacement"},
    {"eta", KeyType::Real, "step size"},
    {"t", KeyType::Int, "averaged iterates per segment"},
    {"d", KeyType::Int, "discarded iterates per segment"},
    {"b", KeyType::Int, "burn-in steps"},
    {"r", KeyType::Int, "number of segments"},
    {"batch", KeyType::Int, "mini-batch size"},
    {"s_psi", KeyType::Int, "modified logistic Psi batch size"},
    {"s_upsilon", KeyType::Int, "modified logistic Upsilon batch size"},
    {"theta_hat", KeyType::String, "segment_mean|newton"},
    {"method", KeyType::String, "sgd|bootstrap|normal"},
    {"covariance", KeyType::String, "sandwich|inverse_fisher"},
    {"replicates", KeyType::Int, "bootstrap replicates"},
    {"sims", KeyType::Int, "number of simulations"},
    {"coord", KeyType::Int, "coordinate to export"},
    {"points", KeyType::String, "CSV of feature rows to predict at"},
    {"etas", KeyType::RealList, "step sizes, comma separated"},
    {"ts", KeyType::IntList, "segment lengths, comma separated"},
    {"runs", KeyType::Int, "chains per cell"},
    {"burn_in", KeyType::Int, "burn-in steps per chain"},
    {"tol", KeyType::Real, "Newton gradient-norm tolerance"},
};

const KeySpec& key_spec(const std::string& name) {
  for (const auto& k : kKeys) {
    if (name == k.name) return k;
  }
  throw UsageError("unknown key '" + name + "'");
}

const std::vector<std::string> kDataKeys = {"generator", "input", "family", "n", "p", "sigma",
                                            "rho", "signal", "lambda", "c", "psi_mode"};
const std::vector<std::string> kSgdKeys = {"eta", "t", "d", "b", "r", "batch", "s_psi", "s_upsilon", "theta_hat"};

std::vector<std::string> keys_for(const std::string& sub) {
  std::vector<std::string> keys = {"seed", "out"};
  auto add = [&](const std::vector<std::string>& more) { keys.insert(keys.end(), more.begin(), more.end()); };
  if (sub == "coverage") {
    add(kDataKeys);
    add(kSgdKeys);
    add({"level", "method", "covariance", "replicates", "sims"});
  } else if (sub == "univariate") {
    add({"generator", "level", "sims"});
  } else if (sub == "covariance") {
    add(kDataKeys);
    add(kSgdKeys);
    add({"replicates"});
  } else if (sub == "qq") {
    add(kDataKeys);
    add(kSgdKeys);
    add({"coord"});
  } else if (sub == "predict") {
    add(kDataKeys);
    add(kSgdKeys);
    add({"level", "points"});
  } else if (sub == "trend") {
    add({"n", "p", "batch", "etas", "ts", "runs", "burn_in"});
  } else if (sub == "fit") {
    add(kDataKeys);
    add({"tol"});
  }
  return keys;
}

const std::vector<std::pair<std::string, std::string>> kSubcommands = {
    {"coverage", "Monte Carlo coverage and width of one inference method"},
    {"univariate", "SGD inference, bootstrap and normal approximation on a univariate law"},
    {"covariance", "covariance of the estimate by SGD inference, bootstrap, sandwich and inverse Fisher"},
    {"qq", "Q-Q pairs of SGD inference samples against the normal approximation"},
    {"predict", "prediction intervals for the linear score at given points"},
    {"trend", "error of t times the segment-average covariance over an (eta, t) path"},
    {"fit", "empirical risk minimizer and covariance estimates"},
};

json parse_scalar(const std::string& key, const std::string& raw, KeyType type) {
  try {
    std::size_t used = 0;
    switch (type) {
      case KeyType::Int: {
        const long long v = std::stoll(raw, &used);
        if (used != raw.size()) break;
        return v;
      }
      case KeyType::UInt: {
        if (!raw.empty() && raw[0] == '-') break;
        const unsigned long long v = std::stoull(raw, &used);
        if (used != raw.size()) break;
        return v;
      }
      case KeyType::Real: {
        const double v = std::stod(raw, &used);
        if (used != raw.size()) break;
        return v;
      }
      case KeyType::String: return raw;
      default: break;
    }
  } catch (const std::exception&) {
  }
  throw UsageError("invalid value '" + raw + "' for '" + key + "'");
}

json parse_flag(const std::string& key, const std::string& raw) {
  const KeyType type = key_spec(key).type;
  if (type != KeyType::RealList && type != KeyType::IntList) return parse_scalar(key, raw, type);
  json list = json::array();
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    list.push_back(parse_scalar(key, item, type == KeyType::RealList ? KeyType::Real : KeyType::Int));
  }
  return list;
}

void check_json_type(const std::string& key, const json& v) {
  const KeyType type = key_spec(key).type;
  auto fail = [&] { throw UsageError("config key '" + key + "' has the wrong type"); };
  switch (type) {
    case KeyType::Int:
      if (!v.is_number_integer()) fail();
      break;
    case KeyType::UInt:
      if (!v.is_number_unsigned()) fail();
      break;
    case KeyType::Real:
      if (!v.is_number()) fail();
      break;
    case KeyType::String:
      if (!v.is_string()) fail();
      break;
    case KeyType::RealList:
    case KeyType::IntList:
      if (!v.is_array() || v.empty()) fail();
      for (const auto& e : v) {
        if (type == KeyType::IntList ? !e.is_number_integer() : !e.is_number()) fail();
      }
      break;
  }
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw UsageError("config file must hold a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
}

// Typed accessors with defaults.
template <class T>
T get(const json& p, const char* key, T fallback) {
  return p.contains(key) ? p.at(key).get<T>() : fallback;
}

bool has(const json& p, const char* key) { return p.contains(key); }

ModelSpec build_model(const json& p, Family family) {
  ModelSpec model;
  model.family = family;
  if (family == Family::LogisticModified) {
    model.c = get<double>(p, "c", 1.0);
    model.psi_mode = parse_sampling(get<std::string>(p, "psi_mode", "with_replacement"));
  } else if (has(p, "c") || has(p, "psi_mode")) {
    throw UsageError("'c' and 'psi_mode' only apply to family logistic_modified");
  }
  model.validate();
  return model;
}

GeneratorSpec build_generator(const json& p) {
  if (has(p, "input") && has(p, "generator")) throw UsageError("'input' and 'generator' are mutually exclusive");
  GeneratorSpec spec;
  if (has(p, "input")) {
    spec = GeneratorSpec::preset(GeneratorKind::CsvFile);
    spec.csv_path = p.at("input").get<std::string>();
    if (!has(p, "family")) throw UsageError("missing required field 'family' for CSV input");
    for (const char* k : {"n", "p", "sigma", "rho", "signal", "lambda"}) {
      if (has(p, k)) throw UsageError(std::string("'") + k + "' does not apply to CSV input");
    }
  } else {
    spec = GeneratorSpec::preset(parse_generator(get<std::string>(p, "generator", "linear_exp1")));
    spec.n = get<Index>(p, "n", spec.n);
    spec.p = get<Index>(p, "p", spec.p);
    spec.sigma = get<double>(p, "sigma", spec.sigma);
    spec.rho = get<double>(p, "rho", spec.rho);
    spec.signal = get<double>(p, "signal", spec.signal);
    spec.lambda = get<double>(p, "lambda", spec.lambda);
  }
  const Family family = has(p, "family") ? parse_family(p.at("family").get<std::string>()) : spec.model.family;
  spec.model = build_model(p, family);
  spec.validate();
  return spec;
}

SgdConfig build_sgd(const json& p) {
  SgdConfig cfg = multivariate_sgd_config(get<double>(p, "eta", 0.1), get<std::int64_t>(p, "t", 500));
  cfg.d = get<std::int64_t>(p, "d", cfg.d);
  cfg.b = get<std::int64_t>(p, "b", cfg.b);
  cfg.r = get<std::int64_t>(p, "r", cfg.r);
  cfg.batch.size = get<Index>(p, "batch", cfg.batch.size);
  cfg.batch.s_psi = get<Index>(p, "s_psi", cfg.batch.s_psi);
  cfg.batch.s_upsilon = get<Index>(p, "s_upsilon", cfg.batch.s_upsilon);
  cfg.validate();
  return cfg;
}

ThetaHatSource build_theta_hat(const json& p) {
  const std::string s = get<std::string>(p, "theta_hat", "segment_mean");
  if (s == "segment_mean") return ThetaHatSource::SegmentMean;
  if (s == "newton") return ThetaHatSource::Newton;
  throw UsageError("unknown theta_hat '" + s + "'");
}

// Resolved settings written into every output file.
json provenance(const std::string& sub, const json& params, const std::optional<GeneratorSpec>& gen,
                const std::optional<SgdConfig>& sgd) {
  json cfg = params;
  cfg.erase("out");
  cfg["subcommand"] = sub;
  if (gen) {
    if (gen->kind == GeneratorKind::CsvFile) {
      cfg["input"] = gen->csv_path;
    } else {
      cfg["generator"] = to_string(gen->kind);
      cfg["n"] = gen->n;
      cfg["p"] = gen->p;
      switch (gen->kind) {
        case GeneratorKind::LinearExp1:
        case GeneratorKind::LinearExp2:
          cfg["sigma"] = gen->sigma;
          cfg["rho"] = gen->rho;
          break;
        case GeneratorKind::LogisticExp1:
        case GeneratorKind::LogisticExp2:
          cfg["signal"] = gen->signal;
          cfg["rho"] = gen->rho;
          break;
        case GeneratorKind::ExponentialData:
        case GeneratorKind::PoissonData: cfg["lambda"] = gen->lambda; break;
        default: break;
      }
    }
    cfg["family"] = to_string(gen->model.family);
  }
  if (sgd) {
    cfg["eta"] = sgd->eta;
    cfg["t"] = sgd->t;
    cfg["d"] = sgd->d;
    cfg["b"] = sgd->b;
    cfg["r"] = sgd->r;
    cfg["batch"] = sgd->batch.size;
    if (gen && gen->model.family == Family::LogisticModified) {
      cfg["s_psi"] = sgd->batch.s_psi;
      cfg["s_upsilon"] = sgd->batch.s_upsilon;
    }
  }
  return cfg;
}

std::filesystem::path output_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return std::filesystem::path(cfg.out_dir) / name;
}

void write_json(const RunConfig& cfg, const std::string& name, const json& body) {
  std::ofstream out(output_path(cfg, name));
  out << body.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + name);
}

std::ofstream open_csv(const RunConfig& cfg, const std::string& name, const json& config) {
  std::ofstream out(output_path(cfg, name));
  if (!out) throw std::runtime_error("cannot write " + name);
  out << "# config: " << config.dump() << '\n';
  return out;
}

json report_json(const ExperimentReport& r) {
  return {{"method", r.method},
          {"coverage", r.coverage},
          {"width", r.avg_width},
          {"num_sims", r.num_sims},
          {"failed", r.failed},
          {"operation_count", r.operation_count}};
}

void log_reports(std::ostream& log, const std::vector<ExperimentReport>& reports) {
  for (const auto& r : reports) {
    log << r.method << ": coverage " << r.coverage << ", width " << r.avg_width << ", failed " << r.failed << "/"
        << r.num_sims << ", " << r.runtime_seconds << " s\n";
  }
}

// One dataset for the single-dataset subcommands, drawn from stream 0.
Generated single_dataset(const GeneratorSpec& spec, std::uint64_t seed) {
  RngStream rng(seed, 0);
  return generate(spec, rng);
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t stream) { return RngStream(seed, stream)(); }

int run_coverage(const RunConfig& cfg, std::ostream& log) {
  const json& p = cfg.params;
  const GeneratorSpec gen = build_generator(p);
  const std::string method = get<std::string>(p, "method", "sgd");
  const double level = get<double>(p, "level", 0.95);
  const int sims = get<int>(p, "sims", 500);
  std::optional<SgdConfig> sgd;
  Method m;
  if (method == "sgd") {
    sgd = build_sgd(p);
    m = SgdMethod{*sgd, build_theta_hat(p)};
  } else if (method == "bootstrap") {
    BootstrapConfig boot;
    boot.replicates = get<int>(p, "replicates", 200);
    m = BootstrapMethod{boot};
  } else if (method == "normal") {
    m = NormalApproxMethod{parse_covariance_source(get<std::string>(p, "covariance", "sandwich"))};
  } else {
    throw UsageError("unknown method '" + method + "'");
  }
  const ExperimentReport r = coverage_simulation(gen, m, sims, level, p.at("seed").get<std::uint64_t>(), cfg.threads);
  log_reports(log, {r});
  json body = {{"config", provenance(cfg.subcommand, p, gen, sgd)}, {"reports", json::array({report_json(r)})}};
  write_json(cfg, "report.json", body);
  return 0;
}

int run_univariate(const RunConfig& cfg, std::ostream& log) {
  const json& p = cfg.params;
  const GeneratorKind kind = parse_generator(get<std::string>(p, "generator", "normal_mean"));
  if (kind != GeneratorKind::NormalMean && kind != GeneratorKind::ExponentialData &&
      kind != GeneratorKind::PoissonData) {
    throw UsageError("univariate needs generator normal_mean, exponential or poisson");
  }
  const auto reports = univariate_comparison(kind, get<int>(p, "sims", 500), get<double>(p, "level", 0.95),
                                             p.at("seed").get<std::uint64_t>(), cfg.threads);
  log_reports(log, reports);
  json list = json::array();
  for (const auto& r : reports) list.push_back(report_json(r));
  json config = provenance(cfg.subcommand, p, GeneratorSpec::preset(kind), std::nullopt);
  write_json(cfg, "report.json", {{"config", config}, {"reports", list}});
  return 0;
}

int run_covariance(const RunConfig& cfg, std::ostream&) {
  const json& p = cfg.params;
  const GeneratorSpec gen = build_generator(p);
  SgdConfig sgd = build_sgd(p);
  const std::uint64_t seed = p.at("seed").get<std::uint64_t>();
  sgd.seed = derived_seed(seed, 1);
  const int replicates = get<int>(p, "replicates", 200);
  std::optional<BootstrapConfig> boot;
  if (replicates > 0) {
    boot.emplace();
    boot->replicates = replicates;
    boot->seed = derived_seed(seed, 2);
    boot->threads = cfg.threads;
  }
  const Generated g = single_dataset(gen, seed);
  const CovarianceComparison cmp = covariance_comparison(gen.model, g.data, sgd, boot);
  const json config = provenance(cfg.subcommand, p, gen, sgd);

  auto write = [&](const std::string& name, const Matrix& m) {
    std::ofstream out = open_csv(cfg, name, config);
    write_matrix_csv(out, m);
  };
  write("covariance.csv", cmp.sgd);
  if (cmp.bootstrap) write("covariance_bootstrap.csv", *cmp.bootstrap);
  write("covariance_sandwich.csv", cmp.sandwich);
  write("covariance_inverse_fisher.csv", cmp.inverse_fisher);

  std::ofstream out = open_csv(cfg, "covariance_diagonal.csv", config);
  out << "coord,sgd_inference" << (cmp.bootstrap ? ",bootstrap" : "") << ",sandwich,inverse_fisher\n";
  const Matrix table = diagonal_table(cmp);
  for (Index i = 0; i < table.rows(); ++i) {
    out << i;
    for (Index j = 0; j < table.cols(); ++j) out << ',' << format_double(table(i, j));
    out << '\n';
  }
  return 0;
}

int run_qq(const RunConfig& cfg, std::ostream&) {
  const json& p = cfg.params;
  const GeneratorSpec gen = build_generator(p);
  SgdConfig sgd = build_sgd(p);
  const std::uint64_t seed = p.at("seed").get<std::uint64_t>();
  sgd.seed = derived_seed(seed, 1);
  const Generated g = single_dataset(gen, seed);
  const InferenceSamples samples = sgd_inference(gen.model, g.data, sgd, build_theta_hat(p));
  const Index coord = get<Index>(p, "coord", 0);
  if (coord < 0 || coord >= samples.theta_hat.size()) throw UsageError("coord out of range");

  const ModelSpec base = underlying_model(gen.model);
  const Matrix cov =
      sandwich_covariance(base, fit_erm(base, g.data).theta_hat, g.data) / static_cast<double>(g.data.n());
  std::vector<double> values;
  for (const auto& s : samples.samples) values.push_back(s(coord));
  const auto pairs = qq_export(values, {samples.theta_hat(coord), cov(coord, coord)});

  std::ofstream out = open_csv(cfg, "qq.csv", provenance(cfg.subcommand, p, gen, sgd));
  out << "theoretical,sample\n";
  for (const auto& q : pairs) out << format_double(q.theoretical) << ',' << format_double(q.sample) << '\n';
  return 0;
}

int run_predict(const RunConfig& cfg, std::ostream&) {
  const json& p = cfg.params;
  if (!has(p, "points")) throw UsageError("missing required field 'points'");
  const GeneratorSpec gen = build_generator(p);
  SgdConfig sgd = build_sgd(p);
  const std::uint64_t seed = p.at("seed").get<std::uint64_t>();
  sgd.seed = derived_seed(seed, 1);
  const double level = get<double>(p, "level", 0.95);

  std::ifstream points_in(p.at("points").get<std::string>());
  if (!points_in) throw UsageError("cannot open points file");
  const Matrix points = read_csv_matrix(points_in);
  const Generated g = single_dataset(gen, seed);
  if (points.cols() != g.data.p()) throw UsageError("points have the wrong number of columns");
  const InferenceSamples samples = sgd_inference(gen.model, g.data, sgd, build_theta_hat(p));

  std::ofstream out = open_csv(cfg, "predict.csv", provenance(cfg.subcommand, p, gen, sgd));
  out << "estimate,lower,upper\n";
  for (Index i = 0; i < points.rows(); ++i) {
    const Vector x = points.row(i).transpose();
    const Interval iv = prediction_interval(samples, x, level);
    out << format_double(samples.theta_hat.dot(x)) << ',' << format_double(iv.lower) << ','
        << format_double(iv.upper) << '\n';
  }
  return 0;
}

int run_trend(const RunConfig& cfg, std::ostream&) {
  json p = cfg.params;
  GeneratorSpec gen = GeneratorSpec::preset(GeneratorKind::NormalMean);
  gen.n = get<Index>(p, "n", 100);
  gen.p = get<Index>(p, "p", 2);
  gen.validate();

  TrendConfig trend;
  trend.etas = get<std::vector<double>>(p, "etas", {0.4, 0.2, 0.1});
  trend.ts = get<std::vector<std::int64_t>>(p, "ts", {250, 500, 1000});
  trend.batch_size = get<Index>(p, "batch", 1);
  trend.runs_per_cell = get<int>(p, "runs", 2000);
  trend.burn_in = get<std::int64_t>(p, "burn_in", 1000);
  const std::uint64_t seed = p.at("seed").get<std::uint64_t>();
  trend.master_seed = derived_seed(seed, 1);
  trend.threads = cfg.threads;

  const Generated g = single_dataset(gen, seed);
  const auto cells = covariance_error_trend(g.data, trend);

  json config = provenance(cfg.subcommand, p, gen, std::nullopt);
  config["etas"] = trend.etas;
  config["ts"] = trend.ts;
  config["batch"] = trend.batch_size;
  config["runs"] = trend.runs_per_cell;
  config["burn_in"] = trend.burn_in;
  std::ofstream out = open_csv(cfg, "trend.csv", config);
  out << "eta,t,error\n";
  for (const auto& c : cells) out << format_double(c.eta) << ',' << c.t << ',' << format_double(c.error) << '\n';
  return 0;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

int run_fit(const RunConfig& cfg, std::ostream&) {
  const json& p = cfg.params;
  const GeneratorSpec gen = build_generator(p);
  const Generated g = single_dataset(gen, p.at("seed").get<std::uint64_t>());
  const ModelSpec base = underlying_model(gen.model);
  const FitResult fit = fit_erm(base, g.data, get<double>(p, "tol", 1e-10));
  const double n = static_cast<double>(g.data.n());
  json theta = json::array();
  for (Index i = 0; i < fit.theta_hat.size(); ++i) theta.push_back(fit.theta_hat(i));
  json body = {{"config", provenance(cfg.subcommand, p, gen, std::nullopt)},
               {"theta_hat", theta},
               {"iterations", fit.iterations},
               {"gradient_norm", fit.final_gradient_norm},
               {"sandwich_covariance", matrix_json(sandwich_covariance(base, fit.theta_hat, g.data) / n)},
               {"inverse_fisher_covariance",
                matrix_json(invert_spd(fisher_information(base, fit.theta_hat, g.data)) / n)}};
  write_json(cfg, "fit.json", body);
  return 0;
}

}  // namespace

RunConfig parse_args(int argc, const char* const* argv) {
  CLI::App app{"Fixed-step SGD inference: confidence intervals from averaged SGD segments"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::string> config_path;
  std::optional<int> parallel;
  app.add_option("--parallel", parallel, "worker threads (default: SGDINFER_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  for (const auto& [name, description] : kSubcommands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_path[name], "JSON file of settings; flags override it");
    sub->add_option("--parallel", parallel, "worker threads")->check(CLI::PositiveNumber);
    for (const auto& key : keys_for(name)) {
      sub->add_option("--" + key, raw[name][key], key_spec(key).help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  RunConfig cfg;
  CLI::App* chosen = app.get_subcommands().front();
  cfg.subcommand = chosen->get_name();
  const auto allowed_list = keys_for(cfg.subcommand);
  const std::set<std::string> allowed(allowed_list.begin(), allowed_list.end());

  json params = json::object();
  const std::string& path = config_path[cfg.subcommand];
  if (!path.empty()) {
    const json file = load_config_file(path);
    for (const auto& [key, value] : file.items()) {
      if (!allowed.count(key)) throw UsageError("unknown config key '" + key + "' for " + cfg.subcommand);
      check_json_type(key, value);
      params[key] = value;
    }
  }
  for (const auto& key : allowed_list) {
    if (chosen->count("--" + key) > 0) params[key] = parse_flag(key, raw[cfg.subcommand][key]);
  }

  if (!params.contains("seed")) throw UsageError("missing required field 'seed'");
  cfg.out_dir = params.value("out", std::string("."));
  cfg.threads = parallel ? *parallel : default_thread_count();
  cfg.params = std::move(params);
  return cfg;
}

int run(const RunConfig& cfg, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  int code = 2;
  if (cfg.subcommand == "coverage") code = run_coverage(cfg, log);
  else if (cfg.subcommand == "univariate") code = run_univariate(cfg, log);
  else if (cfg.subcommand == "covariance") code = run_covariance(cfg, log);
  else if (cfg.subcommand == "qq") code = run_qq(cfg, log);
  else if (cfg.subcommand == "predict") code = run_predict(cfg, log);
  else if (cfg.subcommand == "trend") code = run_trend(cfg, log);
  else if (cfg.subcommand == "fit") code = run_fit(cfg, log);
  else throw UsageError("unknown subcommand '" + cfg.subcommand + "'");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  log << cfg.subcommand << " finished in " << secs << " s\n";
  return code;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = parse_args(argc, argv);
    return run(cfg, err);
  } catch (const HelpRequested& h) {
    out << h.text;
    return 0;
  } catch (const UsageError& e) {
    err << "error[usage]: " << e.what() << '\n';
    return 2;
  } catch (const CsvError& e) {
    err << "error[input]: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error[config]: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << "error[config]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error[method]: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace sgdinfer::cli
