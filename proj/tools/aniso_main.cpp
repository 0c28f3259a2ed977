// Batch front end: subcommands over flat key=value configs, CSV artifacts.

#include "aniso/config.hpp"
#include "aniso/distributed.hpp"
#include "aniso/oracle.hpp"
#include "aniso/prox.hpp"
#include "aniso/run_record.hpp"
#include "aniso/splitting.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace aniso;

namespace {

constexpr int kSchemaVersion = 1;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Vec to_vec(const std::vector<double>& xs) {
  Vec v(static_cast<int>(xs.size()));
  for (size_t i = 0; i < xs.size(); ++i) v[static_cast<int>(i)] = xs[i];
  return v;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

/// Creates the output directory and drops the resolved config plus the
/// schema version into it.
fs::path prepare_out_dir(Config& cfg, const std::string& subcommand) {
  const fs::path dir = cfg.get_str("out", "runs/" + subcommand);
  cfg.set("out", dir.string());
  fs::create_directories(dir);
  std::ofstream conf(dir / "config.txt", std::ios::binary);
  conf << cfg.emit();
  std::ofstream schema(dir / "schema_version.txt", std::ios::binary);
  schema << kSchemaVersion << "\n";
  return dir;
}

/// Potential spec from the `potential` key, with optional separate
/// `eta`/`eps` keys appended when the spec itself does not carry them.
std::string resolve_potential_spec(Config& cfg) {
  std::string spec = cfg.get_str("potential");
  if (cfg.has("eta") && spec.find("eta=") == std::string::npos) {
    spec += ":eta=" + cfg.get_str("eta");
  }
  if (cfg.has("eps") && spec.find("eps=") == std::string::npos) {
    spec += ":eps=" + cfg.get_str("eps");
  }
  cfg.set("potential", spec);
  return spec;
}

ShardMode shard_mode_from_string(const std::string& s) {
  if (s == "full_overlap") return ShardMode::full_overlap;
  if (s == "disjoint") return ShardMode::disjoint;
  throw ConfigError("unknown shard mode: " + s);
}

// ---------------------------------------------------------------------------

int run_check_potential(Config cfg) {
  cfg.set("dim", cfg.get_str("dim", "2"));
  cfg.set("samples", cfg.get_str("samples", "100"));
  cfg.set("sample_seed", cfg.get_str("sample_seed", "7"));
  const std::string spec = resolve_potential_spec(cfg);
  cfg.require_known({"out", "potential", "eta", "eps", "dim", "samples", "sample_seed"});
  const fs::path dir = prepare_out_dir(cfg, "check-potential");

  const PotentialPtr p = parse_potential_spec(spec, {cfg.get_int("dim")});
  SampleSpec samples;
  samples.n_points = cfg.get_int("samples");
  samples.seed = static_cast<unsigned>(cfg.get_int("sample_seed"));
  const AssumptionReport rep = check_assumptions(*p, samples);

  RunRecord rec;
  rec.columns = {"assumption", "pass"};
  std::ostringstream table;
  table << "potential: " << p->describe() << "\n";
  const std::pair<const char*, const AssumptionCheck*> rows[] = {
      {"A1", &rep.a1}, {"A2", &rep.a2}, {"A3", &rep.a3}, {"A4", &rep.a4}, {"A5", &rep.a5}};
  for (auto [name, check] : rows) {
    table << name << ": " << (check->pass ? "pass" : "FAIL");
    if (!check->witness.empty()) table << "  (" << check->witness << ")";
    table << "\n";
  }
  table << "admissible: " << (p->admissible() ? "yes" : "no") << "\n";
  std::cout << table.str();
  std::ofstream out(dir / "assumptions.txt", std::ios::binary);
  out << table.str();
  return 0;
}

int run_envelope_scan(Config cfg) {
  cfg.set("f", cfg.get_str("f", "abs"));
  cfg.set("lambda", cfg.get_str("lambda", "1"));
  cfg.set("v_min", cfg.get_str("v_min", "-3"));
  cfg.set("v_max", cfg.get_str("v_max", "3"));
  cfg.set("v_points", cfg.get_str("v_points", "601"));
  cfg.set("z_min", cfg.get_str("z_min", "-4"));
  cfg.set("z_max", cfg.get_str("z_max", "4"));
  cfg.set("z_points", cfg.get_str("z_points", "801"));
  cfg.set("refine", cfg.get_str("refine", "2"));
  cfg.set("method", cfg.get_str("method", "grid"));
  const std::string spec = resolve_potential_spec(cfg);
  cfg.require_known({"out", "f", "potential", "eta", "eps", "lambda", "v_min", "v_max",
                     "v_points", "z_min", "z_max", "z_points", "refine", "method"});
  const fs::path dir = prepare_out_dir(cfg, "envelope-scan");

  const TestFunction f = make_test_function(cfg.get_str("f"));
  if (f.dimension != 1) throw ConfigError("envelope-scan supports 1-D functions");
  const ProxProblem prob =
      make_prox_problem(f, parse_potential_spec(spec, {1}), cfg.get_double("lambda"));
  const std::string method = cfg.get_str("method");
  if (method != "grid" && method != "local") {
    throw ConfigError("method must be grid or local");
  }
  const GridSpec grid =
      GridSpec::uniform(cfg.get_double("z_min"), cfg.get_double("z_max"),
                        cfg.get_int("z_points"), 1, cfg.get_int("refine"));

  RunRecord rec;
  rec.columns = {"v", "envelope", "envelope_grad", "n_minimizers", "method"};
  const int points = cfg.get_int("v_points");
  if (points < 2) throw ConfigError("v_points must be >= 2");
  const double lo = cfg.get_double("v_min"), hi = cfg.get_double("v_max");
  for (int i = 0; i < points; ++i) {
    Vec v(1);
    v[0] = lo + (hi - lo) * i / (points - 1);
    std::optional<ProxResult> r;
    try {
      r = method == "grid" ? prox_grid(prob, v, grid) : prox_local(prob, v);
    } catch (const EmptyFeasibleError&) {
      rec.add_row({v[0], std::nullopt, std::nullopt, 0.0,
                   static_cast<double>(method == "grid" ? 0 : 1)});
      continue;
    }
    rec.add_row({v[0], r->envelope,
                 r->envelope_gradient ? std::optional<double>((*r->envelope_gradient)[0])
                                      : std::nullopt,
                 static_cast<double>(r->minimizers.size()),
                 static_cast<double>(r->method == ProxMethod::grid_oracle ? 0 : 1)});
  }
  rec.write_csv((dir / "envelope_scan.csv").string());
  std::cout << "wrote " << (dir / "envelope_scan.csv").string() << " (" << points
            << " rows)\n";
  return 0;
}

int run_prox(Config cfg) {
  cfg.set("lambda", cfg.get_str("lambda", "1"));
  cfg.set("method", cfg.get_str("method", "grid"));
  cfg.set("z_min", cfg.get_str("z_min", "-4"));
  cfg.set("z_max", cfg.get_str("z_max", "4"));
  cfg.set("z_points", cfg.get_str("z_points", "801"));
  cfg.set("refine", cfg.get_str("refine", "2"));
  const std::string spec = resolve_potential_spec(cfg);
  cfg.require_known({"out", "f", "potential", "eta", "eps", "lambda", "v", "method",
                     "z_min", "z_max", "z_points", "refine"});
  const fs::path dir = prepare_out_dir(cfg, "prox");

  const TestFunction f = make_test_function(cfg.get_str("f"));
  const Vec v = to_vec(cfg.get_list("v"));
  if (static_cast<int>(v.size()) != f.dimension) {
    throw ConfigError("v has wrong dimension for " + f.name);
  }
  const ProxProblem prob =
      make_prox_problem(f, parse_potential_spec(spec, {f.dimension}),
                        cfg.get_double("lambda"));
  ProxResult r;
  if (cfg.get_str("method") == "grid") {
    const GridSpec grid =
        GridSpec::uniform(cfg.get_double("z_min"), cfg.get_double("z_max"),
                          cfg.get_int("z_points"), f.dimension, cfg.get_int("refine"));
    r = prox_grid(prob, v, grid);
  } else if (cfg.get_str("method") == "local") {
    r = prox_local(prob, v);
  } else {
    throw ConfigError("method must be grid or local");
  }

  RunRecord rec;
  rec.columns = {"minimizer_index"};
  for (int i = 0; i < f.dimension; ++i) rec.columns.push_back("z_" + std::to_string(i));
  rec.columns.push_back("envelope");
  for (size_t i = 0; i < r.minimizers.size(); ++i) {
    std::vector<std::optional<double>> row = {static_cast<double>(i)};
    for (int k = 0; k < f.dimension; ++k) row.push_back(r.minimizers[i][k]);
    row.push_back(r.envelope);
    rec.add_row(std::move(row));
  }
  rec.write_csv((dir / "prox.csv").string());

  std::cout << "envelope = " << fmt(r.envelope) << "\n";
  std::cout << "multivalued = " << (r.multivalued ? "yes" : "no") << "\n";
  for (const Vec& z : r.minimizers) {
    std::cout << "minimizer =";
    for (int k = 0; k < z.size(); ++k) std::cout << " " << fmt(z[k]);
    std::cout << "\n";
  }
  if (r.envelope_gradient) {
    std::cout << "envelope_gradient =";
    for (int k = 0; k < r.envelope_gradient->size(); ++k) {
      std::cout << " " << fmt((*r.envelope_gradient)[k]);
    }
    std::cout << "\n";
  }
  return 0;
}

int run_alt_min(Config cfg) {
  cfg.set("lambda", cfg.get_str("lambda", "0.1"));
  cfg.set("copies", cfg.get_str("copies", "1"));
  cfg.set("tau", cfg.get_str("tau", "0.1"));
  cfg.set("sigma", cfg.get_str("sigma", "0.05"));
  cfg.set("tol", cfg.get_str("tol", "1e-8"));
  cfg.set("max_iter", cfg.get_str("max_iter", "10000"));
  cfg.set("exact_u", cfg.get_str("exact_u", "false"));
  cfg.set("envelope_every", cfg.get_str("envelope_every", "0"));
  const std::string spec = resolve_potential_spec(cfg);
  cfg.require_known({"out", "f", "potential", "eta", "eps", "lambda", "copies", "tau",
                     "sigma", "tol", "max_iter", "exact_u", "envelope_every", "u0"});
  const fs::path dir = prepare_out_dir(cfg, "alt-min");

  const TestFunction f = make_test_function(cfg.get_str("f"));
  const int copies = cfg.get_int("copies");
  if (copies < 1) throw ConfigError("copies must be >= 1");
  const Vec u0 = to_vec(cfg.get_list("u0"));
  if (static_cast<int>(u0.size()) != f.dimension) {
    throw ConfigError("u0 has wrong dimension for " + f.name);
  }
  const int m = f.dimension * copies;
  Objective obj = objective_from(f);
  if (copies > 1) {
    // f applied blockwise to the stacked copies.
    const TestFunction base = f;
    obj.dimension = m;
    obj.value = [base, copies](const Vec& z) {
      double s = 0.0;
      for (int j = 0; j < copies; ++j) {
        s += base.value(z.segment(j * base.dimension, base.dimension));
      }
      return s;
    };
    obj.gradient = [base, copies](const Vec& z) {
      Vec g(z.size());
      for (int j = 0; j < copies; ++j) {
        g.segment(j * base.dimension, base.dimension) =
            base.grad(z.segment(j * base.dimension, base.dimension));
      }
      return g;
    };
  }
  SplittingProblem prob{std::move(obj),
                        {},
                        stacked_identity(f.dimension, copies),
                        parse_potential_spec(spec, std::vector<int>(copies, f.dimension)),
                        cfg.get_double("lambda")};
  AltMinOptions opts;
  opts.tau = cfg.get_double("tau");
  opts.sigma = cfg.get_double("sigma");
  opts.tol = cfg.get_double("tol");
  opts.max_iter = cfg.get_int("max_iter");
  opts.exact_u = cfg.get_bool("exact_u", false);
  opts.envelope_every = cfg.get_int("envelope_every");

  SplittingState s0{u0, prob.a * u0};
  auto [s, rec] = alternate_min(prob, s0, opts);
  rec.write_csv((dir / "record.csv").string());

  RunRecord fin;
  fin.columns = {"index", "u", "z"};
  for (int i = 0; i < prob.m(); ++i) {
    fin.add_row({static_cast<double>(i),
                 i < prob.n() ? std::optional<double>(s.u[i]) : std::nullopt, s.z[i]});
  }
  fin.write_csv((dir / "final.csv").string());

  const auto r = residuals(prob, s, f.smooth);
  std::cout << "iterations = " << rec.rows.size() << "\n";
  std::cout << "F = " << fmt(objective(prob, s)) << "\n";
  std::cout << "r_u = " << fmt(r.r_u) << "\n";
  std::cout << "r_z = " << fmt(r.r_z) << "\n";
  if (r.envelope_residual) {
    std::cout << "envelope_residual = " << fmt(*r.envelope_residual) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainSetup {
  TrainerConfig trainer;
  std::string model;  // "mlp" or a test-function name
  std::vector<int> layers;
  DatasetKind dataset = DatasetKind::two_gaussians;
  int n = 200;
  double noise = 0.3;
  unsigned data_seed = 1;
  int test_n = 0;
  Vec u0;  // test-function mode
};

const std::set<std::string> kTrainKeys = {
    "out",        "model",      "layers",        "nu",          "dataset",
    "n",          "noise",      "data_seed",     "test_n",      "potential",
    "eta",        "eps",        "lambda",        "tau",         "sigma",
    "kappa",      "workers",    "batch_size",    "iterations",  "seed",
    "shard",      "threads",    "metrics_every", "envelope_every",
    "full_batch", "log_wall_time", "u0"};

TrainSetup parse_train_setup(Config& cfg) {
  TrainSetup s;
  cfg.set("model", cfg.get_str("model", "mlp"));
  s.model = cfg.get_str("model");
  cfg.set("lambda", cfg.get_str("lambda", "0.1"));
  cfg.set("tau", cfg.get_str("tau", "0.01"));
  cfg.set("sigma", cfg.get_str("sigma", "0.05"));
  cfg.set("kappa", cfg.get_str("kappa", "0.9"));
  cfg.set("workers", cfg.get_str("workers", "4"));
  cfg.set("batch_size", cfg.get_str("batch_size", "20"));
  cfg.set("iterations", cfg.get_str("iterations", "2000"));
  cfg.set("seed", cfg.get_str("seed", "1"));
  cfg.set("shard", cfg.get_str("shard", "full_overlap"));
  cfg.set("threads", cfg.get_str("threads", "1"));

  TrainerConfig& t = s.trainer;
  t.potential_spec = resolve_potential_spec(cfg);
  t.lambda = cfg.get_double("lambda");
  t.tau = cfg.get_double("tau");
  t.sigma = cfg.get_double("sigma");
  t.kappa = cfg.get_double("kappa");
  t.workers = cfg.get_int("workers");
  t.batch_size = cfg.get_int("batch_size");
  t.iterations = cfg.get_int("iterations");
  t.seed = static_cast<unsigned>(cfg.get_int("seed"));
  t.shard_mode = shard_mode_from_string(cfg.get_str("shard"));
  t.worker_threads = cfg.get_int("threads");
  t.nu = cfg.get_double("nu", 1e-4);
  t.metrics_every = cfg.get_int("metrics_every", 50);
  t.envelope_every = cfg.get_int("envelope_every", 0);
  t.full_batch = cfg.get_bool("full_batch", false);
  t.log_wall_time = cfg.get_bool("log_wall_time", false);
  t.validate();

  if (s.model == "mlp") {
    s.layers.clear();
    for (double x : cfg.has("layers") ? cfg.get_list("layers")
                                      : std::vector<double>{2, 16, 2}) {
      s.layers.push_back(static_cast<int>(x));
    }
    std::string layers_str;
    for (int l : s.layers) layers_str += (layers_str.empty() ? "" : ",") + std::to_string(l);
    cfg.set("layers", layers_str);
    cfg.set("dataset", cfg.get_str("dataset", "two_gaussians"));
    cfg.set("n", cfg.get_str("n", "200"));
    cfg.set("noise", cfg.get_str("noise", "0.3"));
    cfg.set("data_seed", cfg.get_str("data_seed", "1"));
    cfg.set("test_n", cfg.get_str("test_n", "200"));
    s.dataset = dataset_kind_from_string(cfg.get_str("dataset"));
    s.n = cfg.get_int("n");
    s.noise = cfg.get_double("noise");
    s.data_seed = static_cast<unsigned>(cfg.get_int("data_seed"));
    s.test_n = cfg.get_int("test_n");
  } else {
    const TestFunction f = make_test_function(s.model);  // validates the name
    s.u0 = cfg.has("u0") ? to_vec(cfg.get_list("u0")) : Vec::Ones(f.dimension);
    if (static_cast<int>(s.u0.size()) != f.dimension) {
      throw ConfigError("u0 has wrong dimension for " + f.name);
    }
  }
  return s;
}

struct TrainOutcome {
  TrainResult result;
  double objective = kInf;
  double train_loss = kInf;
  std::optional<double> train_error;
  std::optional<double> test_loss;
  std::optional<double> test_error;
};

TrainOutcome execute_train(const TrainSetup& s) {
  TrainOutcome out;
  if (s.model == "mlp") {
    const MlpModel model{s.layers, s.trainer.nu};
    const Dataset data = synth_dataset(s.dataset, s.n, s.noise, s.data_seed);
    out.result = train(s.trainer, model, data);
    out.train_loss = *out.result.record.last("train_loss");
    out.train_error = *out.result.record.last("train_error");
    if (s.test_n > 0) {
      const Dataset test = synth_dataset(s.dataset, s.test_n, s.noise, s.data_seed + 1000);
      std::vector<int> all(test.size());
      std::iota(all.begin(), all.end(), 0);
      out.test_loss = model.loss(out.result.u, test, all);
      out.test_error = model.error_rate(out.result.u, test);
    }
  } else {
    const TestFunction f = make_test_function(s.model);
    out.result = train(s.trainer, f, s.u0);
    out.train_loss = *out.result.record.last("train_loss");
  }
  out.objective = *out.result.record.last("F");
  return out;
}

void print_outcome(const TrainOutcome& out) {
  std::cout << "objective = " << fmt(out.objective) << "\n";
  std::cout << "train_loss = " << fmt(out.train_loss) << "\n";
  if (out.train_error) std::cout << "train_error = " << fmt(*out.train_error) << "\n";
  if (out.test_loss) std::cout << "test_loss = " << fmt(*out.test_loss) << "\n";
  if (out.test_error) std::cout << "test_error = " << fmt(*out.test_error) << "\n";
  std::cout << "consensus_gap = "
            << fmt(consensus_gap(out.result.u, out.result.workers)) << "\n";
}

int run_train(Config cfg) {
  TrainSetup setup = parse_train_setup(cfg);
  cfg.require_known(kTrainKeys);
  const fs::path dir = prepare_out_dir(cfg, "train");
  const TrainOutcome out = execute_train(setup);
  out.result.record.write_csv((dir / "record.csv").string());

  RunRecord params;
  params.columns = {"index", "u"};
  for (int i = 0; i < out.result.u.size(); ++i) {
    params.add_row({static_cast<double>(i), out.result.u[i]});
  }
  params.write_csv((dir / "params.csv").string());
  print_outcome(out);
  return 0;
}

int run_grid(Config cfg) {
  std::set<std::string> keys = kTrainKeys;
  keys.insert({"potentials", "lambdas", "etas", "rates", "kappas", "cap"});
  keys.erase("potential");

  const std::vector<std::string> potentials =
      cfg.has("potentials") ? cfg.get_str_list("potentials")
                            : std::vector<std::string>{"quad"};
  const auto list_or = [&](const char* key, double fallback) {
    return cfg.has(key) ? cfg.get_list(key) : std::vector<double>{fallback};
  };
  const std::vector<double> lambdas = list_or("lambdas", 0.1);
  const std::vector<double> etas = list_or("etas", 1.0);
  const std::vector<double> rates = list_or("rates", 0.01);
  const std::vector<double> kappas = list_or("kappas", 0.9);
  const int cap = cfg.get_int("cap", 200);
  cfg.set("cap", std::to_string(cap));

  const size_t product = potentials.size() * lambdas.size() * etas.size() *
                         rates.size() * kappas.size();
  if (product > static_cast<size_t>(cap)) {
    throw ConfigError("grid size " + std::to_string(product) + " exceeds cap " +
                      std::to_string(cap));
  }

  cfg.require_known(keys);  // the sweep owns `potential`; only `potentials` here
  // Validate the shared scalar portion once with a placeholder potential.
  {
    Config probe = cfg;
    probe.set("potential", potentials.front());
    parse_train_setup(probe);
    std::set<std::string> probe_keys = keys;
    probe_keys.insert("potential");
    probe.require_known(probe_keys);
  }
  const fs::path dir = prepare_out_dir(cfg, "grid");
  const unsigned base_seed =
      static_cast<unsigned>(Config::from_string("seed=" + cfg.get_str("seed", "1"))
                                .get_int("seed"));

  RunRecord summary;
  summary.columns = {"run_index", "potential_index", "lambda",     "eta",
                     "rate",      "kappa",           "seed",       "objective",
                     "train_loss", "train_error",    "test_loss",  "test_error"};
  struct Row {
    std::string potential;
    size_t index;
    TrainOutcome out;
  };
  std::vector<Row> rows;

  size_t run_index = 0;
  for (size_t pi = 0; pi < potentials.size(); ++pi) {
    for (double lambda : lambdas) {
      for (double eta : etas) {
        for (double rate : rates) {
          for (double kappa : kappas) {
            Config run_cfg = cfg;
            run_cfg.set("potential", potentials[pi]);
            if (potentials[pi].find("eta=") == std::string::npos) {
              run_cfg.set("eta", fmt(eta));
            }
            run_cfg.set("lambda", fmt(lambda));
            run_cfg.set("sigma", fmt(rate));
            run_cfg.set("tau", fmt(rate));
            run_cfg.set("kappa", fmt(kappa));
            run_cfg.set("seed", std::to_string(base_seed + run_index));
            TrainSetup setup = parse_train_setup(run_cfg);
            TrainOutcome out = execute_train(setup);
            summary.add_row({static_cast<double>(run_index),
                             static_cast<double>(pi), lambda, eta, rate, kappa,
                             static_cast<double>(base_seed + run_index),
                             out.objective, out.train_loss, out.train_error,
                             out.test_loss, out.test_error});
            rows.push_back({potentials[pi], run_index, std::move(out)});
            ++run_index;
          }
        }
      }
    }
  }
  summary.write_csv((dir / "summary.csv").string());

  // Best row per potential, selected by train loss and by test error
  // separately (the selection metric is ambiguous, so report both).
  const auto emit_best = [&](const std::string& name, auto metric) {
    RunRecord best;
    best.columns = summary.columns;
    for (const std::string& pot : potentials) {
      const Row* winner = nullptr;
      for (const Row& r : rows) {
        if (r.potential != pot) continue;
        if (!winner || metric(r.out) < metric(winner->out)) winner = &r;
      }
      if (winner) best.add_row(summary.rows[winner->index]);
    }
    best.write_csv((dir / name).string());
  };
  emit_best("best_by_train_loss.csv",
            [](const TrainOutcome& o) { return o.train_loss; });
  emit_best("best_by_test_error.csv", [](const TrainOutcome& o) {
    return o.test_error ? *o.test_error : o.train_loss;
  });

  std::cout << "completed " << run_index << " runs; summary in "
            << (dir / "summary.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anisotropic proximal toolkit"};
  app.require_subcommand(1);

  struct SubSpec {
    std::string name;
    std::string help;
    int (*fn)(Config);
  };
  const std::vector<SubSpec> subs = {
      {"check-potential", "audit a potential against the Legendre assumptions",
       run_check_potential},
      {"envelope-scan", "tabulate the envelope and its gradient over a 1-D range",
       run_envelope_scan},
      {"prox", "evaluate one proximal mapping", run_prox},
      {"alt-min", "alternating minimization of the splitting model", run_alt_min},
      {"train", "distributed training run", run_train},
      {"grid", "grid search over training hyperparameters", run_grid},
  };

  std::string config_path;
  std::vector<std::string> overrides;
  CLI::App* chosen = nullptr;
  int (*chosen_fn)(Config) = nullptr;
  for (const SubSpec& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config_path, "key=value config file");
    sub->add_option("overrides", overrides, "key=value overrides");
    sub->callback([&chosen, &chosen_fn, sub, fn = s.fn] {
      chosen = sub;
      chosen_fn = fn;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    Config cfg;
    if (!config_path.empty()) cfg = Config::from_file(config_path);
    for (const std::string& kv : overrides) {
      // `check-potential log` style shorthand: a bare token is the potential.
      if (kv.find('=') == std::string::npos) {
        cfg.set("potential", kv);
      } else {
        cfg.apply_override(kv);
      }
    }
    return chosen_fn(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
