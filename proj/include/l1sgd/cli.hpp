#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "l1sgd/bench.hpp"
#include "l1sgd/data.hpp"
#include "l1sgd/engine.hpp"
#include "l1sgd/model.hpp"
#include "l1sgd/model_io.hpp"
#include "l1sgd/objective.hpp"
#include "l1sgd/reference.hpp"
#include "l1sgd/report.hpp"

namespace l1sgd {

// Exit codes shared by all subcommands.
inline constexpr int exit_ok = 0;        // criterion met, or nothing to certify
inline constexpr int exit_error = 1;     // usage, I/O, or contract failure
inline constexpr int exit_budget = 2;    // budget exhausted before the criterion

namespace cli_detail {

inline std::string or_na(double v) {
  return std::isfinite(v) ? detail::format_double(v) : std::string("n/a");
}

inline std::vector<labeled_example> load_examples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file: " + path);
  return parse_libsvm(in);
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return nan_value;
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Compact cell formatting for the bench table; full precision is not useful there.
inline std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return std::string(buf);
}

inline std::int32_t examples_feature_dim(const std::vector<labeled_example>& examples) {
  std::int32_t d = 0;
  for (const labeled_example& ex : examples) d = std::max(d, ex.features.min_dim());
  return d;
}

struct train_options {
  std::string data_path;
  std::string variant_str = "s";
  double cost = 0.0;
  double lambda = 0.0;
  bool has_cost = false;
  bool has_lambda = false;
  double epsilon = 0.01;
  double factor = 1.2;
  int ell = 5;
  std::int64_t t_max = 0;
  bool has_t_max = false;
  std::int64_t epoch_max = 100000;
  bool has_epoch_max = false;
  double rho = 0.0;
  double scale = 1.0;
  bool has_scale = false;
  std::uint64_t seed = 0;
  bool permute_each_epoch = false;
  std::string model_path;
  std::string report_path;
  std::string summary_path;
};

struct predict_options {
  std::string model_path;
  std::string data_path;
  std::string out_path;
  double scale = 1.0;
  bool has_scale = false;
};

struct bench_options {
  std::string data_path;
  std::vector<double> costs;
  std::vector<std::string> variants;
  double target = 0.01;
  int seeds = 1;
  double j_opt = 0.0;
  bool has_j_opt = false;
  int ell = 5;
  std::int64_t epoch_max = 100000;
  double rho = 0.0;
  double scale = 1.0;
  bool has_scale = false;
  int threads = 1;
};

inline hyperparams resolve_params(const train_options& o, std::size_t m, variant v) {
  hyperparams hp = o.has_lambda ? hyperparams::from_lambda(o.lambda, m)
                                : hyperparams::from_cost(o.cost, m);
  hp.rho = o.rho;
  hp.epsilon = o.epsilon;
  hp.approx_factor = o.factor;
  hp.multiplicity = o.ell;
  hp.schedule = v;
  hp.seed = o.seed;
  hp.permute_each_epoch = o.permute_each_epoch;
  if (v == variant::random)
    hp.max_steps = o.t_max;
  else
    hp.max_epochs = o.epoch_max;
  return hp;
}

inline int cmd_train(const train_options& o) {
  const variant v = variant_from_code(o.variant_str[0]);
  if (v == variant::random && !o.has_t_max) {
    std::cerr << "train: --variant r requires --tmax\n";
    return exit_error;
  }
  if (v == variant::random && o.has_epoch_max) {
    std::cerr << "train: --Tmax does not apply to variant r (use --tmax)\n";
    return exit_error;
  }
  if (v != variant::random && o.has_t_max) {
    std::cerr << "train: --tmax applies to variant r only (use --Tmax)\n";
    return exit_error;
  }
  if (!o.has_cost && !o.has_lambda) {
    std::cerr << "train: one of --C or --lambda is required\n";
    return exit_error;
  }

  std::vector<labeled_example> examples = load_examples(o.data_path);
  if (o.has_scale) scale_features(examples, o.scale);
  const dataset ds = augment_reflect(examples, o.rho);
  const hyperparams hp = resolve_params(o, ds.size(), v);

  const train_result res = train(ds, hp);
  const train_report& rep = res.report;

  if (!o.model_path.empty()) {
    std::ofstream out = open_out(o.model_path);
    save_model(out, make_model_file(ds, hp, res.state));
  }
  if (!o.report_path.empty()) {
    std::ofstream out = open_out(o.report_path);
    write_report_csv(out, rep);
  }
  if (!o.summary_path.empty()) {
    std::ofstream out = open_out(o.summary_path);
    out << summary_json(ds, hp, res).dump(2) << '\n';
  }

  std::cout << "variant=" << variant_code(v) << " C=" << detail::format_double(hp.cost)
            << " lambda=" << detail::format_double(hp.lambda) << " m=" << ds.size()
            << " dim=" << ds.dim << " R=" << detail::format_double(ds.max_norm) << '\n';
  std::cout << "reason=" << stop_reason_name(rep.reason) << " epochs=" << res.state.epochs
            << " T_eff=" << res.state.epochs_eff << " steps=" << res.state.steps
            << " margin_errors=" << res.state.margin_errors << '\n';
  std::cout << "J=" << or_na(rep.final_objective) << " L=" << or_na(rep.final_lower_bound)
            << " gap=" << or_na(rep.final_gap) << '\n';
  if (v == variant::random)
    std::cout << "box_excess=" << or_na(rep.box_excess) << '\n';
  std::cout << "wall_seconds=" << detail::format_double(rep.wall_seconds) << '\n';
  return rep.reason == stop_reason::budget ? exit_budget : exit_ok;
}

inline int cmd_predict(const predict_options& o) {
  std::ifstream min(o.model_path);
  if (!min) {
    std::cerr << "predict: cannot open model file: " << o.model_path << '\n';
    return exit_error;
  }
  const model_file mf = load_model(min);
  std::vector<labeled_example> examples = load_examples(o.data_path);
  if (o.has_scale) scale_features(examples, o.scale);
  if (examples.empty()) {
    std::cerr << "predict: no examples in " << o.data_path << '\n';
    return exit_error;
  }
  const std::int32_t data_dim = examples_feature_dim(examples);
  if (data_dim > mf.feature_dim()) {
    std::cerr << "predict: data needs " << data_dim << " features but the model was trained on "
              << mf.feature_dim() << '\n';
    return exit_error;
  }

  std::ofstream file;
  if (!o.out_path.empty()) file = open_out(o.out_path);
  std::ostream& out = o.out_path.empty() ? std::cout : file;
  std::size_t correct = 0;
  for (const labeled_example& ex : examples) {
    const int pred = predict_label(mf, ex.features);
    out << (pred > 0 ? "+1" : "-1") << '\n';
    if (pred == ex.label) ++correct;
  }
  const double acc = static_cast<double>(correct) / static_cast<double>(examples.size());
  std::cout << "accuracy " << detail::format_double(acc) << " (" << correct << '/'
            << examples.size() << ")\n";
  return exit_ok;
}

inline int cmd_bench(const bench_options& o) {
  if (o.has_j_opt && o.costs.size() != 1) {
    std::cerr << "bench: --jopt applies to a single --C value\n";
    return exit_error;
  }
  std::vector<variant> variants;
  for (const std::string& s : o.variants) {
    if (s.size() != 1) throw std::invalid_argument("unknown variant '" + s + "'");
    variants.push_back(variant_from_code(s[0]));
  }
  if (variants.empty()) variants = {variant::single, variant::multiple, variant::random};

  std::vector<labeled_example> examples = load_examples(o.data_path);
  if (o.has_scale) scale_features(examples, o.scale);
  const dataset ds = augment_reflect(examples, o.rho);
  const std::size_t m = ds.size();

  std::vector<double> j_opts(o.costs.size());
  for (std::size_t ci = 0; ci < o.costs.size(); ++ci) {
    if (o.has_j_opt) {
      j_opts[ci] = o.j_opt;
      std::cout << "J_opt C=" << detail::format_double(o.costs[ci]) << " -> "
                << detail::format_double(j_opts[ci]) << " (provided)\n";
    } else {
      const reference_solution ref = reference_solve(ds, o.costs[ci]);
      j_opts[ci] = ref.objective;
      std::cout << "J_opt C=" << detail::format_double(o.costs[ci]) << " -> "
                << detail::format_double(j_opts[ci]) << " (reference solver, " << ref.sweeps
                << " sweeps)\n";
    }
  }

  struct cell_spec {
    std::size_t vi, ci;
    hyperparams hp;
    double j_opt;
  };
  std::vector<cell_spec> specs;
  for (std::size_t vi = 0; vi < variants.size(); ++vi)
    for (std::size_t ci = 0; ci < o.costs.size(); ++ci)
      for (int s = 0; s < o.seeds; ++s) {
        hyperparams hp = hyperparams::from_cost(o.costs[ci], m);
        hp.rho = o.rho;
        hp.multiplicity = o.ell;
        hp.schedule = variants[vi];
        hp.seed = static_cast<std::uint64_t>(s);
        if (variants[vi] == variant::random)
          hp.max_steps = o.epoch_max * static_cast<std::int64_t>(m);
        else
          hp.max_epochs = o.epoch_max;
        specs.push_back({vi, ci, hp, j_opts[ci]});
      }

  std::vector<bench_cell> cells(specs.size());
  std::vector<std::string> errors(specs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < specs.size();) {
      try {
        cells[i] = bench_run(ds, specs[i].hp, specs[i].j_opt, o.target);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < o.threads; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (!errors[i].empty()) {
      std::cerr << "bench: " << errors[i] << '\n';
      return exit_error;
    }

  std::cout << std::left << std::setw(8) << "variant" << std::setw(12) << "C" << std::setw(7)
            << "seeds" << std::setw(10) << "med_T" << std::setw(10) << "med_T_eff"
            << std::setw(12) << "med_t" << std::setw(16) << "med_seconds" << std::setw(14)
            << "med_gap" << "reached\n";
  bool all_reached = true;
  for (std::size_t vi = 0; vi < variants.size(); ++vi)
    for (std::size_t ci = 0; ci < o.costs.size(); ++ci) {
      std::vector<double> t_med, teff_med, steps_med, sec_med, gap_med;
      int reached = 0;
      for (const cell_spec& sp : specs) {
        if (sp.vi != vi || sp.ci != ci) continue;
        const bench_cell& c = cells[&sp - specs.data()];
        t_med.push_back(static_cast<double>(c.epochs));
        teff_med.push_back(static_cast<double>(c.epochs_eff));
        steps_med.push_back(static_cast<double>(c.steps));
        sec_med.push_back(c.seconds);
        gap_med.push_back(c.gap);
        reached += c.reached ? 1 : 0;
      }
      all_reached = all_reached && reached == o.seeds;
      std::cout << std::left << std::setw(8) << variant_code(variants[vi]) << std::setw(12)
                << format_g(o.costs[ci]) << std::setw(7) << o.seeds << std::setw(10)
                << format_g(median(t_med)) << std::setw(10) << format_g(median(teff_med))
                << std::setw(12) << format_g(median(steps_med)) << std::setw(16)
                << format_g(median(sec_med)) << std::setw(14) << format_g(median(gap_med))
                << reached << '/' << o.seeds << '\n';
    }
  return all_reached ? exit_ok : exit_budget;
}

}  // namespace cli_detail

/// Entry point shared by the binary and the in-process CLI tests.
/// `args` are the command-line arguments after the program name.
inline int run_cli(const std::vector<std::string>& args) {
  using namespace cli_detail;
  CLI::App app{"Linear L1-SVM trainer: margin-perceptron updates against a linearly growing "
               "threshold, with a certified duality-gap stopping rule"};
  app.require_subcommand(1);

  train_options to;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model and write model/report files");
  train_cmd->add_option("--data", to.data_path, "training data, LIBSVM text format")->required();
  train_cmd->add_option("--variant", to.variant_str,
                        "schedule: r (random), s (epoch single), m (epoch multiple)")
      ->required()
      ->check(CLI::IsMember({"r", "s", "m"}));
  CLI::Option* cost_opt = train_cmd->add_option("--C", to.cost, "penalty parameter C");
  CLI::Option* lambda_opt =
      train_cmd->add_option("--lambda", to.lambda, "regularization lambda = 1/(C*m)");
  cost_opt->excludes(lambda_opt);
  lambda_opt->excludes(cost_opt);
  train_cmd->add_option("--epsilon", to.epsilon, "target relative accuracy")
      ->capture_default_str();
  train_cmd->add_option("--f", to.factor, "comparison coefficient gating exact objective checks")
      ->capture_default_str();
  train_cmd->add_option("--ell", to.ell, "block length for variant m")->capture_default_str();
  CLI::Option* tmax_opt =
      train_cmd->add_option("--tmax", to.t_max, "step budget for variant r");
  CLI::Option* epoch_max_opt =
      train_cmd->add_option("--Tmax", to.epoch_max, "epoch budget for variants s/m")
          ->capture_default_str();
  train_cmd->add_option("--rho", to.rho, "augmentation parameter (0 disables the bias coordinate)")
      ->capture_default_str();
  CLI::Option* scale_opt =
      train_cmd->add_option("--scale", to.scale, "multiply all feature values before training");
  train_cmd->add_option("--seed", to.seed, "RNG seed")->capture_default_str();
  train_cmd->add_flag("--permute-each-epoch", to.permute_each_epoch,
                      "reshuffle before every epoch instead of once before training");
  train_cmd->add_option("--model", to.model_path, "write the trained model here");
  train_cmd->add_option("--report", to.report_path, "write the per-epoch CSV report here");
  train_cmd->add_option("--summary", to.summary_path, "write a JSON run summary here");

  predict_options po;
  CLI::App* predict_cmd =
      app.add_subcommand("predict", "classify a dataset with a trained model");
  predict_cmd->add_option("--model", po.model_path, "model file from train")->required();
  predict_cmd->add_option("--data", po.data_path, "data to classify, LIBSVM text format")
      ->required();
  predict_cmd->add_option("--out", po.out_path, "write per-example labels here (default stdout)");
  CLI::Option* pscale_opt = predict_cmd->add_option(
      "--scale", po.scale, "apply the same feature scaling used at training time");

  bench_options bo;
  CLI::App* bench_cmd = app.add_subcommand(
      "bench", "time each variant until the objective is within --target of the optimum");
  bench_cmd->add_option("--data", bo.data_path, "data, LIBSVM text format")->required();
  bench_cmd->add_option("--C", bo.costs, "penalty values, comma or space separated")
      ->required()
      ->delimiter(',');
  bench_cmd->add_option("--variants", bo.variants, "subset of r,s,m (default: s,m,r)")
      ->delimiter(',');
  bench_cmd->add_option("--target", bo.target, "relative accuracy to reach")
      ->capture_default_str();
  bench_cmd->add_option("--seeds", bo.seeds, "number of seeds per cell (seeds 0..n-1)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  CLI::Option* jopt_opt = bench_cmd->add_option(
      "--jopt", bo.j_opt, "known optimal objective (skips the reference solver; single --C only)");
  bench_cmd->add_option("--ell", bo.ell, "block length for variant m")->capture_default_str();
  bench_cmd->add_option("--Tmax", bo.epoch_max, "epoch cap per run")->capture_default_str();
  bench_cmd->add_option("--rho", bo.rho, "augmentation parameter")->capture_default_str();
  CLI::Option* bscale_opt =
      bench_cmd->add_option("--scale", bo.scale, "multiply all feature values before training");
  bench_cmd->add_option("--threads", bo.threads, "worker threads for independent cells")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("l1sgd");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_error;
  }

  to.has_cost = cost_opt->count() > 0;
  to.has_lambda = lambda_opt->count() > 0;
  to.has_t_max = tmax_opt->count() > 0;
  to.has_epoch_max = epoch_max_opt->count() > 0;
  to.has_scale = scale_opt->count() > 0;
  po.has_scale = pscale_opt->count() > 0;
  bo.has_j_opt = jopt_opt->count() > 0;
  bo.has_scale = bscale_opt->count() > 0;

  try {
    if (train_cmd->parsed()) return cmd_train(to);
    if (predict_cmd->parsed()) return cmd_predict(po);
    if (bench_cmd->parsed()) return cmd_bench(bo);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_error;
  }
  return exit_error;
}

}  // namespace l1sgd
