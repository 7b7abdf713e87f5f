#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "clrimpute/checkpoint.hpp"
#include "clrimpute/error.hpp"
#include "clrimpute/metrics.hpp"
#include "clrimpute/pipeline.hpp"
#include "clrimpute/synth.hpp"

namespace clr::cli {

namespace {

std::optional<Dims> parse_dims(const std::string& text) {
  if (text.empty()) return std::nullopt;
  Dims d;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> d.stations >> c1 >> d.parameters >> c2 >> d.slots) || c1 != ',' || c2 != ',' ||
      d.cells() == 0) {
    throw ConfigError("--dims expects I,J,K with positive integers, got '" + text + "'");
  }
  return d;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot open '" + path + "' for writing");
  return f;
}

struct DataArgs {
  std::string data;
  std::string dims;
  std::string split_file;
  std::vector<double> ratios{0.1, 0.2, 0.7};
  std::uint64_t seed = 0;
  bool no_normalize = false;
};

void add_data_options(CLI::App* sub, DataArgs& a, bool need_data = true) {
  auto* opt = sub->add_option("--data", a.data, "observed entries, COO text (i,j,k,value)");
  if (need_data) opt->required()->check(CLI::ExistingFile);
  sub->add_option("--dims", a.dims, "tensor dimensions I,J,K (default: max index + 1)");
}

void add_split_options(CLI::App* sub, DataArgs& a) {
  sub->add_option("--split", a.split_file, "split file (i,j,k,label); drawn from --ratios if absent")
      ->check(CLI::ExistingFile);
  sub->add_option("--ratios", a.ratios, "train/validation/test ratios when no split file is given")
      ->expected(3);
  sub->add_option("--seed", a.seed, "seed for the split, initialization and shuffling");
  sub->add_flag("--no-normalize", a.no_normalize, "train on raw values instead of min-max scaled");
}

SplitAssignment load_or_draw_split(const SparseTensor& raw, const DataArgs& a) {
  if (!a.split_file.empty()) return read_split(std::filesystem::path(a.split_file), raw);
  return split(raw, {a.ratios[0], a.ratios[1], a.ratios[2]}, a.seed);
}

struct ModelArgs {
  std::string model = "clr";
  std::size_t rank = 10;
  std::size_t kernel = 3;
  double eta = 0.01;
  double lambda = 0.001;
  std::size_t epochs = 1000;
  double tol = 1e-5;
};

void add_model_options(CLI::App* sub, ModelArgs& m, bool allow_baseline) {
  if (allow_baseline) {
    sub->add_option("--model", m.model, "clr or baseline")->check(CLI::IsMember({"clr", "baseline"}));
  }
  sub->add_option("--rank", m.rank, "number of rank-one components")->check(CLI::PositiveNumber);
  sub->add_option("--kernel", m.kernel, "causal kernel length")->check(CLI::PositiveNumber);
  sub->add_option("--eta", m.eta, "learning rate (> 0)");
  sub->add_option("--lambda", m.lambda, "L2 regularization (>= 0)");
  sub->add_option("--epochs", m.epochs, "maximum epochs / swarm rounds");
  sub->add_option("--tol", m.tol, "stop when the training objective changes by less than this");
}

struct SwarmArgs {
  SwarmConfig cfg;
  std::vector<double> eta_bounds{1e-4, 1e-1};
  std::vector<double> lambda_bounds{1e-4, 1e-1};
};

void add_swarm_options(CLI::App* sub, SwarmArgs& s) {
  sub->add_option("--particles", s.cfg.particles, "swarm size");
  sub->add_option("--inertia", s.cfg.inertia, "inertia weight");
  sub->add_option("--c1", s.cfg.c1, "personal-best acceleration");
  sub->add_option("--c2", s.cfg.c2, "global-best acceleration");
  sub->add_option("--eta-bounds", s.eta_bounds, "learning-rate search interval")->expected(2);
  sub->add_option("--lambda-bounds", s.lambda_bounds, "regularization search interval")->expected(2);
  sub->add_option("--velocity-clamp", s.cfg.velocity_fraction,
                  "velocity limit as a fraction of each coordinate's range");
}

SwarmConfig finish_swarm(const SwarmArgs& s, std::uint64_t seed) {
  SwarmConfig cfg = s.cfg;
  cfg.eta_bounds = {s.eta_bounds[0], s.eta_bounds[1]};
  cfg.lambda_bounds = {s.lambda_bounds[0], s.lambda_bounds[1]};
  cfg.seed = seed;
  return cfg;
}

FitOptions fit_options(const ModelArgs& m, std::uint64_t seed) {
  FitOptions fo;
  fo.kind = parse_model_kind(m.model);
  fo.rank = m.rank;
  fo.kernel = m.kernel;
  fo.train.eta = m.eta;
  fo.train.lambda = m.lambda;
  fo.train.max_epochs = m.epochs;
  fo.train.tol = m.tol;
  fo.train.shuffle_seed = seed;
  fo.init_seed = seed;
  fo.train.validate();
  return fo;
}

std::string dataset_name(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string dims = "10,8,100";
  std::size_t rank = 3;
  std::size_t kernel = 3;
  std::string mode = "smooth-ar";
  double rho = 0.9;
  double noise = 0.01;
  double fraction = 0.2;
  std::uint64_t seed = 1;
  std::string out = "synth.csv";
  std::string truth;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SynthSpec spec;
  spec.dims = *parse_dims(a.dims);
  spec.rank = a.rank;
  spec.kernel = a.kernel;
  spec.mode = a.mode == "iid" ? TemporalMode::iid : TemporalMode::smooth_ar;
  spec.rho = a.rho;
  spec.noise = a.noise;
  spec.observed_fraction = a.fraction;
  spec.seed = a.seed;
  const auto result = generate(spec);
  const std::string truth = a.truth.empty() ? a.out + ".truth" : a.truth;
  write_synth(result, a.out, truth);
  out << "wrote " << result.observed.size() << " observed entries to " << a.out
      << " (truth: " << truth << ")\n";
  return ok;
}

int cmd_split(const DataArgs& a, const std::string& out_path, std::ostream& out) {
  const auto raw = load_coo(std::filesystem::path(a.data), parse_dims(a.dims));
  const auto assignment = split(raw, {a.ratios[0], a.ratios[1], a.ratios[2]}, a.seed);
  write_split(std::filesystem::path(out_path), raw, assignment);
  out << "train=" << assignment.count(Label::train)
      << " validation=" << assignment.count(Label::validation)
      << " test=" << assignment.count(Label::test) << " -> " << out_path << '\n';
  return ok;
}

struct OutputArgs {
  std::string checkpoint = "model.ckpt";
  std::string log;
  std::string trace;
};

int cmd_fit(const DataArgs& d, const ModelArgs& m, const std::optional<SwarmArgs>& swarm,
            const OutputArgs& o, std::ostream& out, std::ostream& err) {
  FitOptions fo = fit_options(m, d.seed);
  if (swarm) fo.swarm = finish_swarm(*swarm, d.seed);
  const auto raw = load_coo(std::filesystem::path(d.data), parse_dims(d.dims));
  const auto data = prepare(raw, load_or_draw_split(raw, d), !d.no_normalize);
  const auto outcome = fit(data, fo);
  write_checkpoint(std::filesystem::path(o.checkpoint), outcome.checkpoint);
  if (!o.log.empty()) {
    auto f = open_out(o.log);
    write_epoch_log(f, outcome.report);
  }
  if (!o.trace.empty()) {
    auto f = open_out(o.trace);
    write_swarm_trace(f, outcome.swarm_trace);
  }
  out << model_name(outcome.checkpoint.model) << ": " << outcome.report.epochs.size()
      << " epochs, stop=" << to_string(outcome.report.stop);
  if (!outcome.report.epochs.empty()) {
    const auto& last = outcome.report.epochs.back();
    out << ", objective=" << last.objective << ", val_rmse=" << last.val_rmse;
  }
  out << ", eta=" << outcome.checkpoint.eta << ", lambda=" << outcome.checkpoint.lambda << " -> "
      << o.checkpoint << '\n';
  if (outcome.report.stop == StopReason::diverged) {
    err << "training diverged; the checkpoint holds the last finite parameters\n";
    return numeric_failure;
  }
  return ok;
}

struct EvalArgs {
  std::vector<std::string> data;
  std::string dims;
  std::string split_file;
  std::string checkpoint;
  std::vector<std::string> models{"clr", "baseline"};
  std::size_t runs = 20;
  bool tune = false;
  bool raw_metrics = false;
  std::string out;
};

int cmd_evaluate(const EvalArgs& e, const DataArgs& d, const ModelArgs& m, const SwarmArgs& s,
                 std::ostream& out) {
  std::vector<ResultRow> rows;
  std::vector<ResultRow> means;
  if (!e.checkpoint.empty()) {
    if (e.data.size() != 1) throw ConfigError("--checkpoint scores exactly one --data file");
    const auto ckpt = read_checkpoint(std::filesystem::path(e.checkpoint));
    const auto raw = load_coo(std::filesystem::path(e.data[0]), parse_dims(d.dims));
    if (!(raw.dims() == model_dims(ckpt.model))) {
      throw DataError("data dimensions do not match the checkpoint");
    }
    DataArgs da = d;
    da.split_file = e.split_file;
    const auto assignment = load_or_draw_split(raw, da);
    const auto scaled = ckpt.norm ? normalize_with(raw, *ckpt.norm) : raw;
    const auto splits = partition(scaled, assignment);
    if (splits.test.empty()) throw DataError("test split is empty");
    const auto score = score_model(ckpt.model, splits.test, ckpt.norm, e.raw_metrics);
    ResultRow row{dataset_name(e.data[0]), std::string(model_name(ckpt.model)), "1", score.rmse,
                  score.mae, ckpt.train_seconds};
    rows.push_back(row);
    row.run = "mean";
    means.push_back(row);
  } else {
    for (const auto& path : e.data) {
      const auto raw = load_coo(std::filesystem::path(path), parse_dims(d.dims));
      for (const auto& model : e.models) {
        ExperimentOptions xo;
        ModelArgs ma = m;
        ma.model = model;
        xo.fit = fit_options(ma, d.seed);
        if (e.tune && xo.fit.kind == ModelKind::clr) xo.fit.swarm = finish_swarm(s, d.seed);
        xo.ratios = {d.ratios[0], d.ratios[1], d.ratios[2]};
        xo.runs = e.runs;
        xo.seed = d.seed;
        xo.normalize = !d.no_normalize;
        xo.raw_metrics = e.raw_metrics;
        const auto results = run_experiment(raw, xo);
        const auto report = multi_run(results, e.runs);
        for (std::size_t r = 0; r < results.size(); ++r) {
          rows.push_back({dataset_name(path), model, std::to_string(r + 1), results[r].rmse,
                          results[r].mae, results[r].seconds});
        }
        ResultRow mean{dataset_name(path), model, "mean", report.mean_rmse, report.mean_mae,
                       report.mean_seconds};
        rows.push_back(mean);
        means.push_back(mean);
      }
    }
  }
  if (!e.out.empty()) {
    auto f = open_out(e.out);
    write_results(f, rows);
  }
  write_summary_grid(out, means);
  return ok;
}

struct ImputeArgs {
  std::string checkpoint;
  std::string data;
  std::string indices;
  std::vector<std::string> slices;
  std::string out = "imputed.csv";
  bool normalized = false;
};

std::vector<EntryIndex> cells_to_impute(const ImputeArgs& a, const Dims& dims) {
  std::vector<EntryIndex> cells;
  if (!a.indices.empty()) {
    std::ifstream in(a.indices);
    if (!in) throw DataError("cannot open '" + a.indices + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      for (char& c : line) {
        if (c == ',' || c == '\t') c = ' ';
      }
      std::istringstream fields(line);
      long long i = 0, j = 0, k = 0;
      if (!(fields >> i >> j >> k)) {
        if (line_no == 1) continue;  // header
        throw ParseError(line_no, "expected i,j,k");
      }
      if (i < 0 || j < 0 || k < 0) throw BoundsError("negative index in index list");
      EntryIndex idx{static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                     static_cast<std::size_t>(k)};
      if (!in_bounds(idx, dims)) {
        throw BoundsError("line " + std::to_string(line_no) + ": index outside model dimensions");
      }
      cells.push_back(idx);
    }
    return cells;
  }
  if (a.slices.empty()) throw ConfigError("impute needs --indices or at least one --slice");
  if (a.data.empty()) throw ConfigError("--slice needs --data to know which cells are observed");
  const auto observed = load_coo(std::filesystem::path(a.data), dims);
  std::set<std::uint64_t> seen;
  for (const auto& spec : a.slices) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw ConfigError("--slice expects mode:index, got '" + spec + "'");
    const std::string mode = spec.substr(0, colon);
    std::size_t index = 0;
    try {
      index = std::stoul(spec.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("--slice index must be a non-negative integer: '" + spec + "'");
    }
    Dims lo{0, 0, 0};
    Dims hi = dims;
    std::size_t bound = 0;
    if (mode == "station") {
      lo.stations = index, hi.stations = index + 1, bound = dims.stations;
    } else if (mode == "parameter") {
      lo.parameters = index, hi.parameters = index + 1, bound = dims.parameters;
    } else if (mode == "time") {
      lo.slots = index, hi.slots = index + 1, bound = dims.slots;
    } else {
      throw ConfigError("--slice mode must be station, parameter or time");
    }
    if (index >= bound) throw BoundsError("slice index out of range: '" + spec + "'");
    for (std::size_t i = lo.stations; i < hi.stations; ++i) {
      for (std::size_t j = lo.parameters; j < hi.parameters; ++j) {
        for (std::size_t k = lo.slots; k < hi.slots; ++k) {
          const EntryIndex idx{i, j, k};
          if (observed.contains(idx)) continue;
          if (seen.insert(linear_index(idx, dims)).second) cells.push_back(idx);
        }
      }
    }
  }
  return cells;
}

int cmd_impute(const ImputeArgs& a, std::ostream& out) {
  const auto ckpt = read_checkpoint(std::filesystem::path(a.checkpoint));
  const Dims& dims = model_dims(ckpt.model);
  const auto cells = cells_to_impute(a, dims);
  auto f = open_out(a.out);
  f << "i,j,k,value\n" << std::setprecision(17);
  for (const auto& idx : cells) {
    double v = predict(ckpt.model, idx);
    if (!a.normalized && ckpt.norm) v = ckpt.norm->invert(v);
    f << idx.i << ',' << idx.j << ',' << idx.k << ',' << v << '\n';
  }
  out << "imputed " << cells.size() << " cells -> " << a.out << '\n';
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"clrimpute: causal-convolutional low-rank tensor imputation"};
  app.set_config("--config", "", "key=value config file; command-line flags take precedence");
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate a synthetic tensor with planted structure");
  synth->add_option("--dims", synth_args.dims, "I,J,K");
  synth->add_option("--rank", synth_args.rank, "planted rank")->check(CLI::PositiveNumber);
  synth->add_option("--kernel", synth_args.kernel, "planted kernel length")->check(CLI::PositiveNumber);
  synth->add_option("--mode", synth_args.mode, "temporal structure")
      ->check(CLI::IsMember({"iid", "smooth-ar"}));
  synth->add_option("--rho", synth_args.rho, "AR(1) coefficient");
  synth->add_option("--noise", synth_args.noise, "observation noise sd");
  synth->add_option("--fraction", synth_args.fraction, "observed fraction of cells");
  synth->add_option("--seed", synth_args.seed, "generator seed");
  synth->add_option("--out", synth_args.out, "observed COO output");
  synth->add_option("--truth", synth_args.truth, "ground-truth output (default: <out>.truth)");

  DataArgs split_data;
  std::string split_out = "split.csv";
  auto* split_cmd = app.add_subcommand("split", "assign observed entries to train/validation/test");
  add_data_options(split_cmd, split_data);
  split_cmd->add_option("ratios", split_data.ratios, "train validation test ratios")->expected(3);
  split_cmd->add_option("--seed", split_data.seed, "split seed");
  split_cmd->add_option("--out", split_out, "split file output");

  DataArgs train_data;
  ModelArgs train_model;
  OutputArgs train_out;
  auto* train_cmd = app.add_subcommand("train", "train with fixed hyperparameters");
  add_data_options(train_cmd, train_data);
  add_split_options(train_cmd, train_data);
  add_model_options(train_cmd, train_model, true);
  train_cmd->add_option("--checkpoint", train_out.checkpoint, "checkpoint output");
  train_cmd->add_option("--log", train_out.log, "per-epoch log output");

  DataArgs tune_data;
  ModelArgs tune_model;
  SwarmArgs tune_swarm;
  OutputArgs tune_out;
  auto* tune_cmd = app.add_subcommand("tune", "train the CLR model with swarm-adapted (eta, lambda)");
  add_data_options(tune_cmd, tune_data);
  add_split_options(tune_cmd, tune_data);
  add_model_options(tune_cmd, tune_model, false);
  add_swarm_options(tune_cmd, tune_swarm);
  tune_cmd->add_option("--checkpoint", tune_out.checkpoint, "checkpoint output");
  tune_cmd->add_option("--log", tune_out.log, "per-round log output");
  tune_cmd->add_option("--trace", tune_out.trace, "swarm trace output");

  EvalArgs eval_args;
  DataArgs eval_data;
  ModelArgs eval_model;
  SwarmArgs eval_swarm;
  auto* eval_cmd = app.add_subcommand("evaluate", "score a checkpoint, or run repeated experiments");
  eval_cmd->add_option("--data", eval_args.data, "one or more datasets (COO)")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--dims", eval_data.dims, "tensor dimensions I,J,K");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "score this model on the test split")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--split", eval_args.split_file, "split file for --checkpoint mode")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--ratios", eval_data.ratios, "split ratios")->expected(3);
  eval_cmd->add_option("--seed", eval_data.seed, "base seed; run r uses seed + r");
  eval_cmd->add_flag("--no-normalize", eval_data.no_normalize, "train on raw values");
  eval_cmd->add_option("--models", eval_args.models, "models to compare")
      ->check(CLI::IsMember({"clr", "baseline"}));
  eval_cmd->add_option("--runs", eval_args.runs, "repetitions per model")->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--tune", eval_args.tune, "adapt CLR hyperparameters with the swarm");
  eval_cmd->add_flag("--raw-metrics", eval_args.raw_metrics, "report metrics on the original scale");
  eval_cmd->add_option("--out", eval_args.out, "full results table (tab separated)");
  add_model_options(eval_cmd, eval_model, false);
  add_swarm_options(eval_cmd, eval_swarm);

  ImputeArgs impute_args;
  auto* impute_cmd = app.add_subcommand("impute", "write model estimates for chosen cells");
  impute_cmd->add_option("--checkpoint", impute_args.checkpoint, "trained model")
      ->required()
      ->check(CLI::ExistingFile);
  impute_cmd->add_option("--data", impute_args.data, "observed entries (for --slice)")
      ->check(CLI::ExistingFile);
  impute_cmd->add_option("--indices", impute_args.indices, "file of i,j,k cells")
      ->check(CLI::ExistingFile);
  impute_cmd->add_option("--slice", impute_args.slices,
                         "all unobserved cells of station:N, parameter:N or time:N");
  impute_cmd->add_option("--out", impute_args.out, "imputed COO output");
  impute_cmd->add_flag("--normalized", impute_args.normalized, "write values on the model scale");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  try {
    if (*synth) return cmd_synth(synth_args, out);
    if (*split_cmd) return cmd_split(split_data, split_out, out);
    if (*train_cmd) return cmd_fit(train_data, train_model, std::nullopt, train_out, out, err);
    if (*tune_cmd) return cmd_fit(tune_data, tune_model, tune_swarm, tune_out, out, err);
    if (*eval_cmd) return cmd_evaluate(eval_args, eval_data, eval_model, eval_swarm, out);
    if (*impute_cmd) return cmd_impute(impute_args, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return data_error;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return numeric_failure;
  }
  return usage;
}

}  // namespace clr::cli
