// Copyright 2026 The posecast Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "posecast/checkpoint.hpp"
#include "posecast/error.hpp"
#include "posecast/experiments.hpp"
#include "posecast/methods.hpp"
#include "posecast/synthetic.hpp"
#include "posecast/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace posecast {
namespace {

enum ExitCode { kOk = 0, kUsage = 2, kValidation = 3, kDivergence = 4 };

// Raised for bad flag values that CLI11 cannot see (family names, method lists).
struct UsageError : Error {
  using Error::Error;
};

// Checkpoint and data or configuration disagree.
struct IncompatibleError : Error {
  using Error::Error;
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config, "Experiment config file (key = value lines)");
  cmd->add_option("--seed", common.seed, "Seed for every random choice of the command");
}

ExperimentConfig load(const Common& common, ExperimentConfig base = {}) {
  ExperimentConfig cfg = common.config.empty() ? std::move(base) : load_config(common.config, std::move(base));
  if (common.seed) apply_setting(cfg, "seed", std::to_string(*common.seed));
  return cfg;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) std::cout << text;
  else write_file(out_path, text);
}

void progress(const std::string& message) { std::cerr << message << '\n'; }

// Model shape follows the data; an empty vocabulary is filled from the labels.
void adapt_to_data(MethodConfig& method, std::span<const Sample> samples) {
  if (samples.empty()) throw UsageError("dataset is empty");
  method.model.topology = samples.front().topology;
  method.model.horizon = static_cast<int>(samples.front().future.horizon());
  if (method.context.kind == ContextKind::label_embedding && method.context.vocabulary.empty())
    method.context.vocabulary = vocabulary_of(samples);
}

void check_data(const MethodConfig& method, std::span<const Sample> samples) {
  for (const auto& s : samples) {
    if (s.topology != method.model.topology)
      throw IncompatibleError("incompatible checkpoint: topology is " + std::string(to_string(method.model.topology)) +
                              " in the checkpoint but " + std::string(to_string(s.topology)) + " in the data");
    if (static_cast<int>(s.future.horizon()) != method.model.horizon)
      throw IncompatibleError("incompatible checkpoint: horizon is " + std::to_string(method.model.horizon) +
                              " in the checkpoint but " + std::to_string(s.future.horizon()) + " in the data");
  }
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
  Common common;
  std::string family = "all";
  std::optional<int> n;
  std::optional<int> horizon;
  std::optional<std::string> topology;
  std::optional<double> noise;
  std::string out;
};

int run_synth(const SynthArgs& a) {
  const auto cfg = load(a.common);
  const int n = a.n.value_or(cfg.benchmark.per_family);
  const int horizon = a.horizon.value_or(cfg.benchmark.horizon);
  const TopologyKind topology = a.topology ? parse_topology_kind(*a.topology) : cfg.benchmark.topology;
  const std::uint64_t seed = a.common.seed.value_or(cfg.train.seed);
  if (n < 1 || horizon < 1) throw UsageError("--n and --horizon must be at least 1");

  std::vector<Sample> samples;
  if (a.family == "all") {
    if (a.noise) {
      std::uint64_t stream = 0;
      for (auto family : all_motion_families()) {
        auto spec = SyntheticMotionSpec::defaults(family);
        spec.noise_std = *a.noise;
        auto part = generate_synthetic(spec, n, horizon, topology, seed * 1000003ULL + stream++);
        samples.insert(samples.end(), part.begin(), part.end());
      }
    } else {
      samples = standard_benchmark(n, horizon, topology, seed);
    }
  } else {
    MotionFamily family;
    try {
      family = parse_motion_family(a.family);
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
    auto spec = SyntheticMotionSpec::defaults(family);
    if (a.noise) spec.noise_std = *a.noise;
    samples = generate_synthetic(spec, n, horizon, topology, seed);
  }
  write_dataset(a.out, samples);
  std::cout << "wrote " << samples.size() << " samples to " << a.out << '\n';
  return kOk;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::string data;
  std::string val;
  std::string method;
  std::string out;
  std::string resume;
};

int run_train(const TrainArgs& a) {
  auto cfg = load(a.common);
  if (!a.method.empty()) {
    try {
      cfg.method.kind = parse_method(a.method);
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
  }
  if (!is_trainable(cfg.method.kind))
    throw UsageError(std::string(to_string(cfg.method.kind)) + " has nothing to train; evaluate it with --reference");
  cfg.train.checkpoint_dir = a.out;
  const auto data = load_dataset(a.data);
  std::vector<Sample> train, val;
  if (a.val.empty()) {
    auto parts = split(data, cfg.benchmark.train_fraction, cfg.train.seed);
    train = std::move(parts.train);
    val = std::move(parts.test);
  } else {
    train = data;
    val = load_dataset(a.val);
  }
  std::vector<Sample> all = train;
  all.insert(all.end(), val.begin(), val.end());
  adapt_to_data(cfg.method, all);
  cfg.method.validate();
  cfg.train.validate();
  fs::create_directories(a.out);

  std::unique_ptr<Forecaster> model = make_forecaster(cfg.method);
  Trainer trainer(*model, cfg.train, train, val);
  if (!a.resume.empty()) {
    const auto ckpt = read_checkpoint(a.resume);
    try {
      check_compatible(ckpt.method, cfg.method);
    } catch (const ConfigError& e) {
      throw IncompatibleError(e.what());
    }
    trainer.resume(ckpt);
    progress("resuming at step " + std::to_string(trainer.step()));
  }
  const auto result = trainer.run();
  json j;
  j["method"] = to_string(cfg.method.kind);
  j["final_step"] = result.final_step;
  j["best_step"] = result.best_step;
  j["best_val_ade"] = std::isfinite(result.best_val_ade) ? json(result.best_val_ade) : json(nullptr);
  j["early_stopped"] = result.early_stopped;
  j["parameter_count"] = result.parameter_count;
  j["best_checkpoint"] = result.best_checkpoint.string();
  j["last_checkpoint"] = result.last_checkpoint.string();
  j["final_loss"] = result.log.empty() ? json(nullptr) : json(result.log.back().loss);
  std::cout << j.dump(2) << '\n';
  return kOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  Common common;
  std::string data;
  std::string checkpoint;
  std::string predictions;
  std::string method;
  std::string reference;
  double delta = 0.0;
  std::string out;
};

EvalReport score_predictions(const std::vector<Sample>& data, const fs::path& path, double delta) {
  const auto preds = load_dataset(path);
  std::map<std::string, const Sample*> by_id;
  for (const auto& p : preds) by_id[p.id] = &p;
  std::vector<Pose> p0s;
  std::vector<PoseSequence> pred_seqs, gts;
  for (const auto& s : data) {
    const auto it = by_id.find(s.id);
    if (it == by_id.end()) throw NotFoundError("no prediction for sample '" + s.id + "'");
    if (it->second->future.horizon() != s.future.horizon() || it->second->future.dim() != s.future.dim())
      throw ShapeError("prediction for '" + s.id + "' differs in shape from the ground truth");
    p0s.push_back(s.p0);
    pred_seqs.push_back(it->second->future);
    gts.push_back(s.future);
  }
  if (delta <= 0.0) delta = default_pck_delta(data.front().topology);
  return make_report("predictions", p0s, pred_seqs, gts, delta);
}

int run_eval(const EvalArgs& a) {
  const auto data = load_dataset(a.data);
  if (data.empty()) throw UsageError("dataset is empty");
  const int sources = !a.checkpoint.empty() + !a.predictions.empty() + !a.method.empty();
  if (sources != 1) throw UsageError("eval needs exactly one of --checkpoint, --predictions or --method");

  EvalReport report;
  if (!a.predictions.empty()) {
    report = score_predictions(data, a.predictions, a.delta);
  } else if (!a.checkpoint.empty()) {
    const auto ckpt = read_checkpoint(a.checkpoint);
    ExperimentConfig base;
    base.method = ckpt.method;
    base.train = ckpt.train;
    const auto requested = load(a.common, base);
    try {
      check_compatible(ckpt.method, requested.method);
    } catch (const ConfigError& e) {
      throw IncompatibleError(e.what());
    }
    check_data(ckpt.method, data);
    auto model = load_forecaster(ckpt);
    report = evaluate(*model, data, a.delta);
    report.method = std::string(to_string(ckpt.method.kind));
  } else {
    auto cfg = load(a.common);
    try {
      cfg.method.kind = parse_method(a.method);
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
    if (is_trainable(cfg.method.kind)) throw UsageError("--method only evaluates retrieval baselines; use --checkpoint");
    if (a.reference.empty()) throw UsageError("retrieval baselines need --reference training data");
    const auto reference = load_dataset(a.reference);
    std::vector<Sample> all = reference;
    all.insert(all.end(), data.begin(), data.end());
    adapt_to_data(cfg.method, all);
    auto model = make_forecaster(cfg.method);
    model->prepare(reference);
    report = evaluate(*model, data, a.delta);
    report.method = std::string(to_string(cfg.method.kind));
  }
  emit(a.out, to_json(report));
  return kOk;
}

// ---- forecast --------------------------------------------------------------

struct ForecastArgs {
  Common common;
  std::string checkpoint;
  std::string p0;
  std::string label;
  std::string context_ref;
  std::optional<int> horizon;
  std::string out;
};

std::vector<double> parse_coords(const std::string& text) {
  std::string s = text;
  for (char& c : s)
    if (c == '[' || c == ']' || c == ',') c = ' ';
  std::istringstream in(s);
  std::vector<double> v;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("--p0 holds a non-numeric value '" + tok + "'");
    }
  }
  return v;
}

int run_forecast(const ForecastArgs& a) {
  const auto ckpt = read_checkpoint(a.checkpoint);
  ExperimentConfig base;
  base.method = ckpt.method;
  const auto requested = load(a.common, base);
  try {
    check_compatible(ckpt.method, requested.method);
  } catch (const ConfigError& e) {
    throw IncompatibleError(e.what());
  }
  const int horizon = ckpt.method.model.horizon;
  if (a.horizon && *a.horizon != horizon)
    throw IncompatibleError("incompatible checkpoint: horizon is " + std::to_string(horizon) +
                            " in the checkpoint but " + std::to_string(*a.horizon) + " was requested");
  Sample s;
  s.id = a.context_ref.empty() ? "forecast" : a.context_ref;
  s.topology = ckpt.method.model.topology;
  s.label = a.label;
  if (!a.context_ref.empty()) s.context_ref = a.context_ref;
  const auto coords = parse_coords(a.p0);
  const auto topo = build_topology(s.topology);
  if (static_cast<int>(coords.size()) != topo.dim())
    throw ShapeError("--p0 has " + std::to_string(coords.size()) + " values but " + std::string(to_string(s.topology)) +
                     " needs " + std::to_string(topo.dim()));
  s.p0 = Pose(coords);
  s.future = PoseSequence(std::vector<Pose>(static_cast<std::size_t>(horizon), s.p0));
  auto model = load_forecaster(ckpt);
  const std::vector<Sample> one = {s};
  const auto pred = model->predict(one).front();
  json j;
  j["method"] = to_string(ckpt.method.kind);
  j["topology"] = to_string(s.topology);
  j["label"] = s.label;
  j["horizon"] = horizon;
  j["p0"] = coords;
  json frames = json::array();
  for (const auto& f : pred.frames()) frames.push_back(std::vector<double>(f.coords().begin(), f.coords().end()));
  j["frames"] = std::move(frames);
  emit(a.out, j.dump(2) + "\n");
  return kOk;
}

// ---- compare / plot --------------------------------------------------------

std::vector<EvalReport> read_reports(const std::vector<std::string>& paths) {
  std::vector<EvalReport> reports;
  for (const auto& p : paths) {
    reports.push_back(report_from_json(read_file(p)));
    if (reports.back().method.empty()) reports.back().method = fs::path(p).stem().string();
  }
  return reports;
}

struct CompareArgs {
  Common common;
  std::vector<std::string> reports;
  std::string out;
};

int run_compare(const CompareArgs& a) {
  const auto reports = read_reports(a.reports);
  const auto md = comparison_markdown(reports);
  const auto csv = comparison_csv(reports);
  if (a.out.empty()) {
    std::cout << md << '\n' << csv;
  } else {
    write_file(a.out + ".md", md);
    write_file(a.out + ".csv", csv);
    std::cout << md;
  }
  return kOk;
}

struct PlotArgs {
  Common common;
  std::vector<std::string> curves;
  std::string out;
};

int run_plot(const PlotArgs& a) {
  const auto reports = read_reports(a.curves);
  const std::size_t horizon = reports.front().per_timestamp.ade.size();
  for (const auto& r : reports)
    if (r.per_timestamp.ade.size() != horizon) throw ShapeError("reports differ in horizon");
  std::string csv;
  if (reports.size() == 1) {
    csv = curves_to_csv(reports.front().per_timestamp);
  } else {
    std::ostringstream out;
    out.precision(17);
    out << "t";
    for (std::size_t i = 0; i < reports.size(); ++i)
      out << ',' << reports[i].method << "_ade," << reports[i].method << "_pck";
    out << '\n';
    for (std::size_t t = 0; t < horizon; ++t) {
      out << t + 1;
      for (const auto& r : reports) out << ',' << r.per_timestamp.ade[t] << ',' << r.per_timestamp.pck[t];
      out << '\n';
    }
    csv = out.str();
  }
  emit(a.out, csv);
  return kOk;
}

// ---- ablate ----------------------------------------------------------------

struct AblateArgs {
  Common common;
  std::string experiment = "ladder";
  std::string out;
};

int run_ablate(const AblateArgs& a) {
  auto cfg = load(a.common);
  cfg.benchmark.validate();
  const std::vector<std::string> known = {"ladder", "drift", "quantization", "all"};
  if (std::find(known.begin(), known.end(), a.experiment) == known.end())
    throw UsageError("unknown experiment '" + a.experiment + "' (expected ladder, drift, quantization or all)");
  const bool ladder = a.experiment == "ladder" || a.experiment == "all";
  const bool drift = a.experiment == "drift" || a.experiment == "all";
  const bool quant = a.experiment == "quantization" || a.experiment == "all";
  std::vector<std::uint64_t> seeds = cfg.benchmark.seeds;
  if (a.common.seed) seeds = {*a.common.seed};

  json all = json::object();
  std::vector<EvalReport> table;
  for (const auto seed : seeds) {
    const auto data = make_benchmark(cfg.benchmark, seed);
    const std::string tag = "seed" + std::to_string(seed);
    if (ladder) {
      const auto r = run_ablation(cfg, seed, data, progress);
      all["ladder"][tag] = to_json(r);
      for (auto run : r.rungs) {
        run.report.method = run.name + "@" + tag;
        table.push_back(run.report);
      }
    }
    if (drift) {
      const auto r = run_drift_experiment(cfg, seed, data, progress);
      all["drift"][tag] = to_json(r);
      if (!a.out.empty()) {
        std::ostringstream csv;
        csv.precision(17);
        csv << "t,ade_ntp,ade_ours,ratio\n";
        for (std::size_t t = 0; t < r.ratio.size(); ++t)
          csv << t + 1 << ',' << r.ntp.report.per_timestamp.ade[t] << ',' << r.ours.report.per_timestamp.ade[t] << ','
              << r.ratio[t] << '\n';
        write_file(fs::path(a.out) / ("drift_" + tag + ".csv"), csv.str());
      }
    }
    if (quant) {
      const auto r = run_quantization(cfg, seed, data, progress);
      all["quantization"][tag] = to_json(r);
      auto rep = r.vq.report;
      rep.method = "vq-tf@" + tag;
      table.push_back(rep);
    }
  }
  if (a.out.empty()) {
    std::cout << all.dump(2) << '\n';
  } else {
    write_file(fs::path(a.out) / "experiments.json", all.dump(2) + "\n");
    if (!table.empty()) {
      write_file(fs::path(a.out) / "comparison.md", comparison_markdown(table));
      write_file(fs::path(a.out) / "comparison.csv", comparison_csv(table));
      std::cout << comparison_markdown(table);
    }
  }
  return kOk;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"posecast: one-stage 2D pose sequence forecasting"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  add_common(c_synth, synth.common);
  c_synth->add_option("--family", synth.family, "Motion family, or 'all' for the four-family benchmark");
  c_synth->add_option("--n", synth.n, "Samples per family");
  c_synth->add_option("--horizon", synth.horizon, "Future frames per sample");
  c_synth->add_option("--topology", synth.topology, "body13 or hand21");
  c_synth->add_option("--noise", synth.noise, "Override the Gaussian noise level");
  c_synth->add_option("--out", synth.out, "Output JSONL path")->required();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train a forecaster");
  add_common(c_train, train.common);
  c_train->add_option("--data", train.data, "Training JSONL")->required()->check(CLI::ExistingFile);
  c_train->add_option("--val", train.val, "Validation JSONL (default: split --data)")->check(CLI::ExistingFile);
  c_train->add_option("--method", train.method, "ours, tf-ntp, lstm or vq-tf");
  c_train->add_option("--out", train.out, "Directory for checkpoints and the training log")->required();
  c_train->add_option("--resume", train.resume, "Continue from a checkpoint")->check(CLI::ExistingFile);

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Score a checkpoint, a prediction file or a retrieval baseline");
  add_common(c_eval, eval.common);
  c_eval->add_option("--data", eval.data, "Ground-truth JSONL")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--checkpoint", eval.checkpoint, "Trained checkpoint");
  c_eval->add_option("--predictions", eval.predictions, "JSONL whose futures are predictions, matched by id");
  c_eval->add_option("--method", eval.method, "nn-p or nn-vl");
  c_eval->add_option("--reference", eval.reference, "Training JSONL for retrieval baselines");
  c_eval->add_option("--delta", eval.delta, "PCK threshold (default by topology)");
  c_eval->add_option("--out", eval.out, "Report path (default: stdout)");

  ForecastArgs forecast;
  auto* c_forecast = app.add_subcommand("forecast", "Forecast one future sequence");
  add_common(c_forecast, forecast.common);
  c_forecast->add_option("--checkpoint", forecast.checkpoint, "Trained checkpoint")->required()->check(CLI::ExistingFile);
  c_forecast->add_option("--p0", forecast.p0, "Initial pose: 2N comma-separated normalized coordinates")->required();
  c_forecast->add_option("--label", forecast.label, "Action label")->required();
  c_forecast->add_option("--context-ref", forecast.context_ref, "Feature id for precomputed context");
  c_forecast->add_option("--horizon", forecast.horizon, "Must match the checkpoint horizon");
  c_forecast->add_option("--out", forecast.out, "Output path (default: stdout)");

  CompareArgs compare;
  auto* c_compare = app.add_subcommand("compare", "Side-by-side metric table of reports");
  add_common(c_compare, compare.common);
  c_compare->add_option("--reports", compare.reports, "Report JSON files")->required()->check(CLI::ExistingFile);
  c_compare->add_option("--out", compare.out, "Output prefix for .md and .csv (default: stdout)");

  AblateArgs ablate;
  auto* c_ablate = app.add_subcommand("ablate", "Run the ladder, drift or quantization experiments");
  add_common(c_ablate, ablate.common);
  c_ablate->add_option("--experiment", ablate.experiment, "ladder, drift, quantization or all");
  c_ablate->add_option("--out", ablate.out, "Output directory (default: JSON on stdout)");

  PlotArgs plot;
  auto* c_plot = app.add_subcommand("plot", "Per-timestamp curves as CSV");
  add_common(c_plot, plot.common);
  c_plot->add_option("--curves", plot.curves, "Report JSON files")->required()->check(CLI::ExistingFile);
  c_plot->add_option("--out", plot.out, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (*c_synth) return run_synth(synth);
  if (*c_train) return run_train(train);
  if (*c_eval) return run_eval(eval);
  if (*c_forecast) return run_forecast(forecast);
  if (*c_compare) return run_compare(compare);
  if (*c_ablate) return run_ablate(ablate);
  return run_plot(plot);
}

}  // namespace
}  // namespace posecast

int main(int argc, char** argv) {
  using namespace posecast;
  try {
    return dispatch(argc, argv);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what();
    if (!e.last_good_checkpoint().empty()) std::cerr << " (last good checkpoint: " << e.last_good_checkpoint() << ")";
    std::cerr << '\n';
    return kDivergence;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
}
