#include "aqnn/cli.hpp"

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aqnn/baselines.hpp"
#include "aqnn/dataset.hpp"
#include "aqnn/errors.hpp"
#include "aqnn/metrics.hpp"
#include "aqnn/model_io.hpp"
#include "aqnn/network.hpp"
#include "aqnn/serve.hpp"
#include "aqnn/train.hpp"

namespace aqnn {

namespace {

std::atomic<bool> g_stop{false};
void stop_handler(int) { g_stop.store(true); }

struct SplitFlags {
  double train_ratio = 0.7;
  double val_ratio = 0.2;
  double test_ratio = 0.1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--train-ratio", train_ratio, "Training split fraction")
        ->default_val(0.7);
    cmd->add_option("--val-ratio", val_ratio, "Validation split fraction")->default_val(0.2);
    cmd->add_option("--test-ratio", test_ratio, "Test split fraction")->default_val(0.1);
  }

  SplitSpec spec(std::uint32_t seed) const { return SplitSpec{train_ratio, val_ratio, test_ratio, seed}; }
};

void print_eval(const char* title, const EvalResult& r) {
  std::printf("%s\n", title);
  std::fputs(format_report_text(r.report).c_str(), stdout);
  std::printf("mean loss: %.4f\n\n", r.mean_loss);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write " + path.string());
  out << text;
}

int run_train(const std::string& data, const std::string& out_path, std::string history_path,
              int epochs, int batch, float lr, std::uint32_t seed, const SplitFlags& splits,
              bool quiet, bool mlp, const std::string& mlp_out) {
  const Dataset ds = load_csv(data);
  const Split split = shuffle_split(ds, splits.spec(seed));
  const NormStats norm = fit_normalizer(split.train);
  const TrainingSet train_set = normalize_dataset(split.train, norm);
  const TrainingSet val_set = normalize_dataset(split.val, norm);

  Network net = mlp ? build_mlp(seed) : init_network(reference_cnn_arch(), seed);
  std::printf("%s: %ld parameters, %zu train / %zu val / %zu test samples\n",
              mlp ? "mlp" : "cnn", count_params(net), split.train.size(), split.val.size(),
              split.test.size());

  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = batch;
  cfg.lr = lr;
  cfg.seed = seed;
  cfg.verbose = !quiet;
  const TrainResult result = train(net, train_set, val_set, cfg);

  set_params(net, result.best.params);
  net.clear_cache();
  std::printf("best checkpoint: epoch %d val_acc=%.4f\n\n", result.best.epoch,
              result.best.val_acc);

  print_eval("validation split:", evaluate(net, split.val, norm));
  print_eval("test split:", evaluate(net, split.test, norm));

  const std::string model_path = mlp ? mlp_out : out_path;
  if (!model_path.empty()) {
    const std::size_t bytes = save_model(net, norm, model_path);
    std::printf("saved %s (%zu bytes)\n", model_path.c_str(), bytes);
  }
  if (history_path.empty() && !model_path.empty()) history_path = model_path + ".history.csv";
  if (!history_path.empty()) {
    export_history(result.history, history_path);
    std::printf("history written to %s\n", history_path.c_str());
  }
  return 0;
}

int run_eval(const std::string& model_path, const std::string& data, bool as_json,
             const std::string& report_json_path, const std::string& cm_csv_path) {
  const LoadedModel model = load_model(model_path);
  const Dataset ds = load_csv(data);
  const EvalResult r = evaluate(model.net, ds, model.norm);

  nlohmann::ordered_json doc = nlohmann::ordered_json::parse(report_to_json(r.report));
  doc["mean_loss"] = r.mean_loss;
  doc["confusion"] = r.cm.counts;

  if (as_json) {
    std::printf("%s\n", doc.dump(2).c_str());
  } else {
    std::fputs(format_report_text(r.report).c_str(), stdout);
    std::printf("mean loss: %.4f\n\n", r.mean_loss);
    std::printf("confusion matrix (rows=true, cols=predicted):\n%s",
                confusion_to_csv(r.cm).c_str());
  }
  if (!report_json_path.empty()) write_text_file(report_json_path, doc.dump(2) + "\n");
  if (!cm_csv_path.empty()) write_text_file(cm_csv_path, confusion_to_csv(r.cm));
  return 0;
}

int run_predict(const std::string& model_path, const std::string& data, bool ignore_labels) {
  const LoadedModel model = load_model(model_path);
  const std::vector<SensorSample> rows = load_unlabeled_csv(data, ignore_labels);
  for (const SensorSample& row : rows)
    std::printf("%s\n", prediction_record_json(model.net, model.norm, row.readings).c_str());
  return 0;
}

int run_serve(const std::string& model_path, int port, const AlertRule& rule) {
  const LoadedModel model = load_model(model_path);
  rule.validate();
  if (port == 0) return serve_stdio(model.net, model.norm, rule, std::cin, std::cout, std::cerr);

  std::signal(SIGINT, stop_handler);
  std::signal(SIGTERM, stop_handler);
  return serve_tcp(model.net, model.norm, rule, static_cast<std::uint16_t>(port), g_stop,
                   std::cerr);
}

int run_synth(int n_per_class, std::uint32_t seed, const std::string& out_path) {
  const Dataset ds = synth_generate(n_per_class, seed);
  save_csv(ds, out_path);
  std::printf("wrote %zu samples to %s\n", ds.size(), out_path.c_str());
  return 0;
}

int run_bench(const std::string& model_path, int iterations, const std::string& data) {
  const LoadedModel model = load_model(model_path);
  std::vector<FeatureMap> samples;
  if (!data.empty()) {
    const Dataset ds = load_csv(data);
    samples.reserve(ds.size());
    for (const SensorSample& s : ds.samples) samples.push_back(apply_normalizer(s, model.norm));
  } else {
    const Dataset ds = synth_generate(64, 1234);
    samples.reserve(ds.size());
    for (const SensorSample& s : ds.samples) samples.push_back(apply_normalizer(s, model.norm));
  }
  const LatencyStats st = latency_benchmark(model.net, samples, iterations);
  std::printf("iterations=%zu\nmean=%.1f us  p50=%.1f us  p99=%.1f us  max=%.1f us\n", st.count,
              st.mean_s * 1e6, st.p50_s * 1e6, st.p99_s * 1e6, st.max_s * 1e6);
  return 0;
}

int run_knn(const std::string& data, int k, std::uint32_t seed, const SplitFlags& splits) {
  const Dataset ds = load_csv(data);
  const Split split = shuffle_split(ds, splits.spec(seed));
  const NormStats norm = fit_normalizer(split.train);
  const KNNModel model = knn_fit(split.train, norm, k);

  const KnnEval val = knn_evaluate(model, split.val, norm);
  const KnnEval test = knn_evaluate(model, split.test, norm);
  std::printf("knn k=%d train=%zu\nval_accuracy=%.4f (n=%zu)\ntest_accuracy=%.4f (n=%zu)\n\n", k,
              split.train.size(), val.accuracy, split.val.size(), test.accuracy,
              split.test.size());

  std::vector<int> truths;
  truths.reserve(split.test.size());
  for (const SensorSample& s : split.test.samples) truths.push_back(*s.label);
  const ConfusionMatrix cm = confusion_matrix(truths, test.predictions);
  std::fputs(format_report_text(classification_report(cm)).c_str(), stdout);
  return 0;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Six-sensor indoor activity classifier: training, evaluation and streaming "
               "inference"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the CNN on a labeled 7-column CSV");
  std::string train_data, train_out = "model.aqnn", train_history;
  int train_epochs = 200, train_batch = 64;
  float train_lr = 1e-3f;
  std::uint32_t train_seed = 42;
  bool train_quiet = false;
  SplitFlags train_splits;
  train_cmd->add_option("--data", train_data, "Labeled dataset CSV")->required();
  train_cmd->add_option("--out", train_out, "Output model path")->default_val("model.aqnn");
  train_cmd->add_option("--history", train_history,
                        "History CSV path (default: <out>.history.csv)");
  train_cmd->add_option("--epochs", train_epochs, "Training epochs")->default_val(200);
  train_cmd->add_option("--batch", train_batch, "Mini-batch size")->default_val(64);
  train_cmd->add_option("--lr", train_lr, "Adam learning rate")->default_val(1e-3f);
  train_cmd->add_option("--seed", train_seed, "PRNG seed")->envname("AQNN_SEED")->default_val(42);
  train_cmd->add_flag("--quiet", train_quiet, "Suppress per-epoch progress lines");
  train_splits.attach(train_cmd);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved model on a labeled CSV");
  std::string eval_model, eval_data, eval_report_json, eval_cm_csv;
  bool eval_json = false;
  eval_cmd->add_option("--model", eval_model, "Model file")->envname("AQNN_MODEL")->required();
  eval_cmd->add_option("--data", eval_data, "Labeled dataset CSV")->required();
  eval_cmd->add_flag("--json", eval_json, "Print the report as JSON instead of text");
  eval_cmd->add_option("--report-json", eval_report_json, "Also write the JSON report here");
  eval_cmd->add_option("--cm-csv", eval_cm_csv, "Also write the confusion matrix CSV here");

  // predict
  auto* predict_cmd =
      app.add_subcommand("predict", "Predict classes for an unlabeled 6-column CSV");
  std::string predict_model, predict_data;
  bool predict_ignore = false;
  predict_cmd->add_option("--model", predict_model, "Model file")
      ->envname("AQNN_MODEL")
      ->required();
  predict_cmd->add_option("--data", predict_data, "Unlabeled readings CSV")->required();
  predict_cmd->add_flag("--ignore-labels", predict_ignore,
                        "Accept a labeled 7-column file and drop the label column");

  // serve
  auto* serve_cmd =
      app.add_subcommand("serve", "Stream predictions for line-delimited input (stdin or TCP)");
  std::string serve_model;
  int serve_port = 0;
  AlertRule serve_rule;
  serve_cmd->add_option("--model", serve_model, "Model file")->envname("AQNN_MODEL")->required();
  serve_cmd->add_option("--port", serve_port, "TCP port (omit for stdin/stdout mode)")
      ->envname("AQNN_PORT")
      ->default_val(0);
  serve_cmd->add_option("--alert-class", serve_rule.trigger_class, "Alert trigger class index")
      ->default_val(2);
  serve_cmd->add_option("--alert-threshold", serve_rule.threshold, "Alert probability threshold")
      ->envname("AQNN_ALERT_THRESHOLD")
      ->default_val(0.8);
  serve_cmd->add_option("--alert-count", serve_rule.consecutive,
                        "Consecutive hits required to alert")
      ->default_val(3);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labeled dataset CSV");
  int synth_n = 100;
  std::uint32_t synth_seed = 42;
  std::string synth_out;
  synth_cmd->add_option("--n-per-class", synth_n, "Samples per activity class")->default_val(100);
  synth_cmd->add_option("--seed", synth_seed, "PRNG seed")->envname("AQNN_SEED")->default_val(42);
  synth_cmd->add_option("--out", synth_out, "Output CSV path")->required();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Measure single-sample inference latency");
  std::string bench_model, bench_data;
  int bench_iters = 2000;
  bench_cmd->add_option("--model", bench_model, "Model file")->envname("AQNN_MODEL")->required();
  bench_cmd->add_option("--iterations", bench_iters, "Measured iterations (>= 100)")
      ->default_val(2000);
  bench_cmd->add_option("--data", bench_data, "Optional labeled CSV to draw samples from");

  // baseline
  auto* baseline_cmd = app.add_subcommand("baseline", "Reference classifiers (knn, mlp)");
  baseline_cmd->require_subcommand(1);
  auto* knn_cmd = baseline_cmd->add_subcommand("knn", "k-nearest-neighbors baseline");
  std::string knn_data;
  int knn_k = 5;
  std::uint32_t knn_seed = 42;
  SplitFlags knn_splits;
  knn_cmd->add_option("--data", knn_data, "Labeled dataset CSV")->required();
  knn_cmd->add_option("--k", knn_k, "Neighbor count (odd)")->default_val(5);
  knn_cmd->add_option("--seed", knn_seed, "Split seed")->envname("AQNN_SEED")->default_val(42);
  knn_splits.attach(knn_cmd);

  auto* mlp_cmd = baseline_cmd->add_subcommand("mlp", "Dense 6-128-64-4 baseline");
  std::string mlp_data, mlp_out, mlp_history;
  int mlp_epochs = 200, mlp_batch = 64;
  float mlp_lr = 1e-3f;
  std::uint32_t mlp_seed = 42;
  bool mlp_quiet = false;
  SplitFlags mlp_splits;
  mlp_cmd->add_option("--data", mlp_data, "Labeled dataset CSV")->required();
  mlp_cmd->add_option("--out", mlp_out, "Optional output model path");
  mlp_cmd->add_option("--history", mlp_history, "History CSV path");
  mlp_cmd->add_option("--epochs", mlp_epochs, "Training epochs")->default_val(200);
  mlp_cmd->add_option("--batch", mlp_batch, "Mini-batch size")->default_val(64);
  mlp_cmd->add_option("--lr", mlp_lr, "Adam learning rate")->default_val(1e-3f);
  mlp_cmd->add_option("--seed", mlp_seed, "PRNG seed")->envname("AQNN_SEED")->default_val(42);
  mlp_cmd->add_flag("--quiet", mlp_quiet, "Suppress per-epoch progress lines");
  mlp_splits.attach(mlp_cmd);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(train_cmd))
      return run_train(train_data, train_out, train_history, train_epochs, train_batch, train_lr,
                       train_seed, train_splits, train_quiet, /*mlp=*/false, "");
    if (app.got_subcommand(eval_cmd))
      return run_eval(eval_model, eval_data, eval_json, eval_report_json, eval_cm_csv);
    if (app.got_subcommand(predict_cmd))
      return run_predict(predict_model, predict_data, predict_ignore);
    if (app.got_subcommand(serve_cmd)) return run_serve(serve_model, serve_port, serve_rule);
    if (app.got_subcommand(synth_cmd)) return run_synth(synth_n, synth_seed, synth_out);
    if (app.got_subcommand(bench_cmd)) return run_bench(bench_model, bench_iters, bench_data);
    if (app.got_subcommand(baseline_cmd)) {
      if (baseline_cmd->got_subcommand(knn_cmd))
        return run_knn(knn_data, knn_k, knn_seed, knn_splits);
      if (baseline_cmd->got_subcommand(mlp_cmd))
        return run_train(mlp_data, "", mlp_history, mlp_epochs, mlp_batch, mlp_lr, mlp_seed,
                         mlp_splits, mlp_quiet, /*mlp=*/true, mlp_out);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

}  // namespace aqnn
