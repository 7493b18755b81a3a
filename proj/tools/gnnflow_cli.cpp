#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gnnflow/bank.hpp"
#include "gnnflow/csv.hpp"
#include "gnnflow/dataflow.hpp"
#include "gnnflow/error.hpp"
#include "gnnflow/features.hpp"
#include "gnnflow/graph_io.hpp"
#include "gnnflow/kernels.hpp"
#include "gnnflow/scheduler.hpp"
#include "gnnflow/selector.hpp"
#include "gnnflow/synthetic.hpp"

namespace fs = std::filesystem;
using namespace gnnflow;

namespace {

struct HardwareOptions {
  std::size_t in_features = 32;
  std::size_t out_features = 32;
  std::string accel_file;
  std::optional<std::uint64_t> pe_count;
  std::optional<std::uint64_t> global_buffer_bytes;
  std::optional<std::uint64_t> dram_words_per_cycle;
  std::optional<std::uint64_t> bytes_per_word;

  void attach(CLI::App* app) {
    app->add_option("--in-features,-F", in_features, "Node input features F")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--out-features,-G", out_features, "Node output features G")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app->add_option("--accel", accel_file, "Accelerator config file (key = value lines)")
        ->check(CLI::ExistingFile);
    app->add_option("--pe-count", pe_count, "Override: number of PEs");
    app->add_option("--global-buffer-bytes", global_buffer_bytes, "Override: global buffer size");
    app->add_option("--dram-words-per-cycle", dram_words_per_cycle, "Override: DRAM bandwidth");
    app->add_option("--bytes-per-word", bytes_per_word, "Override: word size");
  }

  WorkloadDims dims() const { return {in_features, out_features}; }

  AcceleratorParams accel() const {
    AcceleratorParams p = accel_file.empty() ? AcceleratorParams{} : parse_accelerator_params(read_file(accel_file));
    if (pe_count) p.pe_count = *pe_count;
    if (global_buffer_bytes) p.global_buffer_bytes = *global_buffer_bytes;
    if (dram_words_per_cycle) p.dram_words_per_cycle = *dram_words_per_cycle;
    if (bytes_per_word) p.bytes_per_word = *bytes_per_word;
    p.validate();
    return p;
  }
};

class ConfigPrinter {
 public:
  explicit ConfigPrinter(std::string command) { out_ << "gnnflow " << command << "\n"; }

  template <typename T>
  ConfigPrinter& operator()(const std::string& key, const T& value) {
    out_ << "  " << key << " = " << value << "\n";
    return *this;
  }

  ConfigPrinter& hardware(const WorkloadDims& d, const AcceleratorParams& a) {
    (*this)("in_features", d.input_features)("out_features", d.output_features);
    (*this)("pe_count", a.pe_count)("register_file_bytes_per_pe", a.register_file_bytes_per_pe);
    (*this)("global_buffer_bytes", a.global_buffer_bytes)("dram_words_per_cycle", a.dram_words_per_cycle);
    return (*this)("bytes_per_word", a.bytes_per_word);
  }

  void print() const { std::cout << out_.str() << std::flush; }

 private:
  std::ostringstream out_;
};

void write_output(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_atomic(path, content);
  std::cout << "wrote " << path.string() << "\n";
}

std::vector<std::string> split_list(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) out.push_back(tok);
    }
  }
  return out;
}

fs::path bank_path(const fs::path& p) { return fs::is_directory(p) ? p / "bank.json" : p; }

std::string model_name(const PredictorBank& b) {
  return std::string(variant_name(b.schema.variant)) + (b.params.log_target ? "+log" : "");
}

const std::vector<std::string>& partition_ids(const PredictorBank& bank, const std::string& which,
                                              const std::vector<std::string>& all) {
  if (which == "test") return bank.partition.test;
  if (which == "val") return bank.partition.val;
  if (which == "train") return bank.partition.train;
  if (which == "all") return all;
  throw UsageError("unknown partition '" + which + "'");
}

// ---------------------------------------------------------------------------

struct GenOptions {
  std::size_t count = 100;
  std::uint64_t seed = 0;
  std::size_t min_nodes = 20;
  std::size_t max_nodes = 400;
  std::vector<double> mix{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  std::string out;
};

void run_gen(const GenOptions& o) {
  SyntheticSpec spec;
  spec.count = o.count;
  spec.seed = o.seed;
  spec.node_range = {o.min_nodes, o.max_nodes};
  if (o.mix.size() != 3) throw UsageError("--mix takes three weights");
  spec.weight_uniform_random = o.mix[0];
  spec.weight_preferential_attachment = o.mix[1];
  spec.weight_small_world = o.mix[2];
  spec.validate();

  ConfigPrinter("gen-graphs")("count", spec.count)("seed", spec.seed)("min_nodes", spec.node_range.min)(
      "max_nodes", spec.node_range.max)("mix", csv::format_double(o.mix[0]) + "," +
                                                   csv::format_double(o.mix[1]) + "," +
                                                   csv::format_double(o.mix[2]))("out", o.out)
      .print();

  const std::size_t width = std::max<std::size_t>(5, std::to_string(spec.count ? spec.count - 1 : 0).size());
  fs::create_directories(o.out);
  for (std::size_t i = 0; i < spec.count; ++i) {
    std::string id = std::to_string(i);
    id = "g" + std::string(width - id.size(), '0') + id;
    write_file_atomic(fs::path(o.out) / (id + ".el"), write_edge_list(generate_graph(spec, i)));
  }
  std::cout << "wrote " << spec.count << " graphs to " << o.out << "\n";
}

struct LabelOptions {
  std::string graphs, out;
  HardwareOptions hw;
};

void run_label(const LabelOptions& o) {
  const auto dims = o.hw.dims();
  const auto accel = o.hw.accel();
  ConfigPrinter("label")("graphs", o.graphs)("out", o.out).hardware(dims, accel).print();
  const auto graphs = load_graph_dir(o.graphs);
  write_output(o.out, write_labels_csv(label_dataset(graphs, dims, accel)));
}

struct FeaturizeOptions {
  std::string graphs, out, variant = "base+features";
  HardwareOptions hw;
};

void run_featurize(const FeaturizeOptions& o) {
  const auto dims = o.hw.dims();
  const auto accel = o.hw.accel();
  const auto variant = parse_variant(o.variant);
  ConfigPrinter("featurize")("graphs", o.graphs)("variant", variant_name(variant))("out", o.out)
      .hardware(dims, accel)
      .print();
  const auto graphs = load_graph_dir(o.graphs);
  write_output(o.out, write_features_csv(feature_matrix_all(graphs, dims, accel, variant)));
}

struct TrainOptions {
  std::string labels, graphs, features, out, variant = "base+features";
  bool log = false;
  bool no_log = false;
  TrainParams params;
  SplitSpec split;
  std::uint64_t seed = 0;
  HardwareOptions hw;
};

void run_train(TrainOptions o) {
  if (o.graphs.empty() == o.features.empty()) throw UsageError("give exactly one of --graphs or --features");
  if (o.log && o.no_log) throw UsageError("--log and --no-log are exclusive");
  o.params.log_target = !o.no_log;
  o.params.seed = o.seed;
  o.split.seed = o.seed;
  o.params.validate();
  o.split.validate();

  const auto labels = read_labels_csv(read_file(o.labels));
  FeatureTable features;
  std::string source;
  if (!o.features.empty()) {
    features = read_features_csv(read_file(o.features));
    if (features.variant != parse_variant(o.variant)) {
      throw DataError("feature file has variant '" + std::string(variant_name(features.variant)) +
                      "', --variant asks for '" + o.variant + "'");
    }
    source = o.features;
  } else {
    const auto dims = o.hw.dims();
    const auto accel = o.hw.accel();
    features = feature_matrix_all(load_graph_dir(o.graphs), dims, accel, parse_variant(o.variant));
    source = o.graphs;
  }

  ConfigPrinter("train")("labels", o.labels)("features_from", source)("variant", variant_name(features.variant))(
      "log_target", o.params.log_target ? "true" : "false")("tree_count", o.params.tree_count)(
      "learning_rate", csv::format_double(o.params.learning_rate))("max_depth", o.params.max_depth)(
      "min_leaf_samples", o.params.min_leaf_samples)(
      "split", csv::format_double(o.split.train_frac) + "/" + csv::format_double(o.split.val_frac) + "/" +
                   csv::format_double(o.split.test_frac))("seed", o.seed)("kernels",
                                                                           kernels::isa_name(kernels::active().isa))(
      "out", o.out)
      .print();

  const auto result = train_bank(labels, features, o.params, o.split);
  write_output(fs::path(o.out) / "bank.json", save_bank(result.bank));
  write_output(fs::path(o.out) / "validation.csv", write_validation_csv(result.validation));
  std::cout << "validation pooled MAPE " << csv::format_double(result.validation.pooled_mape_percent) << " % over "
            << result.validation.graph_count << " graphs\n";
}

struct EvaluateOptions {
  std::vector<std::string> banks;
  std::string labels, graphs, out, partition = "test", dataset = "synthetic";
  HardwareOptions hw;
};

void run_evaluate(const EvaluateOptions& o) {
  const auto dims = o.hw.dims();
  const auto accel = o.hw.accel();
  ConfigPrinter cfg("evaluate");
  for (const auto& b : o.banks) cfg("bank", bank_path(b).string());
  cfg("labels", o.labels)("graphs", o.graphs)("partition", o.partition)("dataset", o.dataset)("out", o.out)
      .hardware(dims, accel)
      .print();

  const auto graphs = load_graph_dir(o.graphs);
  const auto labels = index_labels(read_labels_csv(read_file(o.labels)));
  std::string table = eval_csv_header();
  std::string ablation = ablation_csv_header();
  std::string text;
  for (std::size_t i = 0; i < o.banks.size(); ++i) {
    const auto bank = load_bank(read_file(bank_path(o.banks[i])));
    const auto& ids = partition_ids(bank, o.partition, labels.graph_ids);
    const auto set = make_eval_set(bank, graphs, labels, ids, dims, accel);
    const auto report = strategy_comparison(set);
    if (i == 0) table += eval_csv_row(o.dataset, report);
    ablation += ablation_csv_row(o.dataset, model_name(bank), report);
    text += "model: " + model_name(bank) + "\n" + format_eval_report(o.dataset, report) + "\n";
  }
  write_output(fs::path(o.out) / "evaluation.csv", table);
  if (o.banks.size() > 1) write_output(fs::path(o.out) / "ablation.csv", ablation);
  write_output(fs::path(o.out) / "evaluation.txt", text);
  std::cout << text;
}

struct ScheduleOptions {
  std::string graphs, labels, bank, out, partition;
  int scenario = 0;
  std::vector<std::string> strategies;
  std::string tiling;
  ArrivalSpec arrivals;
  std::size_t runs = 5;
  std::uint64_t seed = 0;
  bool no_shuffle = false;
  bool traces = false;
  HardwareOptions hw;
};

void run_schedule_cmd(const ScheduleOptions& o) {
  const auto dims = o.hw.dims();
  const auto accel = o.hw.accel();
  o.arrivals.validate();

  std::vector<Cell> cells;
  if (o.scenario != 0) {
    if (!o.strategies.empty() || !o.tiling.empty()) throw UsageError("--scenario excludes --strategy/--tiling");
    cells = scenario_cells(o.scenario);
  } else {
    auto names = split_list(o.strategies);
    if (names.empty()) throw UsageError("give --scenario or at least one --strategy");
    if (names.size() == 1 && names[0] == "all") {
      names.clear();
      for (Strategy s : kAllStrategies) names.emplace_back(strategy_name(s));
    }
    for (const auto& n : names) {
      const Strategy s = parse_strategy(n);
      TilingPolicy t = TilingPolicy::random;
      if (!o.tiling.empty()) {
        t = parse_tiling_policy(o.tiling);
      } else if (s == Strategy::sjf_truth) {
        t = TilingPolicy::oracle;
      } else if (s == Strategy::sjf_predicted) {
        t = TilingPolicy::predicted;
      }
      cells.push_back({s, t});
    }
  }

  std::unique_ptr<PredictorBank> bank;
  if (!o.bank.empty()) bank = std::make_unique<PredictorBank>(load_bank(read_file(bank_path(o.bank))));
  const std::string partition = o.partition.empty() ? (bank ? "test" : "all") : o.partition;

  ConfigPrinter cfg("schedule");
  cfg("graphs", o.graphs)("labels", o.labels)("bank", o.bank.empty() ? "(none)" : bank_path(o.bank).string())(
      "partition", partition);
  for (const auto& c : cells) {
    cfg("cell", std::string(strategy_name(c.strategy)) + "/" + std::string(tiling_policy_name(c.tiling)));
  }
  cfg("utilization", csv::format_double(o.arrivals.target_utilization))(
      "pareto_shape", csv::format_double(o.arrivals.pareto_shape))("runs", o.runs)("seed", o.seed)(
      "shuffle_jobs", o.no_shuffle ? "false" : "true")("out", o.out)
      .hardware(dims, accel)
      .print();

  const auto graphs = load_graph_dir(o.graphs);
  const auto labels = index_labels(read_labels_csv(read_file(o.labels)));
  std::vector<std::string> ids;
  if (partition != "all") {
    if (!bank) throw UsageError("--partition " + partition + " needs --bank");
    ids = partition_ids(*bank, partition, labels.graph_ids);
  }

  Scenario s;
  s.profiles = make_profiles(graphs, labels, ids, bank.get(), dims, accel);
  s.units = default_units(accel);
  s.cells = cells;
  s.arrivals = o.arrivals;
  s.runs = o.runs;
  s.base_seed = o.seed;
  s.shuffle_jobs = !o.no_shuffle;
  const auto report = compare_strategies(s, o.traces);

  write_output(fs::path(o.out) / "schedule.csv", report_csv(report));
  if (o.traces) {
    for (std::size_t r = 0; r < report.traces.size(); ++r) {
      for (const auto& t : report.traces[r]) {
        const std::string name = "run" + std::to_string(o.seed + r) + "_" + std::string(strategy_name(t.strategy)) +
                                 "_" + std::string(tiling_policy_name(t.tiling)) + ".csv";
        write_output(fs::path(o.out) / "traces" / name, trace_csv(t));
      }
    }
  }
  std::cout << report_csv(report);
}

struct ReportOptions {
  std::vector<std::string> inputs;
  std::string out;
};

std::string render_table(const std::string& title, const csv::Table& t) {
  std::vector<std::size_t> width(t.header.size());
  for (std::size_t c = 0; c < t.header.size(); ++c) width[c] = t.header[c].size();
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  const auto line = [&](const std::vector<std::string>& cells) {
    std::string s = "|";
    for (std::size_t c = 0; c < cells.size(); ++c) {
      s += " " + cells[c] + std::string(width[c] - cells[c].size(), ' ') + " |";
    }
    return s + "\n";
  };
  std::string out = "## " + title + "\n\n" + line(t.header) + "|";
  for (std::size_t w : width) out += std::string(w + 2, '-') + "|";
  out += "\n";
  for (const auto& row : t.rows) out += line(row);
  return out + "\n";
}

void run_report(const ReportOptions& o) {
  ConfigPrinter cfg("report");
  for (const auto& in : o.inputs) cfg("input", in);
  cfg("out", o.out.empty() ? "(stdout)" : o.out).print();
  std::string doc = "# gnnflow report\n\n";
  for (const auto& in : o.inputs) {
    doc += render_table(fs::path(in).filename().string(), csv::parse(read_file(in)));
  }
  if (!o.out.empty()) write_output(o.out, doc);
  std::cout << doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gnnflow: GNN dataflow latency modeling, prediction and scheduling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "gnnflow 1.0");

  GenOptions gen;
  auto* c_gen = app.add_subcommand("gen-graphs", "Generate a synthetic graph dataset");
  c_gen->add_option("--count", gen.count, "Number of graphs")->capture_default_str();
  c_gen->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  c_gen->add_option("--min-nodes", gen.min_nodes, "Smallest node count")->capture_default_str();
  c_gen->add_option("--max-nodes", gen.max_nodes, "Largest node count")->capture_default_str();
  c_gen->add_option("--mix", gen.mix, "Weights: uniform-random,preferential-attachment,small-world")
      ->delimiter(',')
      ->expected(3);
  c_gen->add_option("--out", gen.out, "Output directory")->required();

  LabelOptions lab;
  auto* c_lab = app.add_subcommand("label", "Label every graph with oracle latency for all 24 configs");
  c_lab->add_option("--graphs", lab.graphs, "Graph directory")->required()->check(CLI::ExistingDirectory);
  c_lab->add_option("--out", lab.out, "Label CSV")->required();
  lab.hw.attach(c_lab);

  FeaturizeOptions feat;
  auto* c_feat = app.add_subcommand("featurize", "Compute feature rows for every (graph, config)");
  c_feat->add_option("--graphs", feat.graphs, "Graph directory")->required()->check(CLI::ExistingDirectory);
  c_feat->add_option("--variant", feat.variant, "base or base+features")->capture_default_str();
  c_feat->add_option("--out", feat.out, "Feature CSV")->required();
  feat.hw.attach(c_feat);

  TrainOptions tr;
  auto* c_tr = app.add_subcommand("train", "Train the 24-model predictor bank");
  c_tr->add_option("--labels", tr.labels, "Label CSV")->required()->check(CLI::ExistingFile);
  c_tr->add_option("--graphs", tr.graphs, "Graph directory (features computed on the fly)")
      ->check(CLI::ExistingDirectory);
  c_tr->add_option("--features", tr.features, "Feature CSV from featurize")->check(CLI::ExistingFile);
  c_tr->add_option("--variant", tr.variant, "base or base+features")->capture_default_str();
  c_tr->add_flag("--log", tr.log, "Fit ln(1 + cycles) (default)");
  c_tr->add_flag("--no-log", tr.no_log, "Fit raw cycles");
  c_tr->add_option("--trees", tr.params.tree_count, "Boosting rounds")->capture_default_str();
  c_tr->add_option("--learning-rate", tr.params.learning_rate, "Shrinkage")->capture_default_str();
  c_tr->add_option("--max-depth", tr.params.max_depth, "Tree depth")->capture_default_str();
  c_tr->add_option("--min-leaf", tr.params.min_leaf_samples, "Minimum rows per leaf")->capture_default_str();
  c_tr->add_option("--train-frac", tr.split.train_frac, "Training fraction")->capture_default_str();
  c_tr->add_option("--val-frac", tr.split.val_frac, "Validation fraction")->capture_default_str();
  c_tr->add_option("--test-frac", tr.split.test_frac, "Test fraction")->capture_default_str();
  c_tr->add_option("--seed", tr.seed, "Split seed")->capture_default_str();
  c_tr->add_option("--out", tr.out, "Output directory (bank.json, validation.csv)")->required();
  tr.hw.attach(c_tr);

  EvaluateOptions ev;
  auto* c_ev = app.add_subcommand("evaluate", "Selection metrics of one or more banks");
  c_ev->add_option("--bank", ev.banks, "bank.json or its directory; repeat for an ablation table")
      ->required()
      ->check(CLI::ExistingPath);
  c_ev->add_option("--labels", ev.labels, "Label CSV")->required()->check(CLI::ExistingFile);
  c_ev->add_option("--graphs", ev.graphs, "Graph directory")->required()->check(CLI::ExistingDirectory);
  c_ev->add_option("--partition", ev.partition, "test, val, train or all")->capture_default_str();
  c_ev->add_option("--dataset", ev.dataset, "Dataset name in the CSV")->capture_default_str();
  c_ev->add_option("--out", ev.out, "Output directory")->required();
  ev.hw.attach(c_ev);

  ScheduleOptions sc;
  auto* c_sc = app.add_subcommand("schedule", "Simulate online scheduling on three accelerators");
  c_sc->add_option("--graphs", sc.graphs, "Graph directory")->required()->check(CLI::ExistingDirectory);
  c_sc->add_option("--labels", sc.labels, "Label CSV")->required()->check(CLI::ExistingFile);
  c_sc->add_option("--bank", sc.bank, "Predictor bank (needed by predicted policies)")->check(CLI::ExistingPath);
  c_sc->add_option("--partition", sc.partition, "Job pool: test, val, train or all (default test with a bank)");
  c_sc->add_option("--scenario", sc.scenario, "Preset cells: 1 random-tiling baselines, 2 oracle-tiling baselines")
      ->check(CLI::Range(1, 2));
  c_sc->add_option("--strategy", sc.strategies,
                   "random, fcfs, lifo, sjf-nodes, sjf-edges, sjf-truth, sjf-predicted or all; repeatable");
  c_sc->add_option("--tiling", sc.tiling, "predicted, random or oracle for every listed strategy");
  c_sc->add_option("--utilization", sc.arrivals.target_utilization, "Target utilization")->capture_default_str();
  c_sc->add_option("--pareto-shape", sc.arrivals.pareto_shape, "Pareto shape alpha")->capture_default_str();
  c_sc->add_option("--runs", sc.runs, "Runs (seeds seed..seed+runs-1)")->capture_default_str();
  c_sc->add_option("--seed", sc.seed, "Base seed")->capture_default_str();
  c_sc->add_flag("--no-shuffle", sc.no_shuffle, "Keep the job pool order in every run");
  c_sc->add_flag("--traces", sc.traces, "Write per-run traces under <out>/traces");
  c_sc->add_option("--out", sc.out, "Output directory")->required();
  sc.hw.attach(c_sc);

  ReportOptions rep;
  auto* c_rep = app.add_subcommand("report", "Render CSV outputs as a markdown summary");
  c_rep->add_option("inputs", rep.inputs, "CSV files (evaluation, ablation, schedule, ...)")
      ->required()
      ->check(CLI::ExistingFile);
  c_rep->add_option("--out", rep.out, "Markdown file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::usage);
  }

  try {
    if (*c_gen) run_gen(gen);
    if (*c_lab) run_label(lab);
    if (*c_feat) run_featurize(feat);
    if (*c_tr) run_train(tr);
    if (*c_ev) run_evaluate(ev);
    if (*c_sc) run_schedule_cmd(sc);
    if (*c_rep) run_report(rep);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::data);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::invariant);
  }
  return 0;
}
