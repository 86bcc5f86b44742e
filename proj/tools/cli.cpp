#include "playtime/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <charconv>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "playtime/classifiers.hpp"
#include "playtime/error.hpp"
#include "playtime/evaluation.hpp"
#include "playtime/features.hpp"
#include "playtime/ingest.hpp"
#include "playtime/synthgen.hpp"

namespace playtime::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kSeedEnv = "PLAYTIME_SEED";

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<int> parse_m_list(const std::string& text) {
  std::vector<int> values;
  for (const auto& item : split_list(text)) {
    int m = 0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), m);
    if (ec != std::errc{} || p != item.data() + item.size()) {
      throw Error(ErrorCode::InvalidConfig, "bad period count '" + item + "'");
    }
    values.push_back(m);
  }
  return values;
}

std::vector<FeatureType> parse_types(const std::string& text) {
  if (text == "all") {
    std::vector<FeatureType> all(std::begin(kProposedTypes), std::end(kProposedTypes));
    all.insert(all.end(), std::begin(kBaselineTypes), std::end(kBaselineTypes));
    return all;
  }
  std::vector<FeatureType> types;
  for (const auto& item : split_list(text)) {
    const auto type = parse_feature_type(item);
    if (!type) throw Error(ErrorCode::InvalidConfig, "unknown feature type '" + item + "'");
    types.push_back(*type);
  }
  return types;
}

std::vector<Algorithm> parse_algorithms(const std::string& text) {
  if (text == "all") return {std::begin(kAllAlgorithms), std::end(kAllAlgorithms)};
  std::vector<Algorithm> algorithms;
  for (const auto& item : split_list(text)) {
    const auto a = parse_algorithm(item);
    if (!a) throw Error(ErrorCode::InvalidConfig, "unknown algorithm '" + item + "'");
    algorithms.push_back(*a);
  }
  return algorithms;
}

Date parse_date_option(const std::string& text) {
  const auto date = Date::parse(text);
  if (!date) throw Error(ErrorCode::InvalidConfig, "bad date '" + text + "', expected YYYY-MM-DD");
  return *date;
}

std::uint64_t effective_seed(std::uint64_t flag_value) {
  const char* env = std::getenv(kSeedEnv);
  if (env == nullptr || *env == '\0') return flag_value;
  std::uint64_t seed = 0;
  const std::string_view text(env);
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc{} || p != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidConfig, std::string(kSeedEnv) + " is not an unsigned integer");
  }
  return seed;
}

/// Output files are staged in memory and only written once every step has
/// succeeded.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string contents) {
    files_.emplace_back(dir_ / name, std::move(contents));
  }

  void commit() const {
    std::error_code ec;
    if (!dir_.empty()) fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::InvalidInput, "cannot create " + dir_.string() + ": " + ec.message());
    for (const auto& [path, contents] : files_) write_file_atomic(path, contents);
  }

  [[nodiscard]] std::size_t size() const { return files_.size(); }

 private:
  fs::path dir_;
  std::vector<std::pair<fs::path, std::string>> files_;
};

std::string timestamp_line() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[64];
  std::strftime(buf, sizeof buf, "# generated %Y-%m-%dT%H:%M:%SZ\n", &utc);
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------- options

struct SynthOptions {
  PopulationConfig population;
  std::string horizon_end = "2018-12-31";
  std::string out_dir;
  unsigned threads = 1;
};

struct IngestCheckOptions {
  std::string records;
  int min_days = 15;
};

struct LabelOptions {
  std::string records;
  std::string output;
  std::string horizon_end;
  int gap_days = 3;
  int min_days = 15;
  bool long_term_only = false;
};

struct PipelineOptions {
  std::string records;
  std::string labels;
  std::string out_dir;
  std::string dataset = "dataset";
  int n = 15;
  std::string m_list = "2,3,5";
  std::string types = "all";
  std::string algorithms = "all";
  double log_base = 2.0;
  double epsilon = 1e-6;
  int min_days = 15;
  std::uint64_t seed = 42;
  unsigned threads = 1;
  bool no_timestamp = false;
  bool no_curves = false;
  std::string profile;
  TrainConfig train;
};

struct ReportOptions {
  std::string grid;
  std::string output;
};

void add_pipeline_options(CLI::App* cmd, PipelineOptions& o) {
  cmd->add_option("-i,--records", o.records, "Telemetry CSV (player_id,date,hour,hours_played)")
      ->required();
  cmd->add_option("-l,--labels", o.labels, "Label CSV (player_id,is_churner)")->required();
  cmd->add_option("-o,--output", o.out_dir, "Output directory")->required();
  cmd->add_option("-n,--window-days", o.n, "Latest days per player")->capture_default_str();
  cmd->add_option("-m,--periods", o.m_list, "Comma-separated period counts")->capture_default_str();
  cmd->add_option("--types", o.types,
                  "Feature types: all, or a list of proposed1,proposed2,proposed3,combined,raw,"
                  "baseline1,baseline2")
      ->capture_default_str();
  cmd->add_option("--log-base", o.log_base, "Entropy log base")->capture_default_str();
  cmd->add_option("--epsilon", o.epsilon, "Reference smoothing for cross-entropy")
      ->capture_default_str();
  cmd->add_option("--min-days", o.min_days, "Minimum distinct active days")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Seed for sampling, splitting and training (env PLAYTIME_SEED)")
      ->capture_default_str();
  cmd->add_option("--threads", o.threads, "Worker cap")->capture_default_str();
}

// ---------------------------------------------------------------- commands

int cmd_synth(SynthOptions o, std::ostream& out) {
  o.population.horizon_end = parse_date_option(o.horizon_end);
  o.population.rng_seed = effective_seed(o.population.rng_seed);
  const Population pop = generate(o.population, o.threads);
  std::ostringstream records;
  write_records(records, pop.records);
  std::ostringstream labels;
  write_labels(labels, pop.labels);
  OutputSet files(o.out_dir);
  files.add("records.csv", records.str());
  files.add("labels.csv", labels.str());
  files.commit();
  const auto churners = std::count_if(pop.labels.begin(), pop.labels.end(),
                                      [](const ChurnLabel& l) { return l.is_churner; });
  out << "wrote " << pop.records.size() << " records for " << pop.labels.size() << " players ("
      << churners << " churners) to " << o.out_dir << '\n';
  return kOk;
}

int cmd_ingest_check(const IngestCheckOptions& o, std::ostream& out, std::ostream& err) {
  std::ifstream in(o.records);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + o.records);
  const RecordsFile file = parse_records(in);
  for (const auto& issue : file.issues) err << o.records << ":" << issue.line << ": " << issue.message << '\n';
  if (!file.issues.empty()) {
    err << file.issues.size() << " invalid line(s)\n";
    return kInputError;
  }
  if (file.records.empty()) {
    err << o.records << ": no data rows\n";
    return kInputError;
  }
  std::set<std::string> players;
  Date first = file.records.front().date;
  Date last = first;
  for (const auto& rec : file.records) {
    players.insert(rec.player_id);
    first = std::min(first, rec.date);
    last = std::max(last, rec.date);
  }
  const auto consolidated = consolidate(file.records);
  out << "rows: " << file.records.size() << '\n'
      << "cells after merging duplicates: " << consolidated.size() << '\n'
      << "players: " << players.size() << '\n'
      << "dates: " << first.to_string() << " .. " << last.to_string() << '\n'
      << "long-term players (>= " << o.min_days
      << " days): " << filter_long_term(file.records, o.min_days).size() << '\n';
  return kOk;
}

int cmd_label(const LabelOptions& o, std::ostream& out) {
  const auto records = load_records(o.records);
  Date horizon = records.front().date;
  for (const auto& rec : records) horizon = std::max(horizon, rec.date);
  if (!o.horizon_end.empty()) horizon = parse_date_option(o.horizon_end);
  if (o.gap_days < 0) throw Error(ErrorCode::InvalidConfig, "gap-days must be non-negative");
  auto labels = label_players(records, horizon, o.gap_days);
  if (o.long_term_only) {
    const auto keep = filter_long_term(records, o.min_days);
    std::erase_if(labels, [&](const ChurnLabel& l) { return !keep.contains(l.player_id); });
  }
  std::ostringstream text;
  write_labels(text, labels);
  write_file_atomic(o.output, text.str());
  const auto churners =
      std::count_if(labels.begin(), labels.end(), [](const ChurnLabel& l) { return l.is_churner; });
  out << "labeled " << labels.size() << " players (" << churners << " churners) at horizon "
      << horizon.to_string() << '\n';
  return kOk;
}

GridConfig grid_config(const PipelineOptions& o) {
  GridConfig cfg;
  cfg.dataset = o.dataset;
  cfg.n = o.n;
  cfg.m_list = parse_m_list(o.m_list);
  cfg.feature_types = parse_types(o.types);
  cfg.algorithms = parse_algorithms(o.algorithms);
  cfg.entropy = {o.log_base, o.epsilon};
  cfg.train = o.train;
  cfg.min_days = o.min_days;
  cfg.seed = effective_seed(o.seed);
  cfg.threads = o.threads;
  cfg.curves = !o.no_curves;
  cfg.validate();
  return cfg;
}

int cmd_features(const PipelineOptions& o, std::ostream& out) {
  const GridConfig cfg = grid_config(o);
  std::optional<GlobalChurnerProfile> loaded;
  if (!o.profile.empty()) {
    if (cfg.m_list.size() != 1) {
      throw Error(ErrorCode::InvalidConfig, "--profile needs exactly one period count");
    }
    loaded = deserialize_profile(read_text(o.profile));
  }
  const auto records = load_records(o.records);
  const auto labels = load_labels(o.labels);
  const auto data = prepare_dataset(records, labels, cfg.n, cfg.min_days, cfg.seed, cfg.threads);

  std::vector<PlayerWindow> windows = data.train_windows;
  windows.insert(windows.end(), data.test_windows.begin(), data.test_windows.end());
  std::vector<int> y = data.train_y;
  y.insert(y.end(), data.test_y.begin(), data.test_y.end());

  OutputSet files(o.out_dir);
  std::ostringstream split;
  split << "player_id,split\n";
  for (const auto& [id, churner] : data.split.train) split << id << ",train\n";
  for (const auto& [id, churner] : data.split.test) split << id << ",test\n";
  files.add("split.csv", split.str());

  auto emit = [&](FeatureMatrix features, const std::string& name) {
    features.labels = y;
    std::ostringstream text;
    write_feature_csv(text, features);
    files.add(name, text.str());
  };
  for (int m : cfg.m_list) {
    const auto scheme = PeriodScheme::fitted(cfg.n, m);
    std::vector<PlayerWindow> window_m;
    std::vector<PlayerWindow> churners;
    for (std::size_t i = 0; i < windows.size(); ++i) {
      window_m.push_back(windows[i].latest(scheme.days()));
      if (i < data.train_windows.size() && y[i] == 1) churners.push_back(window_m.back());
    }
    const GlobalChurnerProfile profile = loaded ? *loaded : build_global_profile(churners, scheme);
    if (!(profile.scheme == scheme)) {
      throw Error(ErrorCode::SchemeMismatch, "profile scheme does not match m=" + std::to_string(m));
    }
    files.add("profile_m" + std::to_string(m) + ".json", serialize_profile(profile));
    for (auto type : cfg.feature_types) {
      if (is_baseline(type)) continue;
      emit(extract_features(window_m, &profile, scheme, cfg.entropy, type, cfg.threads),
           "features_" + std::string(to_string(type)) + "_m" + std::to_string(m) + ".csv");
    }
  }
  const PeriodScheme full(cfg.n, 1);
  for (auto type : cfg.feature_types) {
    if (!is_baseline(type)) continue;
    emit(extract_features(windows, nullptr, full, cfg.entropy, type, cfg.threads),
         "features_" + std::string(to_string(type)) + ".csv");
  }
  files.commit();
  out << "wrote " << files.size() << " files for " << windows.size() << " players to " << o.out_dir
      << '\n';
  return kOk;
}

int cmd_evaluate(const PipelineOptions& o, std::ostream& out) {
  const GridConfig cfg = grid_config(o);
  const auto records = load_records(o.records);
  const auto labels = load_labels(o.labels);
  const ExperimentGrid grid = run_grid(records, labels, cfg);

  OutputSet files(o.out_dir);
  std::ostringstream csv;
  write_grid_csv(csv, grid);
  files.add("grid.csv", csv.str());
  std::ostringstream table;
  if (!o.no_timestamp) table << timestamp_line();
  write_grid_table(table, grid);
  files.add("grid.txt", table.str());
  for (const auto& [name, curves] : grid.curves) {
    std::ostringstream text;
    write_curves_csv(text, curves);
    files.add("curves_" + name + ".csv", text.str());
  }
  files.commit();
  out << table.str();
  return kOk;
}

int cmd_report(const ReportOptions& o, std::ostream& out) {
  std::ifstream in(o.grid);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open " + o.grid);
  const ExperimentGrid grid = read_grid_csv(in);
  std::ostringstream table;
  write_grid_table(table, grid);
  if (!o.output.empty()) write_file_atomic(o.output, table.str());
  out << table.str();
  return kOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return kConfigError;
    case ErrorKind::Input: return kInputError;
    case ErrorKind::Degenerate: return kDegenerateData;
  }
  return kInputError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Playtime-regularity churn features: synthesis, extraction and evaluation"};
  app.require_subcommand(1);

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic player population");
  auto& pop = synth.population;
  synth_cmd->add_option("-o,--output", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--players", pop.n_players, "Number of players")->capture_default_str();
  synth_cmd->add_option("--churner-fraction", pop.churner_fraction)->capture_default_str();
  synth_cmd->add_option("--window-days", pop.window_days)->capture_default_str();
  synth_cmd->add_option("--history-days", pop.history_days)->capture_default_str();
  synth_cmd->add_option("--hours", pop.base_daily_hours, "Mean hours per active day")
      ->capture_default_str();
  synth_cmd->add_option("--intensity-spread", pop.intensity_spread,
                        "Log-scale spread of per-player intensity")
      ->capture_default_str();
  synth_cmd->add_option("--alpha-nc", pop.nonchurner_day_concentration,
                        "Non-churner day concentration")
      ->capture_default_str();
  synth_cmd->add_option("--alpha-c", pop.churner_day_concentration, "Churner day concentration")
      ->capture_default_str();
  synth_cmd->add_option("--decay", pop.churner_decay, "Churner activity decay per period")
      ->capture_default_str();
  synth_cmd->add_option("--decay-periods", pop.decay_periods)->capture_default_str();
  synth_cmd->add_option("--active-prob", pop.active_day_probability)->capture_default_str();
  synth_cmd->add_option("--night-damping", pop.night_damping)->capture_default_str();
  synth_cmd->add_option("--slot-concentration", pop.slot_concentration)->capture_default_str();
  synth_cmd->add_option("--gap-days", pop.gap_days)->capture_default_str();
  synth_cmd->add_option("--min-days", pop.min_active_days)->capture_default_str();
  synth_cmd->add_option("--horizon-end", synth.horizon_end)->capture_default_str();
  synth_cmd->add_option("--seed", pop.rng_seed, "Seed (env PLAYTIME_SEED)")->capture_default_str();
  synth_cmd->add_option("--threads", synth.threads)->capture_default_str();

  IngestCheckOptions check;
  auto* check_cmd = app.add_subcommand("ingest-check", "Validate a telemetry CSV");
  check_cmd->add_option("-i,--records", check.records)->required();
  check_cmd->add_option("--min-days", check.min_days)->capture_default_str();

  LabelOptions label;
  auto* label_cmd = app.add_subcommand("label", "Label churners from telemetry");
  label_cmd->add_option("-i,--records", label.records)->required();
  label_cmd->add_option("-o,--output", label.output, "Label CSV to write")->required();
  label_cmd->add_option("--horizon-end", label.horizon_end,
                        "Observation end date (default: latest record date)");
  label_cmd->add_option("--gap-days", label.gap_days)->capture_default_str();
  label_cmd->add_flag("--long-term-only", label.long_term_only, "Drop players below --min-days");
  label_cmd->add_option("--min-days", label.min_days)->capture_default_str();

  PipelineOptions features;
  auto* features_cmd = app.add_subcommand("features", "Export feature matrices");
  add_pipeline_options(features_cmd, features);
  features_cmd->add_option("--profile", features.profile,
                           "Churner profile JSON to score against instead of building one");

  PipelineOptions evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Run the AUC grid");
  add_pipeline_options(evaluate_cmd, evaluate);
  evaluate_cmd->add_option("--dataset", evaluate.dataset, "Dataset name in the grid")
      ->capture_default_str();
  evaluate_cmd->add_option("--algorithms", evaluate.algorithms, "all, or a list of LR,SVM,DT,RF")
      ->capture_default_str();
  evaluate_cmd->add_option("--lr", evaluate.train.learning_rate)->capture_default_str();
  evaluate_cmd->add_option("--l2", evaluate.train.l2_penalty)->capture_default_str();
  evaluate_cmd->add_option("--epochs", evaluate.train.epochs)->capture_default_str();
  evaluate_cmd->add_option("--max-depth", evaluate.train.max_depth)->capture_default_str();
  evaluate_cmd->add_option("--min-leaf", evaluate.train.min_leaf)->capture_default_str();
  evaluate_cmd->add_option("--trees", evaluate.train.n_trees)->capture_default_str();
  evaluate_cmd->add_flag("--no-timestamp", evaluate.no_timestamp, "Omit the timestamp line");
  evaluate_cmd->add_flag("--no-curves", evaluate.no_curves, "Skip curve summaries");

  ReportOptions report;
  auto* report_cmd = app.add_subcommand("report", "Render a grid CSV as a table");
  report_cmd->add_option("-i,--grid", report.grid)->required();
  report_cmd->add_option("-o,--output", report.output, "Also write the table here");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth, out);
    if (*check_cmd) return cmd_ingest_check(check, out, err);
    if (*label_cmd) return cmd_label(label, out);
    if (*features_cmd) return cmd_features(features, out);
    if (*evaluate_cmd) return cmd_evaluate(evaluate, out);
    if (*report_cmd) return cmd_report(report, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kConfigError;
}

}  // namespace playtime::cli
