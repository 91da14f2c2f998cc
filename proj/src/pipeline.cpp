#include "metacoarse/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "metacoarse/afg.hpp"
#include "metacoarse/backtrack.hpp"
#include "metacoarse/dataset.hpp"
#include "metacoarse/encode.hpp"
#include "metacoarse/hash.hpp"
#include "metacoarse/interchange.hpp"
#include "metacoarse/log.hpp"

namespace metacoarse {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) { return Fnv1a().u64(seed).str(tag).digest(); }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string compact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string method_label(CoarseningMethod m) {
  return m == CoarseningMethod::kIdentity ? "baseline" : std::string(to_string(m));
}

json split_to_json(const DatasetSplit& s) {
  json out;
  out["seed"] = s.seed;
  out["train"] = s.train_ids;
  out["val"] = s.val_ids;
  out["test"] = s.test_ids;
  out["train_counts"] = s.train_counts;
  out["val_counts"] = s.val_counts;
  out["test_counts"] = s.test_counts;
  return out;
}

DatasetSplit split_from_json(const nlohmann::json& in) {
  DatasetSplit s;
  s.seed = in.at("seed").get<std::uint64_t>();
  s.train_ids = in.at("train").get<std::vector<std::string>>();
  s.val_ids = in.at("val").get<std::vector<std::string>>();
  s.test_ids = in.at("test").get<std::vector<std::string>>();
  s.train_counts = in.at("train_counts").get<std::array<std::size_t, 2>>();
  s.val_counts = in.at("val_counts").get<std::array<std::size_t, 2>>();
  s.test_counts = in.at("test_counts").get<std::array<std::size_t, 2>>();
  return s;
}

json outcomes_to_json(const LevelResults& r) {
  json out;
  out["level"] = std::string(to_string(r.level));
  out["beta"] = r.beta;
  json list = json::array();
  for (const SampleOutcome& o : r.outcomes) {
    list.push_back({{"id", o.sample_id},
                    {"label", o.label},
                    {"prediction", o.prediction},
                    {"removed_matches", o.removed_matches},
                    {"kept_matches", o.kept_matches}});
  }
  out["outcomes"] = std::move(list);
  return out;
}

LevelResults outcomes_from_json(const nlohmann::json& in) {
  LevelResults r;
  const auto level = parse_level(in.at("level").get<std::string>());
  if (!level) throw std::runtime_error("unknown level " + in.at("level").dump());
  r.level = *level;
  r.beta = in.at("beta").get<double>();
  for (const auto& o : in.at("outcomes")) {
    r.outcomes.push_back({o.at("id").get<std::string>(), o.at("label").get<int>(), o.at("prediction").get<int>(),
                          o.at("removed_matches").get<bool>(), o.at("kept_matches").get<bool>()});
  }
  return r;
}

std::string lower_name(Level level) {
  std::string s(to_string(level));
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Times phases, wraps their failures and records the files they write.
class PhaseRunner {
 public:
  PhaseRunner(const fs::path& dir, RunManifest& manifest) : dir_(dir), manifest_(manifest) {}

  template <typename F>
  void run(const std::string& name, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    manifest_.phases.push_back({name, {}, 0.0});
    current_sample.clear();
    try {
      body();
    } catch (const PipelineError&) {
      throw;
    } catch (const std::exception& e) {
      throw PipelineError(name, current_sample, e.what());
    }
    manifest_.phases.back().seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log_info("phase " + name + " done");
  }

  void write(const std::string& relative, const std::string& text) {
    write_text(dir_ / relative, text);
    manifest_.phases.back().artifacts.push_back(relative);
    manifest_.artifact_hashes[relative] = Fnv1a().bytes(text.data(), text.size()).hex();
  }

  std::string current_sample;

 private:
  fs::path dir_;
  RunManifest& manifest_;
};

std::string jsonl(const std::vector<std::string>& lines) {
  std::string out;
  for (const std::string& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

std::vector<SampleOutcome> evaluate_test(const GcnModel& model, const std::vector<SampleGraph>& test,
                                         const std::map<std::string, ExplanationMask>& masks,
                                         std::string& current_sample) {
  std::vector<SampleOutcome> out;
  for (const SampleGraph& g : test) {
    current_sample = g.id();
    const FidelityOutcome f = fidelity_outcome(model, g, masks.at(g.id()));
    out.push_back({g.id(), to_int(g.label()), to_int(predict(model, g).label), f.removed_matches, f.kept_matches});
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig

void RunConfig::validate() const {
  if (!(ratio >= 0.0 && ratio < 1.0)) throw std::invalid_argument("coarsening ratio must lie in [0, 1)");
  if (method == CoarseningMethod::kIdentity && ratio != 0.0) {
    throw std::invalid_argument("the baseline (identity) coarsener requires r = 0");
  }
  if (method != CoarseningMethod::kIdentity && ratio == 0.0) {
    throw std::invalid_argument("r = 0 is the baseline; use the identity coarsener");
  }
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
  if (ig_steps < 1) throw std::invalid_argument("IG steps must be at least 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0) || !(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw std::invalid_argument("split fractions must lie in (0, 1)");
  }
  train.validate();
}

std::string RunConfig::hash() const {
  Fnv1a h;
  h.str(input.string()).str(to_string(method)).f64(ratio).f64(epsilon).u64(static_cast<std::uint64_t>(tau));
  h.u64(ig_steps).str(train.hash()).u64(seed).f64(train_fraction).f64(val_fraction).u64(dedup ? 1 : 0);
  return h.hex();
}

std::string RunConfig::to_json() const {
  json out;
  out["input"] = input.string();
  out["output_dir"] = output_dir.string();
  out["method"] = std::string(to_string(method));
  out["ratio"] = ratio;
  out["epsilon"] = epsilon;
  out["tau"] = "TES";
  out["ig_steps"] = ig_steps;
  out["train"] = json::parse(train.to_json());
  out["seed"] = seed;
  out["train_fraction"] = train_fraction;
  out["val_fraction"] = val_fraction;
  out["dedup"] = dedup;
  return out.dump(2);
}

RunConfig RunConfig::from_json(const std::string& text) {
  const auto in = nlohmann::json::parse(text);
  RunConfig c;
  c.input = in.value("input", std::string());
  c.output_dir = in.value("output_dir", std::string());
  if (in.contains("method")) {
    const auto m = parse_coarsening_method(in.at("method").get<std::string>());
    if (!m) throw std::invalid_argument("unknown coarsening method " + in.at("method").dump());
    c.method = *m;
  }
  c.ratio = in.value("ratio", c.ratio);
  c.epsilon = in.value("epsilon", c.epsilon);
  if (in.contains("tau") && in.at("tau").get<std::string>() != "TES") {
    throw std::invalid_argument("only TES selection is supported");
  }
  c.ig_steps = in.value("ig_steps", c.ig_steps);
  if (in.contains("train")) c.train = TrainConfig::from_json(in.at("train").dump());
  c.seed = in.value("seed", c.seed);
  c.train_fraction = in.value("train_fraction", c.train_fraction);
  c.val_fraction = in.value("val_fraction", c.val_fraction);
  c.dedup = in.value("dedup", c.dedup);
  return c;
}

RunConfig RunConfig::load(const fs::path& path) { return from_json(read_text(path)); }

PipelineError::PipelineError(std::string phase, std::string sample_id, const std::string& detail)
    : std::runtime_error("phase " + phase + (sample_id.empty() ? "" : ", sample " + sample_id) + ": " + detail),
      phase_(std::move(phase)),
      sample_id_(std::move(sample_id)) {}

std::string RunManifest::to_json() const {
  json out;
  out["version"] = version;
  out["config_hash"] = config_hash;
  json phases_json = json::array();
  for (const PhaseRecord& p : phases) {
    phases_json.push_back({{"name", p.name}, {"artifacts", p.artifacts}, {"seconds", p.seconds}});
  }
  out["phases"] = std::move(phases_json);
  out["artifact_hashes"] = artifact_hashes;
  return out.dump(2);
}

// ---------------------------------------------------------------------------
// run_pipeline

namespace {

void run_phases(const RunConfig& config, RunOutcome& outcome, PhaseRunner& phases) {
  const Level upper_level = config.method == CoarseningMethod::kIdentity ? Level::kCfg : Level::kCoarseCfg;
  const std::string upper = lower_name(upper_level);
  const SelectionPolicy policy{config.tau, config.epsilon};

  phases.run("config", [&] { phases.write("config.json", config.to_json() + "\n"); });

  std::vector<SampleGraph> samples;
  phases.run("load", [&] {
    LoadResult loaded = load_samples(config.input);
    for (const Rejection& r : loaded.rejected) log_warning("rejected " + r.sample_id + ": " + r.reason);
    samples = std::move(loaded.samples);
    if (samples.empty()) throw std::runtime_error("no valid samples in " + config.input.string());
  });

  if (config.dedup) {
    phases.run("dedup", [&] {
      const std::size_t before = samples.size();
      samples = dedup_nonisomorphic(samples);
      log_info("dedup kept " + std::to_string(samples.size()) + " of " + std::to_string(before));
    });
  }

  DatasetSplit split;
  std::map<std::string, const SampleGraph*> by_id;
  phases.run("split", [&] {
    split = split_dataset(samples, config.train_fraction, config.val_fraction, config.seed);
    for (const SampleGraph& g : samples) by_id[g.id()] = &g;
    phases.write("split.json", split_to_json(split).dump(2) + "\n");
  });

  std::vector<std::string> all_ids;
  for (const auto* ids : {&split.train_ids, &split.val_ids, &split.test_ids}) {
    all_ids.insert(all_ids.end(), ids->begin(), ids->end());
  }
  std::vector<std::string> sorted_ids = all_ids;
  std::sort(sorted_ids.begin(), sorted_ids.end());

  Vocabulary vocab;
  phases.run("vocabulary", [&] {
    std::vector<SampleGraph> train_cfg;
    for (const std::string& id : split.train_ids) train_cfg.push_back(*by_id.at(id));
    vocab = Vocabulary::build(train_cfg);
    phases.write("vocabulary.json", vocab.to_json() + "\n");
  });

  std::map<std::string, AfgResult> afgs;
  phases.run("afg", [&] {
    std::vector<std::string> lines;
    for (const std::string& id : sorted_ids) {
      phases.current_sample = id;
      const SampleGraph& cfg = *by_id.at(id);
      AfgResult afg = build_afg(cfg);
      if (!check_degree_preservation(cfg, afg.afg, afg.correspondence).all_pass()) {
        throw std::runtime_error("AFG does not preserve CFG degrees");
      }
      lines.push_back(serialize_sample(afg.afg));
      afgs.emplace(id, std::move(afg));
    }
    phases.write("afg.jsonl", jsonl(lines));
  });

  std::map<std::string, SampleGraph> upper_graphs;
  std::map<std::string, CoarseningMap> maps;
  phases.run("coarsen", [&] {
    std::vector<std::string> graph_lines, map_lines;
    for (const std::string& id : sorted_ids) {
      phases.current_sample = id;
      const SampleGraph& cfg = *by_id.at(id);
      CoarseningResult res = coarsen(cfg, config.method, config.ratio);
      SampleGraph coarse = upper_level == Level::kCfg ? res.coarse.relabeled(Level::kCfg) : std::move(res.coarse);
      graph_lines.push_back(serialize_sample(coarse));
      json line;
      line["id"] = id;
      line["map"] = json::parse(res.map.to_json());
      map_lines.push_back(line.dump());
      upper_graphs.emplace(id, embed_supernodes(coarse, res.map, embed_cfg_nodes(cfg, vocab)));
      maps.emplace(id, std::move(res.map));
    }
    phases.write(upper + ".jsonl", jsonl(graph_lines));
    phases.write("coarsening_maps.jsonl", jsonl(map_lines));
  });

  auto collect = [](const std::vector<std::string>& ids, const std::map<std::string, SampleGraph>& graphs) {
    std::vector<SampleGraph> out;
    for (const std::string& id : ids) out.push_back(graphs.at(id));
    return out;
  };
  const std::vector<SampleGraph> upper_train = collect(split.train_ids, upper_graphs);
  const std::vector<SampleGraph> upper_val = collect(split.val_ids, upper_graphs);
  const std::vector<SampleGraph> upper_test = collect(split.test_ids, upper_graphs);

  Checkpoint upper_ck;
  phases.run("train_" + upper, [&] {
    TrainConfig tc = config.train;
    tc.seed = derive_seed(config.seed, "upper");
    upper_ck = train(upper_train, upper_val, tc);
    phases.write("checkpoint_" + upper + ".json", upper_ck.to_json() + "\n");
  });

  std::map<std::string, ExplanationMask> upper_masks;
  phases.run("explain_" + upper, [&] {
    std::vector<std::string> lines;
    for (const std::string& id : sorted_ids) {
      phases.current_sample = id;
      const SampleGraph& g = upper_graphs.at(id);
      ExplanationMask mask = select_tes(g, integrated_gradients(upper_ck.model, g, config.ig_steps), policy);
      lines.push_back(mask.to_json());
      upper_masks.emplace(id, std::move(mask));
    }
    phases.write("explanations_" + upper + ".jsonl", jsonl(lines));
    outcome.upper.level = upper_level;
    outcome.upper.outcomes = evaluate_test(upper_ck.model, upper_test, upper_masks, phases.current_sample);
  });

  phases.run("backtrack", [&] {
    std::vector<std::string> record_lines, graph_lines;
    for (const std::string& id : sorted_ids) {
      phases.current_sample = id;
      const AfgResult& afg = afgs.at(id);
      BacktrackResult bt = build_bafg(upper_masks.at(id), maps.at(id), afg.correspondence, afg.afg);
      record_lines.push_back(bt.record.to_json());
      graph_lines.push_back(serialize_sample(bt.bafg));
      outcome.bafgs.emplace(id, std::move(bt.bafg));
    }
    phases.write("backtrack.jsonl", jsonl(record_lines));
    phases.write("b_afg.jsonl", jsonl(graph_lines));
  });

  BafgDataset lower;
  phases.run("embed_b_afg", [&] { lower = assemble_bafg_dataset(split, outcome.bafgs, vocab); });

  Checkpoint lower_ck;
  phases.run("train_b_afg", [&] {
    TrainConfig tc = config.train;
    tc.seed = derive_seed(config.seed, "lower");
    lower_ck = train(lower.train, lower.val, tc);
    phases.write("checkpoint_b_afg.json", lower_ck.to_json() + "\n");
  });

  phases.run("explain_b_afg", [&] {
    std::map<std::string, ExplanationMask> masks;
    std::vector<std::string> lines;
    for (const SampleGraph& g : lower.test) {
      phases.current_sample = g.id();
      ExplanationMask mask = select_tes(g, integrated_gradients(lower_ck.model, g, config.ig_steps), policy);
      lines.push_back(mask.to_json());
      masks.emplace(g.id(), std::move(mask));
    }
    phases.write("explanations_b_afg.jsonl", jsonl(lines));
    outcome.lower.level = Level::kBacktrackedAfg;
    outcome.lower.outcomes = evaluate_test(lower_ck.model, lower.test, masks, phases.current_sample);
  });

  phases.run("metrics", [&] {
    std::vector<SampleGraph> all_upper = upper_train;
    all_upper.insert(all_upper.end(), upper_val.begin(), upper_val.end());
    all_upper.insert(all_upper.end(), upper_test.begin(), upper_test.end());
    std::vector<SampleGraph> all_lower = lower.train;
    all_lower.insert(all_lower.end(), lower.val.begin(), lower.val.end());
    all_lower.insert(all_lower.end(), lower.test.begin(), lower.test.end());
    outcome.upper.beta = beta_score(all_upper);
    outcome.lower.beta = beta_score(all_lower);
    if (outcome.upper.beta != 1.0) log_warning("beta at " + upper + " is " + fixed(outcome.upper.beta) + ", expected 1");
    if (outcome.lower.beta != 0.0) log_warning("beta at B_AFG is " + fixed(outcome.lower.beta) + ", expected 0");

    json results;
    results["config_hash"] = outcome.manifest.config_hash;
    results["upper"] = outcomes_to_json(outcome.upper);
    results["lower"] = outcomes_to_json(outcome.lower);
    phases.write("level_results.json", results.dump(2) + "\n");

    outcome.report = aggregate_report(evaluate_level(outcome.upper.level, outcome.upper.outcomes, outcome.upper.beta),
                                      evaluate_level(outcome.lower.level, outcome.lower.outcomes, outcome.lower.beta));
    json metrics;
    metrics["version"] = kVersion;
    json echoed = json::parse(config.to_json());
    echoed.erase("output_dir");  // runs in different directories must compare equal
    metrics["config"] = std::move(echoed);
    metrics["config_hash"] = outcome.manifest.config_hash;
    metrics["report"] = json::parse(outcome.report.to_json());
    phases.write("metrics.json", metrics.dump(2) + "\n");
  });

}

}  // namespace

RunOutcome run_pipeline(const RunConfig& config) {
  config.validate();
  fs::create_directories(config.output_dir);
  RunOutcome outcome;
  outcome.manifest.config_hash = config.hash();
  PhaseRunner phases(config.output_dir, outcome.manifest);
  try {
    run_phases(config, outcome, phases);
  } catch (...) {
    // Keep whatever was written so far discoverable.
    write_text(config.output_dir / "manifest.json", outcome.manifest.to_json() + "\n");
    throw;
  }
  write_text(config.output_dir / "manifest.json", outcome.manifest.to_json() + "\n");
  return outcome;
}

MetricsReport report_from_run(const fs::path& run_dir) {
  const auto results = nlohmann::json::parse(read_text(run_dir / "level_results.json"));
  const LevelResults upper = outcomes_from_json(results.at("upper"));
  const LevelResults lower = outcomes_from_json(results.at("lower"));
  return aggregate_report(evaluate_level(upper.level, upper.outcomes, upper.beta),
                          evaluate_level(lower.level, lower.outcomes, lower.beta));
}

std::vector<CurvePoint> curves_from_run(const fs::path& run_dir, bool upper_level,
                                        const std::vector<double>& epsilon_grid) {
  const RunConfig config = RunConfig::load(run_dir / "config.json");
  const Level level = !upper_level                                    ? Level::kBacktrackedAfg
                      : config.method == CoarseningMethod::kIdentity ? Level::kCfg
                                                                     : Level::kCoarseCfg;
  const std::string name = lower_name(level);
  const Vocabulary vocab = Vocabulary::load(run_dir / "vocabulary.json");
  const Checkpoint ck = Checkpoint::load(run_dir / ("checkpoint_" + name + ".json"));
  const DatasetSplit split = split_from_json(nlohmann::json::parse(read_text(run_dir / "split.json")));
  const std::set<std::string> test_ids(split.test_ids.begin(), split.test_ids.end());

  std::map<std::string, Eigen::VectorXd> attributions;
  {
    std::ifstream in(run_dir / ("explanations_" + name + ".jsonl"));
    if (!in) throw std::runtime_error("missing explanations for level " + name);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      ExplanationMask mask = ExplanationMask::from_json(line);
      attributions.emplace(mask.sample_id, std::move(mask.attribution));
    }
  }

  std::vector<SampleGraph> samples;
  std::vector<Eigen::VectorXd> attr;
  for (const SampleGraph& raw : load_samples(run_dir / (name + ".jsonl")).samples) {
    if (!test_ids.count(raw.id())) continue;
    SampleGraph g = upper_level ? embed_cfg_nodes(raw, vocab) : embed_bafg_nodes(raw, vocab);
    if (to_int(predict(ck.model, g).label) != to_int(g.label())) continue;
    auto it = attributions.find(g.id());
    if (it == attributions.end()) throw std::runtime_error("no explanation for test sample " + g.id());
    samples.push_back(std::move(g));
    attr.push_back(it->second);
  }
  return characterization_curve(ck.model, samples, attr, epsilon_grid);
}

std::string curve_table(const std::vector<CurvePoint>& curve) {
  std::string out = "epsilon\tfid_plus\tfid_minus\tcharact\tselected_fraction\tsamples\n";
  for (const CurvePoint& p : curve) {
    out += fixed(p.epsilon) + '\t' + fixed(p.fid_plus) + '\t' + fixed(p.fid_minus) + '\t' + fixed(p.charact) + '\t' +
           fixed(p.mean_selected_fraction) + '\t' + std::to_string(p.samples) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps

std::vector<RunConfig> sweep_grid(const RunConfig& base, const std::vector<CoarseningMethod>& methods,
                                  const std::vector<double>& ratios) {
  std::vector<RunConfig> configs;
  RunConfig baseline = base;
  baseline.method = CoarseningMethod::kIdentity;
  baseline.ratio = 0.0;
  baseline.output_dir = base.output_dir / "baseline";
  configs.push_back(baseline);
  for (CoarseningMethod m : methods) {
    if (m == CoarseningMethod::kIdentity) continue;
    for (double r : ratios) {
      RunConfig c = base;
      c.method = m;
      c.ratio = r;
      c.output_dir = base.output_dir / (std::string(to_string(m)) + "_r" + compact(r));
      configs.push_back(c);
    }
  }
  return configs;
}

SweepResult sweep(const std::vector<RunConfig>& configs) {
  if (configs.empty()) throw std::invalid_argument("sweep needs at least one config");
  const RunConfig& first = configs.front();
  for (const RunConfig& c : configs) {
    if (c.seed != first.seed) throw std::invalid_argument("sweep configs use different split seeds");
    if (c.input != first.input) throw std::invalid_argument("sweep configs read different inputs");
    if (c.train_fraction != first.train_fraction || c.val_fraction != first.val_fraction || c.dedup != first.dedup) {
      throw std::invalid_argument("sweep configs use different split settings");
    }
  }
  SweepResult result;
  std::optional<std::string> split_text;
  for (const RunConfig& c : configs) {
    RunOutcome run = run_pipeline(c);
    const std::string this_split = read_text(c.output_dir / "split.json");
    if (split_text && *split_text != this_split) throw std::runtime_error("split differs between sweep runs");
    split_text = this_split;
    result.rows.push_back({c.method, c.ratio, c.output_dir, std::move(run.report)});
    result.trained_models += 2;
  }
  return result;
}

std::string SweepResult::inference_table() const {
  std::string out =
      "method\tr\tlevel\taccuracy\tbenign_precision\tbenign_recall\tbenign_f1\t"
      "malicious_precision\tmalicious_recall\tmalicious_f1\taverage_accuracy\n";
  for (const SweepRow& row : rows) {
    for (const LevelEvaluation* e : {&row.report.upper, &row.report.lower}) {
      const InferenceMetrics& m = e->inference;
      out += method_label(row.method) + '\t' + compact(row.ratio) + '\t' + std::string(to_string(e->level)) + '\t' +
             fixed(m.accuracy) + '\t' + fixed(m.benign.precision) + '\t' + fixed(m.benign.recall) + '\t' +
             fixed(m.benign.f1) + '\t' + fixed(m.malicious.precision) + '\t' + fixed(m.malicious.recall) + '\t' +
             fixed(m.malicious.f1) + '\t' + fixed(row.report.average_accuracy) + '\n';
    }
  }
  return out;
}

std::string SweepResult::explainability_table() const {
  std::string out =
      "method\tr\tlevel\tfid_plus\tfid_minus\tcharact_all\tcharact_benign\tcharact_malicious\t"
      "charact_per_sample\tlambda_all\tlambda_benign\tlambda_malicious\tbeta\n";
  for (const SweepRow& row : rows) {
    for (const LevelEvaluation* e : {&row.report.upper, &row.report.lower}) {
      const FidelityScores fid = e->fid_all.value_or(FidelityScores{});
      out += method_label(row.method) + '\t' + compact(row.ratio) + '\t' + std::string(to_string(e->level)) + '\t' +
             fixed(fid.fid_plus) + '\t' + fixed(fid.fid_minus) + '\t' + fixed(e->charact_all) + '\t' +
             fixed(e->charact_benign) + '\t' + fixed(e->charact_malicious) + '\t' + fixed(fid.charact_per_sample) +
             '\t' + fixed(row.report.lambda_all) + '\t' + fixed(row.report.lambda_benign) + '\t' +
             fixed(row.report.lambda_malicious) + '\t' + fixed(e->beta) + '\n';
    }
  }
  return out;
}

}  // namespace metacoarse
