// Copyright 2026 The fundus-clip Authors
// SPDX-License-Identifier: Apache-2.0

#include "fclip/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "fclip/config.hpp"
#include "fclip/corpus_tools.hpp"
#include "fclip/data_model.hpp"
#include "fclip/errors.hpp"
#include "fclip/evaluation.hpp"
#include "fclip/image.hpp"
#include "fclip/model.hpp"
#include "fclip/trainer.hpp"

namespace fclip {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_json(const json& j, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(path.string() + " is not valid JSON: " + e.what());
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
  std::string out;
  SyntheticConfig config;
};

int cmd_synth(const SynthArgs& a, RunManifest& m) {
  const SyntheticCorpora corpora = make_synthetic_corpus(a.config);
  const fs::path root(a.out);
  m.artifacts["expert_manifest"] = save_corpus(corpora.expert, root / "expert").string();
  m.artifacts["public_manifest"] = save_corpus(corpora.pub, root / "public").string();
  m.seed = a.config.seed;
  m.config = {{"out", a.out},
              {"categories", a.config.num_categories},
              {"per_class", a.config.samples_per_category},
              {"image_size", a.config.image_size},
              {"noise", a.config.noise_level},
              {"seed", a.config.seed}};
  return kExitOk;
}

// ---- build-corpus --------------------------------------------------------

struct BuildArgs {
  std::string input;
  std::string out;
  std::string name;
  std::string kind = "expert";
  double gamma = 1.0;
  bool dark_tone = false;
  std::string ffa_ref;
  std::string oct_ref;
  std::uint64_t seed = 0;
};

Image prepare_image(const fs::path& path, const BuildArgs& a) {
  Image img = read_png(path);
  if (a.dark_tone) img = gamma_correct(img, kDarkToneGamma);
  if (a.gamma != 1.0) img = gamma_correct(img, a.gamma);
  return img;
}

std::vector<ImageTextRecord> expert_records_from_dir(const BuildArgs& a) {
  std::vector<fs::path> captions;
  for (const auto& entry : fs::directory_iterator(a.input)) {
    const auto& p = entry.path();
    const std::string name = p.filename().string();
    if (p.extension() == ".txt" && name.size() > 7 && name.substr(name.size() - 7) == ".zh.txt") continue;
    if (p.extension() == ".txt") captions.push_back(p);
  }
  std::sort(captions.begin(), captions.end());
  std::vector<ImageTextRecord> records;
  for (const auto& cap : captions) {
    const std::string stem = cap.stem().string();
    const CaptionBlock en = split_caption(read_text(cap));
    std::map<char, std::string> zh;
    const fs::path zh_path = cap.parent_path() / (stem + ".zh.txt");
    if (fs::exists(zh_path)) {
      const CaptionBlock zb = split_caption(read_text(zh_path));
      for (const auto& s : zb.subcaptions) zh[s.letter] = trim(zb.preamble + " " + s.caption);
    }
    for (const auto& sub : en.subcaptions) {
      fs::path img = fs::path(a.input) / (stem + "_" + std::string(1, sub.letter) + ".png");
      if (!fs::exists(img) && en.subcaptions.size() == 1) img = fs::path(a.input) / (stem + ".png");
      const std::string id = stem + "_" + std::string(1, sub.letter);
      if (!fs::exists(img)) throw LoadError(id, "no image file for sub-caption " + std::string(1, sub.letter));
      ImageTextRecord r;
      r.id = id;
      r.image = prepare_image(img, a);
      r.text_en = trim(en.preamble + " " + sub.caption);
      if (auto it = zh.find(sub.letter); it != zh.end()) r.text_zh = it->second;
      r.source_kind = SourceKind::ExpertPair;
      records.push_back(std::move(r));
    }
  }
  return records;
}

std::vector<ImageTextRecord> public_records_from_dir(const BuildArgs& a) {
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(a.input)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<ImageTextRecord> records;
  for (const auto& dir : dirs) {
    std::vector<fs::path> images;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".png") images.push_back(entry.path());
    }
    std::sort(images.begin(), images.end());
    for (const auto& img : images) {
      ImageTextRecord r;
      r.id = dir.filename().string() + "/" + img.stem().string();
      r.image = prepare_image(img, a);
      r.categories = {dir.filename().string()};
      r.source_kind = SourceKind::LabeledPublic;
      records.push_back(std::move(r));
    }
  }
  return records;
}

int cmd_build_corpus(const BuildArgs& a, RunManifest& m) {
  if (!fs::is_directory(a.input)) throw Error("input directory " + a.input + " does not exist");
  if (a.ffa_ref.empty() != a.oct_ref.empty()) throw InvalidArgument("--ffa-ref and --oct-ref must be given together");
  std::vector<ImageTextRecord> records = a.kind == "expert" ? expert_records_from_dir(a) : public_records_from_dir(a);
  if (!a.ffa_ref.empty()) {
    const ModalityReferences refs{color_histogram(read_png(a.ffa_ref)), color_histogram(read_png(a.oct_ref))};
    std::vector<ColorHistogram> hists;
    for (const auto& r : records) hists.push_back(color_histogram(r.image));
    const auto modalities = classify_modality(hists, refs, a.seed);
    for (std::size_t i = 0; i < records.size(); ++i) records[i].modality = modalities[i];
  }
  const std::string name = a.name.empty() ? fs::path(a.input).filename().string() : a.name;
  const Corpus corpus(name, std::move(records));
  m.artifacts["manifest"] = save_corpus(corpus, a.out).string();
  m.seed = a.seed;
  m.config = {{"input", a.input},   {"out", a.out},         {"name", name},
              {"kind", a.kind},     {"gamma", a.gamma},     {"dark_tone", a.dark_tone},
              {"ffa_ref", a.ffa_ref}, {"oct_ref", a.oct_ref}, {"seed", a.seed}};
  return kExitOk;
}

// ---- pretrain ------------------------------------------------------------

struct PretrainArgs {
  std::string expert;
  std::string pub;
  std::string config;
  std::string out;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<int> max_steps;
  std::optional<double> lr;
  std::optional<double> alpha;
  std::optional<double> weight_decay;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> ablation;
};

void apply_ablation(const std::string& name, AblationFlags& flags) {
  if (name == "full") {
    flags = {true, true, false};
  } else if (name == "no-revision") {
    flags.revision_on = false;
    flags.fusion_on = false;
  } else if (name == "no-mixed") {
    flags.mixed_on = false;
    flags.fusion_on = false;
  } else if (name == "fusion") {
    flags.revision_on = false;
    flags.fusion_on = true;
  } else {
    throw ConfigError("unknown ablation '" + name + "'");
  }
}

int cmd_pretrain(const PretrainArgs& a, RunManifest& m, std::ostream& out) {
  TrainConfig config = a.config.empty() ? TrainConfig{} : load_train_config(a.config);
  if (a.epochs) config.epochs = *a.epochs;
  if (a.batch_size) config.batch_size = *a.batch_size;
  if (a.max_steps) config.max_steps = *a.max_steps;
  if (a.lr) config.lr = *a.lr;
  if (a.alpha) config.alpha = *a.alpha;
  if (a.weight_decay) config.weight_decay = *a.weight_decay;
  if (a.seed) {
    config.seed = *a.seed;
    config.model.init_seed = *a.seed;
  }
  if (a.ablation) apply_ablation(*a.ablation, config.ablation);
  config.validate();

  const Corpus pub = load_corpus(a.pub);
  const Corpus expert = config.ablation.mixed_on || !a.expert.empty() ? load_corpus(a.expert) : Corpus{};
  const fs::path root(a.out);
  FitOutputs outputs;
  outputs.checkpoint = root / "checkpoint.fclip";
  outputs.loss_log = root / "loss_log.jsonl";
  Model model(config.model);
  const FitResult result = fit(model, expert, pub, config, outputs);

  m.seed = config.seed;
  m.config = to_json(config);
  m.config["expert"] = a.expert;
  m.config["public"] = a.pub;
  m.artifacts["checkpoint"] = outputs.checkpoint.string();
  m.artifacts["loss_log"] = outputs.loss_log.string();
  m.config_hash = config_hash(to_json(config));
  if (!result.trace.empty()) {
    const auto& last = result.trace.back().loss;
    out << "trained " << result.trace.size() << " steps; final total loss " << last.total << '\n';
  }
  return kExitOk;
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint;
  std::string corpus;
  std::string protocol = "zeroshot";
  std::string out;
  std::string prompt_template;
  int shots = 5;
  int folds = 5;
  std::uint64_t seed = 0;
  double beta = kTipBeta;
  double mix = kTipMix;
  double train_fraction = 0.0;
  bool plain_accuracy = false;
};

int cmd_eval(const EvalArgs& a, RunManifest& m, std::ostream& out) {
  if (a.shots != 1 && a.shots != 5 && a.shots != 10) throw InvalidArgument("--shots must be 1, 5 or 10");
  Checkpoint ck = load_checkpoint(a.checkpoint);
  const Corpus corpus = load_corpus(a.corpus);
  EvalOptions o;
  o.protocol = parse_protocol(a.protocol);
  o.shots = a.shots;
  o.folds = a.folds;
  o.seed = a.seed;
  o.prompt_template = a.prompt_template.empty() ? ck.config.prompt_template : a.prompt_template;
  o.train_fraction = a.train_fraction;
  o.tip_beta = a.beta;
  o.tip_mix = a.mix;
  o.metrics.balanced_accuracy = !a.plain_accuracy;
  const MetricReport report = kfold_evaluate(corpus, ck.model->encoders(), o);

  json j = to_json(report);
  j["protocol"] = std::string(to_string(o.protocol));
  j["shots"] = o.protocol == Protocol::ZeroShot || o.protocol == Protocol::LinearProbe ? json(nullptr) : json(o.shots);
  j["corpus"] = corpus.name();
  j["checkpoint"] = a.checkpoint;
  j["config_hash"] = ck.config_hash;
  j["seed"] = a.seed;
  if (a.out.empty()) {
    out << j.dump(2) << '\n';
  } else {
    write_json(j, a.out);
    m.artifacts["report"] = a.out;
  }
  m.seed = a.seed;
  m.config = {{"checkpoint", a.checkpoint}, {"corpus", a.corpus},  {"protocol", a.protocol},
              {"shots", a.shots},           {"folds", a.folds},    {"seed", a.seed},
              {"beta", a.beta},             {"mix", a.mix},        {"train_fraction", a.train_fraction},
              {"plain_accuracy", a.plain_accuracy}, {"template", o.prompt_template}};
  return kExitOk;
}

// ---- report --------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out;
};

std::string fmt(const json& v) {
  if (!v.is_number()) return "n/a";
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v.get<double>();
  return os.str();
}

std::string render_svg(const std::vector<std::pair<std::string, json>>& rows) {
  const int bar = 14;
  const int group = 3 * bar + 20;
  const int height = 220;
  const int width = 60 + group * static_cast<int>(rows.size());
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height + 40 << "\">\n";
  s << "<line x1=\"40\" y1=\"" << height << "\" x2=\"" << width << "\" y2=\"" << height << "\" stroke=\"black\"/>\n";
  const char* colors[] = {"#4c72b0", "#dd8452", "#55a868"};
  const char* keys[] = {"aca", "auc", "f1"};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int x0 = 50 + group * static_cast<int>(r);
    for (int k = 0; k < 3; ++k) {
      const json& v = rows[r].second[keys[k]];
      const double val = v.is_number() ? std::clamp(v.get<double>(), 0.0, 1.0) : 0.0;
      const int h = static_cast<int>(std::lround(val * (height - 20)));
      s << "<rect x=\"" << x0 + k * bar << "\" y=\"" << height - h << "\" width=\"" << bar - 2 << "\" height=\"" << h
        << "\" fill=\"" << colors[k] << "\"><title>" << keys[k] << ' ' << fmt(v) << "</title></rect>\n";
    }
    s << "<text x=\"" << x0 << "\" y=\"" << height + 15 << "\" font-size=\"10\">" << rows[r].first << "</text>\n";
  }
  for (int k = 0; k < 3; ++k) {
    s << "<text x=\"" << 50 + 50 * k << "\" y=\"" << height + 32 << "\" font-size=\"10\" fill=\"" << colors[k] << "\">"
      << keys[k] << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

int cmd_report(const ReportArgs& a, RunManifest& m, std::ostream& out, std::ostream& err) {
  std::vector<std::pair<std::string, json>> rows;
  std::set<std::string> hashes;
  for (const auto& path : a.inputs) {
    const json j = read_json(path);
    if (!j.is_object() || !j.contains("aca") || !j.contains("protocol")) {
      err << "warning: " << path << " is not an eval report; skipped\n";
      continue;
    }
    std::string key = j.value("protocol", std::string("unknown"));
    if (j.contains("shots") && j["shots"].is_number()) key += "@" + std::to_string(j["shots"].get<int>()) + "shot";
    rows.emplace_back(key, j);
    if (j.contains("config_hash") && j["config_hash"].is_string()) hashes.insert(j["config_hash"].get<std::string>());
  }
  std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

  std::ostringstream md;
  md << "| protocol | corpus | ACA | AUC | F1 | folds |\n|---|---|---|---|---|---|\n";
  const bool conflict = hashes.size() > 1;
  std::map<std::string, int> note_of;
  for (const auto& h : hashes) note_of.emplace(h, static_cast<int>(note_of.size()) + 1);
  for (const auto& [key, j] : rows) {
    md << "| " << key << " | " << j.value("corpus", std::string("?")) << " | " << fmt(j.value("aca", json()))
       << " | " << fmt(j.value("auc", json())) << " | " << fmt(j.value("f1", json())) << " | "
       << j.value("n_folds", 0);
    if (conflict) {
      const auto it = note_of.find(j.value("config_hash", std::string()));
      if (it != note_of.end()) md << " [^" << it->second << "]";
    }
    md << " |\n";
  }
  if (rows.empty()) {
    err << "warning: no eval reports given; writing an empty table\n";
    md << "\n_No results._\n";
  }
  if (conflict) {
    md << "\nRows come from checkpoints with different config hashes and are not directly comparable.\n\n";
    for (const auto& [h, n] : note_of) md << "[^" << n << "]: config hash " << h << "\n";
  }
  out << md.str();
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    const fs::path table = fs::path(a.out) / "report.md";
    const fs::path chart = fs::path(a.out) / "report.svg";
    std::ofstream(table, std::ios::trunc) << md.str();
    std::ofstream(chart, std::ios::trunc) << render_svg(rows);
    m.artifacts["table"] = table.string();
    m.artifacts["chart"] = chart.string();
  }
  m.config = {{"inputs", a.inputs}, {"out", a.out}};
  return kExitOk;
}

fs::path manifest_path_for(const std::string& command, const std::string& out) {
  if (out.empty()) return {};
  if (command == "eval") return fs::path(out + ".manifest.json");
  return fs::path(out) / "run_manifest.json";
}

}  // namespace

json to_json(const RunManifest& m) {
  return {{"command", m.command},       {"config_hash", m.config_hash}, {"seed", m.seed},
          {"start_time", m.start_time}, {"end_time", m.end_time},       {"config", m.config},
          {"artifacts", m.artifacts}};
}

void write_run_manifest(const RunManifest& manifest, const fs::path& path) { write_json(to_json(manifest), path); }

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fundus-clip: retinal image-text pretraining and evaluation", "fclip"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic expert + public corpus pair");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--categories", synth.config.num_categories, "Number of categories")->check(CLI::PositiveNumber);
  s->add_option("--per-class", synth.config.samples_per_category, "Records per category")->check(CLI::PositiveNumber);
  s->add_option("--image-size", synth.config.image_size, "Square image side")->check(CLI::PositiveNumber);
  s->add_option("--noise", synth.config.noise_level, "Pixel noise level in [0, 1)");
  s->add_option("--seed", synth.config.seed, "Random seed");

  BuildArgs build;
  auto* b = app.add_subcommand("build-corpus", "Build a manifest from images and caption files");
  b->add_option("--input", build.input, "Source directory")->required();
  b->add_option("--out", build.out, "Output directory")->required();
  b->add_option("--name", build.name, "Corpus name (default: input directory name)");
  b->add_option("--kind", build.kind, "expert: <stem>.txt captions; public: one sub-directory per category")
      ->check(CLI::IsMember({"expert", "public"}));
  b->add_option("--gamma", build.gamma, "Gamma applied to every image")->check(CLI::PositiveNumber);
  b->add_flag("--dark-tone", build.dark_tone, "Apply the dark-tone gamma before --gamma");
  b->add_option("--ffa-ref", build.ffa_ref, "Reference FFA image for modality classification");
  b->add_option("--oct-ref", build.oct_ref, "Reference OCT image for modality classification");
  b->add_option("--seed", build.seed, "Seed for modality clustering");

  PretrainArgs pre;
  // Defaults shown in --help; the values themselves come from --config.
  const TrainConfig defaults;
  auto* p = app.add_subcommand("pretrain", "Train encoders on an expert + public corpus pair");
  p->add_option("--expert", pre.expert, "Expert manifest (JSON lines)");
  p->add_option("--public", pre.pub, "Public manifest (JSON lines)")->required();
  p->add_option("--config", pre.config, "Flat JSON TrainConfig; flags override its values");
  p->add_option("--out", pre.out, "Output directory")->required();
  p->add_option("--epochs", pre.epochs, "Override epochs")->default_str(std::to_string(defaults.epochs));
  p->add_option("--batch-size", pre.batch_size, "Override batch size (even)")->default_str(std::to_string(defaults.batch_size));
  p->add_option("--max-steps", pre.max_steps, "Stop after this many steps (0 = full epochs)")
      ->default_str(std::to_string(defaults.max_steps));
  p->add_option("--lr", pre.lr, "Override base learning rate")->default_str(json(defaults.lr).dump());
  p->add_option("--alpha", pre.alpha, "Override revision loss weight")->default_str(json(defaults.alpha).dump());
  p->add_option("--weight-decay", pre.weight_decay, "Override weight decay")
      ->default_str(json(defaults.weight_decay).dump());
  p->add_option("--seed", pre.seed, "Seed for batching and initialization")->default_str(std::to_string(defaults.seed));
  p->add_option("--ablation", pre.ablation, "full | no-revision | no-mixed | fusion")
      ->default_str("full")
      ->check(CLI::IsMember({"full", "no-revision", "no-mixed", "fusion"}));

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint with k-fold cross-validation");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  e->add_option("--corpus", ev.corpus, "Labeled manifest (JSON lines)")->required();
  e->add_option("--protocol", ev.protocol, "zeroshot | clipadapter | tipadapter | tipadapter-f | linear")
      ->check(CLI::IsMember({"zeroshot", "clipadapter", "tipadapter", "tipadapter-f", "linear"}));
  e->add_option("--shots", ev.shots, "Shots per class for few-shot protocols")->check(CLI::IsMember({1, 5, 10}));
  e->add_option("--folds", ev.folds, "Number of folds")->check(CLI::Range(2, 1000));
  e->add_option("--seed", ev.seed, "Seed for folds and shot selection");
  e->add_option("--out", ev.out, "Report JSON path (default: stdout)");
  e->add_option("--template", ev.prompt_template, "Prompt template (default: the checkpoint's)");
  e->add_option("--beta", ev.beta, "TipAdapter sharpness")->check(CLI::PositiveNumber);
  e->add_option("--mix", ev.mix, "TipAdapter cache weight")->check(CLI::NonNegativeNumber);
  e->add_option("--train-fraction", ev.train_fraction, "Repeated stratified split with this training share");
  e->add_flag("--plain-accuracy", ev.plain_accuracy, "Report plain instead of balanced accuracy");

  ReportArgs rep;
  auto* r = app.add_subcommand("report", "Merge eval reports into a table and bar chart");
  r->add_option("inputs", rep.inputs, "Eval report JSON files")->default_str("");
  r->add_option("--out", rep.out, "Output directory for report.md and report.svg");

  std::vector<const char*> argv;
  argv.push_back("fclip");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunManifest manifest;
  manifest.start_time = utc_now();
  std::string out_dir;
  try {
    int code = kExitOk;
    if (*s) {
      manifest.command = "synth";
      out_dir = synth.out;
      code = cmd_synth(synth, manifest);
    } else if (*b) {
      manifest.command = "build-corpus";
      out_dir = build.out;
      code = cmd_build_corpus(build, manifest);
    } else if (*p) {
      manifest.command = "pretrain";
      out_dir = pre.out;
      code = cmd_pretrain(pre, manifest, out);
    } else if (*e) {
      manifest.command = "eval";
      out_dir = ev.out;
      code = cmd_eval(ev, manifest, out);
    } else {
      manifest.command = "report";
      out_dir = rep.out;
      code = cmd_report(rep, manifest, out, err);
    }
    if (manifest.config_hash.empty()) {
      // The output location does not change results, so it stays out of the hash.
      json hashed = manifest.config;
      if (hashed.is_object()) hashed.erase("out");
      manifest.config_hash = config_hash(hashed);
    }
    manifest.end_time = utc_now();
    if (const fs::path mp = manifest_path_for(manifest.command, out_dir); !mp.empty()) write_run_manifest(manifest, mp);
    return code;
  } catch (const TrainingError& ex) {
    err << "error: training diverged in " << ex.component() << ": " << ex.what() << '\n';
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
  }
  return kExitFailure;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace fclip
