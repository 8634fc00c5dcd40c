// Copyright 2026 The AWE Embedding Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "awe/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "awe/common.hpp"
#include "awe/corpus.hpp"
#include "awe/eval.hpp"
#include "awe/fetch.hpp"
#include "awe/inspect.hpp"
#include "awe/io.hpp"
#include "awe/model.hpp"
#include "awe/subword.hpp"
#include "awe/trainer.hpp"
#include "json.hpp"

namespace awe::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

/// Bad flag values found after parsing; reported as usage errors.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

std::vector<fs::path> to_paths(const std::vector<std::string>& names) {
  std::vector<fs::path> paths;
  for (const auto& name : names) {
    if (!fs::is_regular_file(name)) throw Error("no such file: " + name);
    paths.emplace_back(name);
  }
  return paths;
}

Json epoch_json(const EpochStats& e) {
  return {{"epoch", e.epoch},
          {"mean_loss", e.mean_loss},
          {"windows", e.windows},
          {"words", e.words},
          {"seconds", e.seconds},
          {"words_per_sec", e.words_per_sec},
          {"windows_per_sec", e.windows_per_sec},
          {"final_lr", e.final_lr}};
}

// ---------------------------------------------------------------------------
// train

/// Every config flag is bound to a scratch TrainConfig; only flags that were
/// actually given are copied over the config file (or the defaults).
struct ConfigFlags {
  TrainConfig values;
  std::string mode = std::string(to_string(TrainConfig{}.mode));
  std::vector<std::pair<CLI::Option*, std::function<void(TrainConfig&)>>> overlays;
  CLI::Option* mode_option = nullptr;

  template <typename Access>
  CLI::Option* add(CLI::App* app, const std::string& name, Access access,
                   const std::string& description) {
    auto& field = access(values);
    auto* option = app->add_option(name, field, description)->capture_default_str();
    overlays.emplace_back(option, [this, access](TrainConfig& c) {
      access(c) = access(values);
    });
    return option;
  }

  template <typename Access>
  CLI::Option* add_flag(CLI::App* app, const std::string& name, Access access,
                        const std::string& description) {
    auto* option = app->add_flag(name, access(values), description);
    overlays.emplace_back(option, [this, access](TrainConfig& c) {
      access(c) = access(values);
    });
    return option;
  }

  void apply(TrainConfig& config) const {
    if (mode_option->count() > 0) config.mode = parse_mode(mode);
    for (const auto& [option, copy] : overlays) {
      if (option->count() > 0) copy(config);
    }
  }

  bool any_given(std::initializer_list<std::string_view> allowed) const {
    if (mode_option->count() > 0) return true;
    for (const auto& [option, copy] : overlays) {
      if (option->count() == 0) continue;
      const auto name = option->get_name();
      if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) return true;
    }
    return false;
  }
};

struct TrainArgs {
  ConfigFlags flags;
  std::vector<std::string> corpus;
  std::string lemmas;
  std::string out;
  std::string report;
  std::string config_file;
  std::string resume;
  std::string save_vocab;
  int stop_after_epoch = 0;
  bool quiet = false;
};

void add_train(CLI::App& app, TrainArgs& a) {
  auto* cmd = app.add_subcommand("train", "Train CBOW, AWE or AWE-S embeddings");
  auto& f = a.flags;
  f.mode_option = cmd->add_option("--mode", f.mode, "Model: cbow, awe or awe-s")
                      ->check(CLI::IsMember({"cbow", "awe", "awe-s"}))
                      ->capture_default_str();
  cmd->add_option("--corpus", a.corpus, "Training text files, one sentence per line")
      ->required()
      ->expected(1, -1);
  f.add(cmd, "--dim", [](TrainConfig& c) -> auto& { return c.dim; },
        "Word vector dimension D");
  f.add(cmd, "--dim-kq", [](TrainConfig& c) -> auto& { return c.dim_kq; },
        "Key/query dimension D'");
  f.add(cmd, "--window", [](TrainConfig& c) -> auto& { return c.window; },
        "Maximum context radius b; the radius is drawn from 1..b per position");
  f.add(cmd, "--negatives", [](TrainConfig& c) -> auto& { return c.negatives; },
        "Negative samples per window");
  f.add(cmd, "--epochs", [](TrainConfig& c) -> auto& { return c.epochs; },
        "Passes over the corpus");
  f.add(cmd, "--lr", [](TrainConfig& c) -> auto& { return c.initial_lr; },
        "Initial learning rate, decayed linearly");
  f.add(cmd, "--min-lr", [](TrainConfig& c) -> auto& { return c.min_lr; },
        "Learning rate at the end of the last epoch");
  f.add(cmd, "--kq-lr-multiplier",
        [](TrainConfig& c) -> auto& { return c.kq_lr_multiplier; },
        "Learning-rate factor for the key and query matrices");
  f.add(cmd, "--min-count", [](TrainConfig& c) -> auto& { return c.min_count; },
        "Discard words seen fewer times");
  f.add(cmd, "--max-vocab", [](TrainConfig& c) -> auto& { return c.max_vocab; },
        "Keep at most this many words (0: no cap)");
  f.add(cmd, "--subsample", [](TrainConfig& c) -> auto& { return c.subsample_t; },
        "Frequent-word subsampling threshold t (0 disables)");
  f.add(cmd, "--neg-table-size",
        [](TrainConfig& c) -> auto& { return c.neg_table_size; },
        "Entries in the unigram^alpha negative table");
  f.add(cmd, "--alpha", [](TrainConfig& c) -> auto& { return c.alpha; },
        "Unigram exponent for negative sampling");
  f.add(cmd, "--workers", [](TrainConfig& c) -> auto& { return c.workers; },
        "Training threads; 1 is bit-reproducible");
  f.add(cmd, "--seed", [](TrainConfig& c) -> auto& { return c.seed; },
        "Random seed for initialization, windows and negatives");
  f.add(cmd, "--attention-clamp",
        [](TrainConfig& c) -> auto& { return c.model.attention_clamp; },
        "Clamp on the attention exponent k.q");
  f.add(cmd, "--logit-clamp",
        [](TrainConfig& c) -> auto& { return c.model.logit_clamp; },
        "Clamp on scores before log sigmoid");
  f.add_flag(cmd, "--normalize-attention",
             [](TrainConfig& c) -> auto& { return c.model.normalize_attention; },
             "Softmax-normalize attention weights (ablation)");
  f.add(cmd, "--progress-interval",
        [](TrainConfig& c) -> auto& { return c.progress_interval; },
        "Tokens between progress lines (0: per epoch only)");
  cmd->add_option("--lemmas", a.lemmas,
                  "word<TAB>pos<TAB>lemma table for AWE-S subword units");
  cmd->add_option("--out", a.out, "Checkpoint to write")->required();
  cmd->add_option("--report", a.report, "Write a JSON training report here");
  cmd->add_option("--config", a.config_file,
                  "JSON config file; flags given on the command line win");
  cmd->add_option("--resume", a.resume,
                  "Continue training from a checkpoint (keeps its vocabulary)");
  cmd->add_option("--stop-after-epoch", a.stop_after_epoch,
                  "Stop (and save) once this many epochs are complete")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--save-vocab", a.save_vocab, "Also write the vocabulary as TSV");
  cmd->add_flag("--quiet,-q", a.quiet, "Suppress progress output");
}

int do_train(const TrainArgs& a, std::ostream& err) {
  if (a.quiet) set_quiet(true);
  const auto corpus = to_paths(a.corpus);

  Checkpoint<Real> ck;
  if (!a.resume.empty()) {
    ck = load_checkpoint<Real>(a.resume);
    if (a.flags.any_given({"--epochs", "--workers", "--progress-interval"}) ||
        !a.config_file.empty() || !a.lemmas.empty()) {
      log_warning("--resume keeps the checkpoint's configuration; only --epochs, "
                  "--workers and --progress-interval apply");
    }
    for (const auto& [option, copy] : a.flags.overlays) {
      const auto name = option->get_name();
      if (option->count() > 0 &&
          (name == "--epochs" || name == "--workers" || name == "--progress-interval")) {
        copy(ck.config);
      }
    }
  } else {
    ck.config = a.config_file.empty() ? TrainConfig{} : config_from_json(read_text(a.config_file));
    a.flags.apply(ck.config);
  }
  try {
    ck.config.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  if (a.resume.empty()) {
    ck.vocab = build_vocab_from_files(corpus, ck.config.vocab_options());
    if (ck.config.mode == Mode::AweS) {
      if (a.lemmas.empty()) {
        log_warning("awe-s without --lemmas: every word is its own single subword unit");
        ck.subwords = SubwordMap::singleton(ck.vocab);
      } else {
        ck.subwords = SubwordMap::build(ck.vocab, LemmaTable::load(a.lemmas));
      }
    } else if (!a.lemmas.empty()) {
      log_warning("--lemmas is only used by awe-s; ignoring it");
    }
    ck.state.params = make_params<Real>(ck.config, ck.vocab, ck.subword_map());
  }
  if (!a.quiet) {
    std::ostringstream line;
    line << "mode " << to_string(ck.config.mode) << " | vocab " << ck.vocab.size()
         << " | tokens " << ck.vocab.total_tokens();
    if (ck.subwords) line << " | units " << ck.subwords->unit_count();
    log_info(line.str());
  }
  if (!a.save_vocab.empty()) {
    ensure_parent(a.save_vocab);
    std::ofstream out(a.save_vocab);
    ck.vocab.save_tsv(out);
    if (!out) throw Error("cannot write " + a.save_vocab);
  }

  TrainOptions options;
  if (a.stop_after_epoch > 0) options.stop_after_epoch = a.stop_after_epoch;
  options.progress = a.quiet ? nullptr : &err;
  const TrainReport report =
      train<Real>(corpus, ck.config, ck.vocab, ck.subword_map(), ck.state, options);

  ensure_parent(a.out);
  save_checkpoint(ck, a.out);

  if (!a.report.empty()) {
    Json epochs = Json::array();
    for (const auto& e : report.epochs) epochs.push_back(epoch_json(e));
    Json j = {{"config", Json::parse(config_to_json(ck.config))},
              {"config_file", a.config_file.empty() ? Json() : Json(a.config_file)},
              {"resumed_from", a.resume.empty() ? Json() : Json(a.resume)},
              {"corpus", a.corpus},
              {"vocab_size", ck.vocab.size()},
              {"unit_count", ck.state.params.rows(Matrix::U)},
              {"epochs_completed", ck.state.epochs_completed},
              {"epochs", epochs},
              {"wall_seconds", report.wall_seconds},
              {"total_windows", report.total_windows},
              {"total_words", report.total_words},
              {"words_per_sec", report.words_per_sec},
              {"windows_per_sec", report.windows_per_sec}};
    write_text(a.report, j.dump(2) + "\n");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Vector sources shared by eval and nn

struct VectorSource {
  std::string model;
  std::string vectors;
  bool binary = false;
};

void add_vector_source(CLI::App* cmd, VectorSource& s) {
  auto* model = cmd->add_option("--model", s.model, "Checkpoint written by train");
  auto* vectors = cmd->add_option("--vectors", s.vectors,
                                  "word2vec file instead of a checkpoint");
  auto* binary = cmd->add_flag("--binary", s.binary, "--vectors is in binary format");
  model->excludes(vectors);
  binary->needs(vectors);
  cmd->callback([model, vectors] {
    if (model->count() + vectors->count() == 0) {
      throw CLI::RequiredError("--model or --vectors");
    }
  });
}

struct LoadedVectors {
  std::optional<Checkpoint<Real>> checkpoint;
  std::unique_ptr<WordVectors> vectors;
  std::string name;
};

LoadedVectors load_vectors(const VectorSource& s) {
  LoadedVectors out;
  if (!s.model.empty()) {
    out.checkpoint = load_checkpoint<Real>(s.model);
    const auto& ck = *out.checkpoint;
    out.vectors = std::make_unique<ModelVectors<Real>>(ck.state.params, ck.vocab,
                                                        ck.subword_map());
    out.name = std::string(to_string(ck.config.mode));
  } else {
    out.vectors = std::make_unique<EmbeddingTable>(
        s.binary ? import_embeddings_binary(s.vectors) : import_embeddings(s.vectors));
    out.name = fs::path(s.vectors).stem().string();
  }
  return out;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  VectorSource source;
  std::vector<std::string> datasets;
  std::string report;
  bool json = false;
};

void add_eval(CLI::App& app, EvalArgs& a) {
  auto* cmd = app.add_subcommand("eval", "Spearman correlation on word-similarity datasets");
  add_vector_source(cmd, a.source);
  cmd->add_option("--dataset", a.datasets, "Similarity files (word,word,score)")
      ->required()
      ->expected(1, -1);
  cmd->add_option("--report", a.report, "Write the scores as JSON here");
  cmd->add_flag("--json", a.json, "Print JSON instead of a table");
}

int do_eval(const EvalArgs& a, std::ostream& out) {
  const auto loaded = load_vectors(a.source);
  std::vector<ScoreReport> reports;
  for (const auto& path : to_paths(a.datasets)) {
    reports.push_back(evaluate(*loaded.vectors,
                               SimilarityDataset::load(path, path.stem().string())));
  }
  const auto json = reports_to_json(reports);
  if (!a.report.empty()) write_text(a.report, json + "\n");
  out << (a.json ? json + "\n" : reports_to_table(loaded.name, reports));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// inspect

struct InspectArgs {
  std::string model;
  std::string sentence;
  std::string mask;
  double frequent_fraction = 0.001;
  bool json = false;
};

void add_inspect(CLI::App& app, InspectArgs& a) {
  auto* cmd = app.add_subcommand("inspect", "Attention of a masked word over its sentence");
  cmd->add_option("--model", a.model, "AWE or AWE-S checkpoint")->required();
  cmd->add_option("--sentence", a.sentence, "Sentence text")->required();
  cmd->add_option("--mask", a.mask, "Word to mask (first occurrence)")->required();
  cmd->add_option("--frequent-fraction", a.frequent_fraction,
                  "Top share of the vocabulary flagged as frequent")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_flag("--json", a.json, "Print JSON instead of a table");
}

int do_inspect(const InspectArgs& a, std::ostream& out) {
  Tokenizer tokenizer;
  const auto sentence = tokenizer.tokenize(a.sentence);
  std::string mask;
  if (!tokenizer.normalize(a.mask, mask)) throw UsageError("--mask is empty after normalization");
  const auto it = std::find(sentence.begin(), sentence.end(), mask);
  if (it == sentence.end()) {
    throw UsageError("masked word '" + mask + "' does not occur in the sentence");
  }
  const auto ck = load_checkpoint<Real>(a.model);
  const auto table = attention_table<Real>(
      sentence, static_cast<std::size_t>(it - sentence.begin()), ck.state.params, ck.vocab,
      ck.subword_map(), a.frequent_fraction);
  out << (a.json ? to_json(table) + "\n" : to_text(table));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// nn

struct NeighborArgs {
  VectorSource source;
  std::string word;
  std::size_t k = 10;
};

void add_nn(CLI::App& app, NeighborArgs& a) {
  auto* cmd = app.add_subcommand("nn", "Nearest neighbors by cosine similarity");
  add_vector_source(cmd, a.source);
  cmd->add_option("--word", a.word, "Query word")->required();
  cmd->add_option("-k,--k", a.k, "Number of neighbors")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

int do_nn(const NeighborArgs& a, std::ostream& out) {
  const auto loaded = load_vectors(a.source);
  std::string word;
  Tokenizer tokenizer;
  if (!tokenizer.normalize(a.word, word)) throw UsageError("--word is empty after normalization");
  for (const auto& n : nearest_neighbors(word, *loaded.vectors, a.k)) {
    out << n.word << '\t' << n.cosine << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// export

struct ExportArgs {
  std::string model;
  std::string out;
  bool binary = false;
};

void add_export(CLI::App& app, ExportArgs& a) {
  auto* cmd = app.add_subcommand("export", "Write word vectors in word2vec format");
  cmd->add_option("--model", a.model, "Checkpoint written by train")->required();
  cmd->add_option("--out", a.out, "Output file")->required();
  cmd->add_flag("--binary", a.binary, "Binary word2vec format instead of text");
}

int do_export(const ExportArgs& a) {
  const auto ck = load_checkpoint<Real>(a.model);
  ensure_parent(a.out);
  if (a.binary) {
    export_embeddings_binary(ck.state.params, ck.vocab, ck.subword_map(), a.out);
  } else {
    export_embeddings(ck.state.params, ck.vocab, ck.subword_map(), a.out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fetch-data

struct FetchArgs {
  std::string dest = default_data_dir().string();
  std::string base_url{kDefaultDatasetBase};
  bool force = false;
};

void add_fetch(CLI::App& app, FetchArgs& a) {
  auto* cmd = app.add_subcommand(
      "fetch-data", "Download and checksum the eight word-similarity datasets");
  cmd->add_option("--dest", a.dest, "Destination directory (env AWE_DATA_DIR)")
      ->capture_default_str();
  cmd->add_option("--base-url", a.base_url, "Mirror to download from")
      ->capture_default_str();
  cmd->add_flag("--force", a.force, "Download again even if files exist");
}

int do_fetch(const FetchArgs& a, std::ostream& out) {
  FetchOptions options;
  options.base_url = a.base_url;
  options.force = a.force;
  options.log = &out;
  fetch_datasets(a.dest, similarity_datasets(), options);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attention word embeddings: train, evaluate and inspect", "awe"};
  app.require_subcommand(1);
  app.fallthrough(false);

  TrainArgs train_args;
  EvalArgs eval_args;
  InspectArgs inspect_args;
  NeighborArgs nn_args;
  ExportArgs export_args;
  FetchArgs fetch_args;
  add_train(app, train_args);
  add_eval(app, eval_args);
  add_inspect(app, inspect_args);
  add_nn(app, nn_args);
  add_export(app, export_args);
  add_fetch(app, fetch_args);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const auto* cmd = app.get_subcommands().front();
  const std::string name = cmd->get_name();
  try {
    if (name == "train") return do_train(train_args, err);
    if (name == "eval") return do_eval(eval_args, out);
    if (name == "inspect") return do_inspect(inspect_args, out);
    if (name == "nn") return do_nn(nn_args, out);
    if (name == "export") return do_export(export_args);
    if (name == "fetch-data") return do_fetch(fetch_args, out);
  } catch (const UsageError& e) {
    err << "awe " << name << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "awe " << name << ": error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace awe::cli
