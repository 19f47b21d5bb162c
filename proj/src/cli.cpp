#include "longdoc/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "longdoc/bench.hpp"
#include "longdoc/common.hpp"
#include "longdoc/encoder.hpp"
#include "longdoc/heads.hpp"
#include "longdoc/metrics.hpp"
#include "longdoc/retrieval.hpp"
#include "longdoc/tokenize.hpp"
#include "longdoc/window.hpp"

namespace fs = std::filesystem;

namespace longdoc {

namespace {

template <typename F>
auto stage(const char* name, F&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

EncoderConfig make_encoder_config(const RunConfig& cfg,
                                  const std::string& kind_name,
                                  std::size_t vocab_size) {
  EncoderConfig ecfg;
  if (!cfg.encoder_config_path.empty()) {
    ecfg = load_encoder_config(cfg.encoder_config_path);
  } else {
    ecfg.kind = encoder_kind_from_string(kind_name);
    ecfg.model_dim = cfg.model_dim;
    ecfg.n_layers = cfg.n_layers;
    ecfg.n_heads = cfg.n_heads;
    ecfg.state_dim = cfg.state_dim;
    ecfg.chunk_len = cfg.chunk_len;
    ecfg.max_context = cfg.max_context;
  }
  ecfg.seed = derive_seed(cfg.seed, "encoder");
  ecfg.vocab_size = vocab_size;
  ecfg.validate();
  return ecfg;
}

// Loads the corpus from disk, or generates the synthetic one into the output
// directory first so the run is reproducible from its artifacts.
std::vector<Document> obtain_corpus(const RunConfig& cfg,
                                    std::string& corpus_path_out) {
  if (cfg.synthetic_docs > 0) {
    SyntheticSpec spec;
    spec.n_docs = cfg.synthetic_docs;
    spec.min_len = cfg.synthetic_min_len;
    spec.max_len = cfg.synthetic_max_len;
    spec.n_labels = cfg.synthetic_labels;
    spec.task = cfg.task;
    spec.seed = derive_seed(cfg.seed, "synthetic");
    auto docs = generate_synthetic_corpus(spec);
    corpus_path_out = (fs::path(cfg.out_dir) / "corpus.jsonl").string();
    save_corpus(docs, corpus_path_out);
    return load_corpus(corpus_path_out, cfg.task);
  }
  corpus_path_out = cfg.corpus_path;
  return load_corpus(cfg.corpus_path, cfg.task);
}

std::vector<std::uint8_t> multi_hot(const Document& doc,
                                    const LabelVocab& labels) {
  std::vector<std::uint8_t> gold(labels.size(), 0);
  for (const auto& l : doc.labels)
    gold[static_cast<std::size_t>(labels.id(l))] = 1;
  return gold;
}

RunManifest base_manifest(const RunConfig& cfg, const std::string& corpus_path,
                          const EncoderConfig& ecfg) {
  RunManifest m;
  m.set("version", std::string(kVersion));
  m.set("command", cfg.command);
  m.set("task", std::string(to_string(cfg.task)));
  // Synthetic corpora are defined by their generation parameters; the file
  // they were written to is run-local.
  m.set("corpus", cfg.synthetic_docs > 0 ? "(synthetic)" : corpus_path);
  m.set("corpus_hash", file_hash(corpus_path));
  m.set("synthetic_docs", static_cast<std::uint64_t>(cfg.synthetic_docs));
  m.set("synthetic_labels", static_cast<std::uint64_t>(cfg.synthetic_labels));
  m.set("synthetic_min_len", static_cast<std::uint64_t>(cfg.synthetic_min_len));
  m.set("synthetic_max_len", static_cast<std::uint64_t>(cfg.synthetic_max_len));
  m.set("vocab_size", static_cast<std::uint64_t>(cfg.vocab_size));
  m.set("window_len", static_cast<std::uint64_t>(cfg.window_len));
  m.set("overlap", cfg.overlap);
  // Effective encoder parameters, after any --encoder-config file.
  m.set("encoder", std::string(to_string(ecfg.kind)));
  m.set("model_dim", static_cast<std::uint64_t>(ecfg.model_dim));
  m.set("n_layers", static_cast<std::uint64_t>(ecfg.n_layers));
  m.set("n_heads", static_cast<std::uint64_t>(ecfg.n_heads));
  m.set("state_dim", static_cast<std::uint64_t>(ecfg.state_dim));
  m.set("chunk_len", static_cast<std::uint64_t>(ecfg.chunk_len));
  m.set("max_context", static_cast<std::uint64_t>(ecfg.max_context));
  m.set("threshold", cfg.threshold);
  m.set("lr", cfg.lr);
  m.set("epochs", static_cast<std::uint64_t>(cfg.epochs));
  m.set("batch", static_cast<std::uint64_t>(cfg.batch));
  m.set("l2", cfg.l2);
  std::string ks;
  for (std::size_t k : cfg.ks) ks += (ks.empty() ? "" : " ") + std::to_string(k);
  m.set("ks", ks);
  m.set("seed", cfg.seed);
  return m;
}

WindowingConfig make_windowing(const RunConfig& cfg) {
  WindowingConfig w;
  w.window_len = cfg.window_len;
  w.overlap = cfg.overlap;
  w.validate();
  return w;
}

const std::string& primary_encoder(const RunConfig& cfg) {
  static const std::string kDefault = "attention";
  return cfg.encoders.empty() ? kDefault : cfg.encoders.front();
}

std::optional<std::size_t> context_cap_of(const EncoderConfig& ecfg) {
  if (ecfg.kind == EncoderKind::attention)
    return static_cast<std::size_t>(ecfg.max_context);
  return std::nullopt;
}

}  // namespace

void RunConfig::validate() const {
  if (out_dir.empty())
    throw std::runtime_error(
        "no output directory: pass --out or set LONGDOC_BENCH_OUT");
  if (command == "classify" || command == "retrieve") {
    if (synthetic_docs == 0 && corpus_path.empty())
      throw std::runtime_error("pass --corpus FILE or --synthetic-docs N");
    if (command == "classify" && task == TaskKind::retrieval)
      throw std::runtime_error("classify requires a classification task");
    if (command == "retrieve" && task != TaskKind::retrieval)
      throw std::runtime_error("retrieve requires --task retrieval");
  }
  if (synthetic_docs > 0 && synthetic_min_len > synthetic_max_len)
    throw std::runtime_error("synthetic length range is inverted");
  if (vocab_size < 5) throw std::runtime_error("vocab size must be >= 5");
  if (threshold < 0.0 || threshold > 1.0)
    throw std::runtime_error("threshold must be in [0, 1]");
  for (std::size_t k : ks)
    if (k < 1) throw std::runtime_error("metric cutoffs must be >= 1");
  if (threads < 1) throw std::runtime_error("--threads must be >= 1");
}

void cmd_classify(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);

  std::string corpus_path;
  auto docs = stage("corpus", [&] {
    auto loaded = obtain_corpus(cfg, corpus_path);
    SplitSpec split;
    split.seed = derive_seed(cfg.seed, "split");
    split_corpus(loaded, split);
    return loaded;
  });
  const LabelVocab labels = LabelVocab::build(docs);
  if (labels.size() < 2)
    throw StageError("corpus", "classification needs at least 2 labels");

  std::vector<const Document*> train_docs, test_docs;
  for (const auto& doc : docs) {
    if (doc.split == Split::train) train_docs.push_back(&doc);
    if (doc.split == Split::test) test_docs.push_back(&doc);
  }
  if (train_docs.empty() || test_docs.empty())
    throw StageError("corpus", "empty train or test split");

  const Vocab vocab = stage("tokenize", [&] {
    std::vector<Document> train_copy;
    train_copy.reserve(train_docs.size());
    for (const auto* doc : train_docs) train_copy.push_back(*doc);
    return build_vocab(train_copy, cfg.vocab_size);
  });

  const WindowingConfig windowing = make_windowing(cfg);
  const EncoderConfig ecfg =
      make_encoder_config(cfg, primary_encoder(cfg), vocab.size());
  const EncoderWeights weights = init_weights(ecfg);

  // Per-document window embeddings, in corpus order.
  std::vector<std::vector<std::vector<double>>> window_embeddings(docs.size());
  stage("encode", [&] {
    parallel_for(docs.size(), cfg.threads, [&](std::size_t i) {
      auto tokens = tokenize(docs[i].text, vocab, docs[i].id);
      auto windows = make_windows(tokens, windowing);
      auto& slots = window_embeddings[i];
      slots.reserve(windows.count());
      for (std::size_t w = 0; w < windows.count(); ++w)
        slots.push_back(
            encode(windows.padded_ids[w], windows.masks[w], ecfg, weights)
                .pooled);
    });
    return 0;
  });

  const ProbeWeights probe = stage("probe", [&] {
    std::vector<TrainExample> examples;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (docs[i].split != Split::train) continue;
      auto gold = multi_hot(docs[i], labels);
      for (const auto& emb : window_embeddings[i])
        examples.push_back({emb, gold});
    }
    ProbeHyper hyper;
    hyper.lr = cfg.lr;
    hyper.epochs = cfg.epochs;
    hyper.batch = cfg.batch;
    hyper.l2 = cfg.l2;
    hyper.seed = derive_seed(cfg.seed, "probe");
    return train_probe(examples, cfg.task, labels.size(), hyper).weights;
  });

  std::vector<DocPrediction> preds;
  std::unordered_map<std::string, std::vector<std::uint8_t>> gold;
  stage("predict", [&] {
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (docs[i].split != Split::test) continue;
      std::vector<std::vector<double>> scores;
      scores.reserve(window_embeddings[i].size());
      for (const auto& emb : window_embeddings[i])
        scores.push_back(window_predict(emb, probe));
      preds.push_back(cfg.task == TaskKind::multilabel
                          ? aggregate_multilabel(docs[i].id, scores,
                                                 cfg.threshold)
                          : aggregate_singlelabel(docs[i].id, scores));
      gold.emplace(docs[i].id, multi_hot(docs[i], labels));
    }
    return 0;
  });

  const MetricReport report = stage("metrics", [&] {
    return eval_classification(preds, gold, cfg.task);
  });

  stage("output", [&] {
    vocab.save((fs::path(cfg.out_dir) / "vocab.txt").string());

    std::ofstream metrics(fs::path(cfg.out_dir) / "metrics.csv");
    metrics << "task,n_docs,micro_f1,macro_f1,accuracy,auc\n";
    metrics << to_string(cfg.task) << "," << report.n_evaluated << ","
            << fmt_double(report.micro_f1) << "," << fmt_double(report.macro_f1)
            << "," << fmt_double(report.accuracy) << ","
            << fmt_double(report.auc) << "\n";

    std::ofstream pred_out(fs::path(cfg.out_dir) / "predictions.jsonl");
    for (const auto& pred : preds) {
      nlohmann::ordered_json rec;
      rec["id"] = pred.doc_id;
      rec["probs"] = pred.probs;
      std::vector<std::string> names;
      for (int l : pred.predicted)
        names.push_back(labels.labels[static_cast<std::size_t>(l)]);
      rec["predicted"] = names;
      pred_out << rec.dump() << "\n";
    }

    TableRow row{to_string(ecfg.kind), report, std::nullopt,
                 context_cap_of(ecfg)};
    auto table = emit_table({row});
    std::ofstream(fs::path(cfg.out_dir) / "table.csv") << table.csv;
    std::ofstream(fs::path(cfg.out_dir) / "table.txt") << table.text;

    RunManifest manifest = base_manifest(cfg, corpus_path, ecfg);
    manifest.set("vocab_hash", vocab.content_hash());
    manifest.set("metrics_hash",
                 file_hash((fs::path(cfg.out_dir) / "metrics.csv").string()));
    manifest.write((fs::path(cfg.out_dir) / "manifest.txt").string());
    return 0;
  });
}

void cmd_retrieve(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);

  std::string corpus_path;
  auto docs =
      stage("corpus", [&] { return obtain_corpus(cfg, corpus_path); });

  const Vocab vocab =
      stage("tokenize", [&] { return build_vocab(docs, cfg.vocab_size); });
  const WindowingConfig windowing = make_windowing(cfg);
  const EncoderConfig ecfg =
      make_encoder_config(cfg, primary_encoder(cfg), vocab.size());
  const EncoderWeights weights = init_weights(ecfg);

  DocEmbeddingStore store;
  stage("encode", [&] {
    std::vector<std::vector<double>> embeddings(docs.size());
    parallel_for(docs.size(), cfg.threads, [&](std::size_t i) {
      auto tokens = tokenize(docs[i].text, vocab, docs[i].id);
      embeddings[i] = embed_document(tokens, windowing, ecfg, weights);
    });
    store.fingerprint = ecfg.fingerprint();
    for (std::size_t i = 0; i < docs.size(); ++i)
      store.add(docs[i].id, embeddings[i]);
    return 0;
  });

  std::vector<RankedList> lists;
  RelevanceJudgments judgments;
  stage("rank", [&] {
    for (const auto& doc : docs) {
      if (doc.relevant_ids.empty()) continue;
      judgments.relevant[doc.id] = {doc.relevant_ids.begin(),
                                    doc.relevant_ids.end()};
      std::vector<std::string> pool;
      pool.reserve(docs.size() - 1);
      for (const auto& other : docs)
        if (other.id != doc.id) pool.push_back(other.id);
      lists.push_back(rank_candidates(doc.id, store, pool));
    }
    if (lists.empty())
      throw std::runtime_error("corpus has no queries (no relevant_ids)");
    return 0;
  });

  const MetricReport report = stage("metrics", [&] {
    return eval_retrieval(lists, judgments, cfg.ks);
  });

  stage("output", [&] {
    store.save((fs::path(cfg.out_dir) / "embeddings.bin").string());

    std::ofstream metrics(fs::path(cfg.out_dir) / "metrics.csv");
    metrics << "task,n_queries,map,mrr";
    for (const auto& [k, _] : report.recall_at) metrics << ",r@" << k;
    for (const auto& [k, _] : report.ndcg_at) metrics << ",ndcg@" << k;
    metrics << "\n";
    metrics << to_string(cfg.task) << "," << report.n_evaluated << ","
            << fmt_double(report.map) << "," << fmt_double(report.mrr);
    for (const auto& [_, v] : report.recall_at) metrics << "," << fmt_double(v);
    for (const auto& [_, v] : report.ndcg_at) metrics << "," << fmt_double(v);
    metrics << "\n";

    std::ofstream ranks(fs::path(cfg.out_dir) / "rankings.csv");
    ranks << "query_id,rank,candidate_id,score\n";
    for (const auto& list : lists)
      for (std::size_t r = 0; r < list.entries.size(); ++r)
        ranks << list.query_id << "," << (r + 1) << "," << list.entries[r].id
              << "," << fmt_double(list.entries[r].score) << "\n";

    TableRow row{to_string(ecfg.kind), report, std::nullopt,
                 context_cap_of(ecfg)};
    auto table = emit_table({row});
    std::ofstream(fs::path(cfg.out_dir) / "table.csv") << table.csv;
    std::ofstream(fs::path(cfg.out_dir) / "table.txt") << table.text;

    RunManifest manifest = base_manifest(cfg, corpus_path, ecfg);
    manifest.set("vocab_hash", vocab.content_hash());
    manifest.set("store_fingerprint", store.fingerprint);
    manifest.set("metrics_hash",
                 file_hash((fs::path(cfg.out_dir) / "metrics.csv").string()));
    manifest.write((fs::path(cfg.out_dir) / "manifest.txt").string());
    return 0;
  });
}

void cmd_bench(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  if (cfg.lengths.empty())
    throw StageError("bench", "no sequence lengths given");

  std::vector<std::string> encoders = cfg.encoders;
  if (encoders.empty()) encoders = {"attention", "scan"};
  if (!cfg.encoder_config_path.empty()) encoders.resize(1);  // file wins

  struct BenchRow {
    std::string encoder;
    ThroughputReport tp;
    double beta;
    bool has_beta;
  };
  std::vector<BenchRow> rows;
  std::vector<std::string> capacity_lines;

  stage("bench", [&] {
    for (const auto& requested : encoders) {
      EncoderConfig ecfg = make_encoder_config(cfg, requested, cfg.vocab_size);
      const std::string name = to_string(ecfg.kind);
      EncoderWeights weights = init_weights(ecfg);
      std::vector<double> medians;
      std::vector<ThroughputReport> reports;
      for (std::size_t t : cfg.lengths) {
        auto tp = measure_throughput(ecfg, weights, t, cfg.reps, cfg.warmup,
                                     cfg.overlap);
        medians.push_back(tp.median_seconds);
        reports.push_back(std::move(tp));
      }
      const bool fit_ok =
          cfg.lengths.size() >= 4 &&
          cfg.lengths.back() >= 8 * cfg.lengths.front() &&
          std::is_sorted(cfg.lengths.begin(), cfg.lengths.end(),
                         std::less_equal<std::size_t>());
      double beta = 0.0;
      if (fit_ok) beta = fit_power_law(cfg.lengths, medians);
      for (auto& tp : reports) rows.push_back({name, std::move(tp), beta, fit_ok});

      if (cfg.capacity_budget_mb > 0) {
        auto cap = compare_context_capacity(
            ecfg, cfg.capacity_budget_mb * (1ULL << 20), false);
        capacity_lines.push_back(name + ": max " +
                                 std::to_string(cap.max_tokens) + " tokens" +
                                 (cap.hard_cap ? " (context cap)" : ""));
      }
    }
    return 0;
  });

  stage("output", [&] {
    std::ofstream csv(fs::path(cfg.out_dir) / "bench.csv");
    csv << "encoder,T,reps,median_s,tok_per_s,beta\n";
    for (const auto& row : rows) {
      csv << row.encoder << "," << row.tp.seq_len << "," << row.tp.reps << ","
          << fmt_double(row.tp.median_seconds) << ","
          << fmt_double(row.tp.tokens_per_sec) << ",";
      if (row.has_beta) csv << fmt_double(row.beta);
      csv << "\n";
    }

    std::ostringstream text;
    text << "# forward-pass inference timings, single-threaded\n";
    text << "encoder       T        windows  median_s     tok/s      beta\n";
    for (const auto& row : rows) {
      char line[160];
      std::snprintf(line, sizeof line, "%-12s  %-7zu  %-7zu  %-11.6f  %-9s  %s\n",
                    row.encoder.c_str(), row.tp.seq_len, row.tp.window_count,
                    row.tp.median_seconds,
                    format_tokens_per_sec(row.tp.tokens_per_sec).c_str(),
                    row.has_beta ? fmt_double(row.beta).c_str() : "-");
      text << line;
    }
    for (const auto& line : capacity_lines) text << line << "\n";
    std::ofstream(fs::path(cfg.out_dir) / "bench.txt") << text.str();
    std::cout << text.str();
    return 0;
  });
}

void cmd_report(const RunConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  if (cfg.run_dirs.empty())
    throw StageError("report", "no run directories given (--runs)");

  std::vector<TableRow> rows;
  stage("report", [&] {
    for (const auto& dir : cfg.run_dirs) {
      RunManifest manifest =
          RunManifest::load((fs::path(dir) / "manifest.txt").string());
      if (!cfg.verify_corpus_path.empty())
        manifest.verify_corpus(cfg.verify_corpus_path);

      std::ifstream metrics(fs::path(dir) / "metrics.csv");
      if (!metrics)
        throw std::runtime_error("missing metrics.csv under " + dir);
      std::string header, data;
      std::getline(metrics, header);
      std::getline(metrics, data);
      auto split_csv = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
      };
      auto names = split_csv(header);
      auto values = split_csv(data);
      if (names.size() != values.size())
        throw std::runtime_error("malformed metrics.csv under " + dir);

      MetricReport report;
      report.task = task_from_string(values[0]);
      for (std::size_t i = 1; i < names.size(); ++i) {
        const std::string& key = names[i];
        const double v = std::stod(values[i]);
        if (key == "n_docs" || key == "n_queries")
          report.n_evaluated = static_cast<std::size_t>(v);
        else if (key == "micro_f1") report.micro_f1 = v;
        else if (key == "macro_f1") report.macro_f1 = v;
        else if (key == "accuracy") report.accuracy = v;
        else if (key == "auc") { report.auc = v; report.has_auc = true; }
        else if (key == "map") report.map = v;
        else if (key == "mrr") report.mrr = v;
        else if (key.rfind("r@", 0) == 0)
          report.recall_at.emplace_back(std::stoul(key.substr(2)), v);
        else if (key.rfind("ndcg@", 0) == 0)
          report.ndcg_at.emplace_back(std::stoul(key.substr(5)), v);
        else
          throw std::runtime_error("unknown metrics.csv column: " + key);
      }

      TableRow row;
      row.model = manifest.get("encoder");
      row.metrics = report;
      if (row.model == "attention")
        row.context_cap = std::stoul(manifest.get("max_context"));
      rows.push_back(std::move(row));
    }
    return 0;
  });

  stage("output", [&] {
    auto table = emit_table(rows);
    std::ofstream(fs::path(cfg.out_dir) / "table.csv") << table.csv;
    std::ofstream(fs::path(cfg.out_dir) / "table.txt") << table.text;
    std::cout << table.text;
    return 0;
  });
}

RunConfig config_from_manifest(const RunManifest& manifest,
                               const std::string& out_dir) {
  RunConfig cfg;
  cfg.command = manifest.get("command");
  cfg.task = task_from_string(manifest.get("task"));
  cfg.synthetic_docs = std::stoull(manifest.get("synthetic_docs"));
  cfg.synthetic_labels = std::stoull(manifest.get("synthetic_labels"));
  cfg.synthetic_min_len = std::stoull(manifest.get("synthetic_min_len"));
  cfg.synthetic_max_len = std::stoull(manifest.get("synthetic_max_len"));
  if (cfg.synthetic_docs == 0) cfg.corpus_path = manifest.get("corpus");
  cfg.vocab_size = std::stoull(manifest.get("vocab_size"));
  cfg.window_len = std::stoull(manifest.get("window_len"));
  cfg.overlap = std::stod(manifest.get("overlap"));
  cfg.encoders = {manifest.get("encoder")};
  cfg.model_dim = std::stoi(manifest.get("model_dim"));
  cfg.n_layers = std::stoi(manifest.get("n_layers"));
  cfg.n_heads = std::stoi(manifest.get("n_heads"));
  cfg.state_dim = std::stoi(manifest.get("state_dim"));
  cfg.chunk_len = std::stoi(manifest.get("chunk_len"));
  cfg.max_context = std::stoull(manifest.get("max_context"));
  cfg.threshold = std::stod(manifest.get("threshold"));
  cfg.lr = std::stod(manifest.get("lr"));
  cfg.epochs = std::stoi(manifest.get("epochs"));
  cfg.batch = std::stoull(manifest.get("batch"));
  cfg.l2 = std::stod(manifest.get("l2"));
  cfg.ks.clear();
  {
    std::stringstream ss(manifest.get("ks"));
    std::size_t k;
    while (ss >> k) cfg.ks.push_back(k);
  }
  cfg.seed = std::stoull(manifest.get("seed"));
  cfg.out_dir = out_dir;
  return cfg;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Long-document classification / retrieval / scaling harness"};
  app.require_subcommand(1);

  RunConfig cfg;
  if (const char* env_out = std::getenv("LONGDOC_BENCH_OUT"))
    cfg.out_dir = env_out;

  std::string task_name = "multilabel";
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "global seed")->capture_default_str();
    sub->add_option("--threads", cfg.threads, "worker cap")->capture_default_str();
    sub->add_option("--out", cfg.out_dir,
                    "output directory (or LONGDOC_BENCH_OUT)");
  };
  auto add_encoder = [&](CLI::App* sub, bool multiple) {
    auto* opt = sub->add_option("--encoder", cfg.encoders,
                                "attention | scan | scan-chunked");
    if (!multiple) opt->expected(1);
    sub->add_option("--model-dim", cfg.model_dim)->capture_default_str();
    sub->add_option("--layers", cfg.n_layers)->capture_default_str();
    sub->add_option("--heads", cfg.n_heads)->capture_default_str();
    sub->add_option("--state-dim", cfg.state_dim)->capture_default_str();
    sub->add_option("--chunk", cfg.chunk_len)->capture_default_str();
    sub->add_option("--max-context", cfg.max_context)->capture_default_str();
    sub->add_option("--encoder-config", cfg.encoder_config_path,
                    "key-value encoder config file (overrides the flags)");
  };
  auto add_pipeline = [&](CLI::App* sub) {
    sub->add_option("--corpus", cfg.corpus_path, "JSONL corpus file");
    sub->add_option("--task", task_name, "multilabel | singlelabel | retrieval")
        ->capture_default_str();
    sub->add_option("--vocab-size", cfg.vocab_size)->capture_default_str();
    sub->add_option("--window-len", cfg.window_len,
                    "window length in tokens; 0 = whole document")
        ->capture_default_str();
    sub->add_option("--overlap", cfg.overlap, "window overlap fraction")
        ->capture_default_str();
    sub->add_option("--synthetic-docs", cfg.synthetic_docs,
                    "generate a synthetic corpus with this many documents");
    sub->add_option("--synthetic-labels", cfg.synthetic_labels)
        ->capture_default_str();
    sub->add_option("--synthetic-min-len", cfg.synthetic_min_len)
        ->capture_default_str();
    sub->add_option("--synthetic-max-len", cfg.synthetic_max_len)
        ->capture_default_str();
  };

  auto* classify = app.add_subcommand("classify", "train a probe and evaluate");
  add_pipeline(classify);
  add_encoder(classify, false);
  classify->add_option("--threshold", cfg.threshold, "multi-label threshold")
      ->capture_default_str();
  classify->add_option("--lr", cfg.lr)->capture_default_str();
  classify->add_option("--epochs", cfg.epochs)->capture_default_str();
  classify->add_option("--batch", cfg.batch)->capture_default_str();
  classify->add_option("--l2", cfg.l2)->capture_default_str();
  add_common(classify);

  auto* retrieve = app.add_subcommand("retrieve", "rank candidate documents");
  add_pipeline(retrieve);
  add_encoder(retrieve, false);
  retrieve->add_option("--k", cfg.ks, "metric cutoffs")->capture_default_str();
  add_common(retrieve);

  auto* bench = app.add_subcommand("bench", "throughput and scaling");
  add_encoder(bench, true);
  bench->add_option("--lengths", cfg.lengths, "sequence lengths")
      ->capture_default_str();
  bench->add_option("--reps", cfg.reps)->capture_default_str();
  bench->add_option("--warmup", cfg.warmup)->capture_default_str();
  bench->add_option("--overlap", cfg.overlap)->capture_default_str();
  bench->add_option("--vocab-size", cfg.vocab_size)->capture_default_str();
  bench->add_option("--capacity-budget-mb", cfg.capacity_budget_mb,
                    "also probe max context under this memory budget");
  add_common(bench);

  auto* report = app.add_subcommand("report", "combine runs into one table");
  report->add_option("--runs", cfg.run_dirs, "run output directories");
  report->add_option("--verify-corpus", cfg.verify_corpus_path,
                     "check manifests against this corpus file");
  add_common(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    cfg.task = task_from_string(task_name);
    if (classify->parsed()) {
      cfg.command = "classify";
      cmd_classify(cfg);
    } else if (retrieve->parsed()) {
      cfg.command = "retrieve";
      cmd_retrieve(cfg);
    } else if (bench->parsed()) {
      cfg.command = "bench";
      cmd_bench(cfg);
    } else if (report->parsed()) {
      cfg.command = "report";
      cmd_report(cfg);
    }
  } catch (const StageError& e) {
    std::cerr << "error in stage " << e.stage() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace longdoc
