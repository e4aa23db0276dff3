#include "defsim/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "defsim/consensus.hpp"
#include "defsim/corpus.hpp"
#include "defsim/embedding.hpp"
#include "defsim/error.hpp"
#include "defsim/generation.hpp"
#include "defsim/hashing.hpp"
#include "defsim/manifest.hpp"
#include "defsim/report.hpp"
#include "defsim/similarity.hpp"

#ifndef DEFSIM_DEFAULT_DATA_DIR
#define DEFSIM_DEFAULT_DATA_DIR "data"
#endif

namespace defsim {
namespace {

namespace fs = std::filesystem;

struct ProviderArgs {
  std::string provider;
  std::string embeddings;
  std::string endpoint;
  std::string model_id;
  std::size_t dim = kDefaultLocalDim;
  std::size_t batch_size = 32;
  std::size_t max_retries = 3;
  long timeout_ms = 30'000;
  std::size_t max_in_flight = 4;
  std::string cache;
};

struct OutputArgs {
  std::string root = "runs";
  std::string run_dir;
};

struct ExclusionArgs {
  bool include_self = false;
  bool no_default_aliases = false;
  std::vector<std::string> aliases;  // "a=b"
};

void add_provider_options(CLI::App* cmd, ProviderArgs& a) {
  cmd->add_option("--provider", a.provider, "Embedding provider")
      ->check(CLI::IsMember({"local", "file", "remote"}));
  cmd->add_option("--embeddings", a.embeddings, "Precomputed embedding file (implies --provider file)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--endpoint", a.endpoint, "Embedding service base URL (remote)");
  cmd->add_option("--model-id", a.model_id, "Model identifier");
  cmd->add_option("--dim", a.dim, "Local embedder dimension")->check(CLI::PositiveNumber);
  cmd->add_option("--batch-size", a.batch_size, "Texts per remote request")->check(CLI::PositiveNumber);
  cmd->add_option("--max-retries", a.max_retries, "Remote retries per batch");
  cmd->add_option("--timeout-ms", a.timeout_ms, "Remote request timeout")->check(CLI::PositiveNumber);
  cmd->add_option("--max-in-flight", a.max_in_flight, "Concurrent remote batches")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--cache", a.cache, "Embedding cache file (read if present, then rewritten)");
}

void add_output_options(CLI::App* cmd, OutputArgs& a) {
  cmd->add_option("--out", a.root, "Root directory for per-run output directories");
  cmd->add_option("--run-dir", a.run_dir, "Exact run directory (must be absent or empty)");
}

void add_exclusion_options(CLI::App* cmd, ExclusionArgs& a) {
  cmd->add_flag("--include-self", a.include_self, "Keep the candidate's own column in its average");
  cmd->add_flag("--no-default-aliases", a.no_default_aliases, "Drop the base-0.1=ind-58 alias");
  cmd->add_option("--alias", a.aliases, "Extra self alias, ID=ID (repeatable)");
}

ProviderConfig to_config(const ProviderArgs& a) {
  ProviderConfig c;
  if (!a.provider.empty()) {
    c.kind = parse_provider_kind(a.provider);
  } else if (!a.embeddings.empty()) {
    c.kind = ProviderKind::kFile;
  } else if (!a.endpoint.empty()) {
    c.kind = ProviderKind::kRemote;
  }
  c.path = a.embeddings;
  c.endpoint = a.endpoint;
  c.model_id = a.model_id;
  c.dim = a.dim;
  c.batch_size = a.batch_size;
  c.max_retries = a.max_retries;
  c.timeout = std::chrono::milliseconds(a.timeout_ms);
  c.max_in_flight = a.max_in_flight;
  c.validate();
  return c;
}

SelfExclusion to_exclusion(const ExclusionArgs& a) {
  SelfExclusion ex;
  ex.enabled = !a.include_self;
  if (a.no_default_aliases) ex.aliases = SelfAliases{};
  for (const auto& spec : a.aliases) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw Error(ErrorCode::kInvalidArgument, "alias '" + spec + "' is not ID=ID");
    }
    ex.aliases.add(spec.substr(0, eq), spec.substr(eq + 1));
  }
  return ex;
}

nlohmann::ordered_json provider_json(const ProviderConfig& c) {
  return {{"kind", to_string(c.kind)},
          {"endpoint", c.endpoint},
          {"path", c.path.string()},
          {"model_id", c.effective_model_id()},
          {"dim", c.dim},
          {"batch_size", c.batch_size},
          {"max_retries", c.max_retries},
          {"timeout_ms", c.timeout.count()},
          {"max_in_flight", c.max_in_flight}};
}

nlohmann::ordered_json exclusion_json(const SelfExclusion& ex) {
  auto aliases = nlohmann::ordered_json::array();
  for (const auto& [a, b] : ex.aliases.pairs()) aliases.push_back({a, b});
  return {{"exclude_self", ex.enabled}, {"aliases", aliases}};
}

// Cache file wrapper: loads on construction, saves on flush().
class CacheFile {
 public:
  explicit CacheFile(std::string path) : path_(std::move(path)) {
    if (path_.empty() || !fs::exists(path_)) return;
    std::ifstream in(path_, std::ios::binary);
    cache_ = EmbeddingCache::load(in);
  }
  EmbeddingCache* get() { return path_.empty() ? nullptr : &cache_; }
  void flush() const {
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::binary);
    cache_.save(out);
  }

 private:
  std::string path_;
  EmbeddingCache cache_;
};

class Run {
 public:
  Run(std::string command, const std::vector<std::string>& argv, const OutputArgs& out_args,
      const std::vector<std::string>& inputs)
      : dir_(out_args.root, out_args.run_dir, hash_of(command, argv, inputs)) {
    manifest_.command = std::move(command);
    manifest_.started = utc_timestamp();
    manifest_.config["argv"] = argv;
    for (const auto& in : inputs) manifest_.input_hashes[in] = file_content_hash(in);
  }

  nlohmann::ordered_json& config() { return manifest_.config; }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_.output(name), std::ios::binary);
    out << content;
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + name);
  }

  fs::path commit() { return dir_.commit(manifest_); }

 private:
  static std::string hash_of(const std::string& command, const std::vector<std::string>& argv,
                             const std::vector<std::string>& inputs) {
    std::uint64_t h = fnv1a64(command);
    for (const auto& a : argv) h = fnv1a64(a + '\0', h);
    for (const auto& in : inputs) h = fnv1a64(file_content_hash(in), h);
    return to_hex(h);
  }

  RunDirectory dir_;
  RunManifest manifest_;
};

std::string default_data_dir() {
  if (const char* env = std::getenv("DEFSIM_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return DEFSIM_DEFAULT_DATA_DIR;
}

Corpus load_all(const std::vector<std::string>& paths, const std::string& name) {
  std::vector<Corpus> corpora;
  for (const auto& p : paths) corpora.push_back(load_corpus(p));
  if (corpora.size() == 1) return corpora.front();
  return merge(corpora, name);
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Corpus-consensus analysis of definition texts by embedding cosine similarity",
               "defsim"};
  app.require_subcommand(1);

  // ingest-check
  std::vector<std::string> check_files;
  auto* ingest = app.add_subcommand("ingest-check", "Parse corpus files and report their contents");
  ingest->add_option("corpus", check_files, "Corpus JSON-lines files")
      ->required()
      ->check(CLI::ExistingFile);

  // embed
  std::vector<std::string> embed_files;
  ProviderArgs embed_provider;
  OutputArgs embed_out;
  auto* embed = app.add_subcommand("embed", "Embed corpora and write an embedding file");
  embed->add_option("--corpus", embed_files, "Corpus files (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  add_provider_options(embed, embed_provider);
  add_output_options(embed, embed_out);

  // analyze
  std::string an_candidates, an_references;
  ProviderArgs an_provider;
  OutputArgs an_out;
  ExclusionArgs an_excl;
  std::size_t an_threads = 0;
  auto* analyze = app.add_subcommand("analyze", "Rank candidates by average similarity to references");
  analyze->add_option("--candidates", an_candidates)->required()->check(CLI::ExistingFile);
  analyze->add_option("--references", an_references)->required()->check(CLI::ExistingFile);
  analyze->add_option("--threads", an_threads, "Matrix worker threads (0 = auto)");
  add_provider_options(analyze, an_provider);
  add_output_options(analyze, an_out);
  add_exclusion_options(analyze, an_excl);

  // compare
  std::vector<std::string> cmp_ids, cmp_corpora;
  ProviderArgs cmp_provider;
  OutputArgs cmp_out;
  auto* compare = app.add_subcommand("compare", "Pairwise similarity table over chosen ids");
  compare->add_option("--ids", cmp_ids, "Comma-separated definition ids (at least two)")
      ->required()
      ->delimiter(',');
  compare->add_option("--corpus", cmp_corpora, "Corpus files supplying texts (repeatable)")
      ->check(CLI::ExistingFile);
  add_provider_options(compare, cmp_provider);
  add_output_options(compare, cmp_out);

  // evaluate
  std::string ev_candidates, ev_references;
  std::vector<std::string> ev_anchors, ev_anchor_corpora;
  double ev_threshold = kDefaultAdmissionThreshold;
  ProviderArgs ev_provider;
  OutputArgs ev_out;
  ExclusionArgs ev_excl;
  auto* evaluate = app.add_subcommand("evaluate", "Score new definitions against a corpus");
  evaluate->add_option("--candidates", ev_candidates)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--references", ev_references)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--anchors", ev_anchors, "Comma-separated anchor ids")->delimiter(',');
  evaluate->add_option("--anchor-corpus", ev_anchor_corpora, "Extra corpora holding anchors")
      ->check(CLI::ExistingFile);
  evaluate->add_option("--threshold", ev_threshold, "Admission threshold on the corpus average");
  add_provider_options(evaluate, ev_provider);
  add_output_options(evaluate, ev_out);
  add_exclusion_options(evaluate, ev_excl);

  // generate
  std::string gen_corpus = (fs::path(default_data_dir()) / "individual-60.jsonl").string();
  GenerationConfig gen_config;
  bool gen_mock = false;
  std::uint64_t gen_seed = 0;
  std::string gen_initial, gen_continuation;
  OutputArgs gen_out;
  auto* generate = app.add_subcommand("generate", "Generate composite definitions");
  generate->add_option("--corpus", gen_corpus, "Source corpus")->check(CLI::ExistingFile);
  generate->add_flag("--mock", gen_mock, "Use the seeded offline generator");
  auto* seed_opt = generate->add_option("--seed", gen_seed, "Mock generator seed");
  generate->add_option("--endpoint", gen_config.endpoint, "Chat service base URL");
  generate->add_option("--model-id", gen_config.model_id, "Chat model identifier");
  generate->add_option("--temperature", gen_config.temperature)->check(CLI::Range(0.0, 2.0));
  generate->add_option("-n,--count", gen_config.n_definitions, "Definitions to generate")
      ->check(CLI::PositiveNumber);
  generate->add_option("--max-words", gen_config.max_words_per_definition)
      ->check(CLI::PositiveNumber);
  generate->add_option("--context-chunk", gen_config.context_chunk_size,
                       "Definitions per context message (0 = one message)");
  generate->add_option("--initial-prompt", gen_initial, "Override the first prompt");
  generate->add_option("--continuation-prompt", gen_continuation, "Override the follow-up prompt");
  add_output_options(generate, gen_out);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (compare->parsed() && cmp_ids.size() < 2) {
      throw CLI::ValidationError("--ids", "needs at least two ids");
    }
    if (generate->parsed() && !gen_mock && gen_config.endpoint.empty()) {
      throw CLI::ValidationError("generate", "needs --mock or --endpoint");
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (ingest->parsed()) {
      std::vector<Corpus> loaded;
      for (const auto& f : check_files) {
        loaded.push_back(load_corpus(f));
        const auto& c = loaded.back();
        std::map<std::string, std::size_t> kinds;
        for (const auto& d : c.definitions()) ++kinds[std::string(to_string(d.kind))];
        out << f << ": " << c.size() << " definitions";
        for (const auto& [k, n] : kinds) out << ", " << n << " " << k;
        out << ", text hash " << c.text_hash() << "\n";
      }
      const Corpus all = merge(loaded, "all");
      for (const auto& [a, b] : SelfAliases::defaults().pairs()) {
        const auto* da = all.find(a);
        const auto* db = all.find(b);
        if (da != nullptr && db != nullptr) {
          out << "alias " << a << " = " << b << ": "
              << (da->text == db->text ? "texts identical" : "texts differ") << "\n";
        }
      }
      return 0;
    }

    if (embed->parsed()) {
      const auto config = to_config(embed_provider);
      const Corpus corpus = load_all(embed_files, "embedded");
      CacheFile cache(embed_provider.cache);
      const auto set = embed_corpus(corpus, config, cache.get());
      cache.flush();
      Run run("embed", args, embed_out, embed_files);
      run.config()["provider"] = provider_json(config);
      std::ostringstream buf;
      save_embeddings(buf, set);
      run.write("embeddings.json", buf.str());
      const auto dir = run.commit();
      out << "embedded " << set.size() << " definitions (dim " << set.dim() << ", model "
          << set.model_id() << ") -> " << (dir / "embeddings.json").string() << "\n";
      return 0;
    }

    if (analyze->parsed()) {
      const auto config = to_config(an_provider);
      const auto exclusion = to_exclusion(an_excl);
      const Corpus candidates = load_corpus(an_candidates);
      const Corpus references = load_corpus(an_references);
      CacheFile cache(an_provider.cache);
      const auto cand_set = embed_corpus(candidates, config, cache.get());
      const auto ref_set = embed_corpus(references, config, cache.get());
      cache.flush();
      const auto m = similarity_matrix(cand_set, ref_set, MatrixOptions{an_threads});
      const auto report = rank(m, exclusion, references.name());

      std::vector<std::string> inputs{an_candidates, an_references};
      if (!an_provider.embeddings.empty()) inputs.push_back(an_provider.embeddings);
      Run run("analyze", args, an_out, inputs);
      run.config()["provider"] = provider_json(config);
      run.config()["exclusion"] = exclusion_json(exclusion);

      std::ostringstream csv, md;
      write_matrix_csv(csv, m);
      write_report_markdown(md, report);
      run.write("matrix.csv", csv.str());
      run.write("matrix.json", dump(matrix_to_json(m)));
      run.write("report.json", dump(report_to_json(report)));
      run.write("report.md", md.str());
      const auto dir = run.commit();
      out << md.str() << "\nrun directory: " << dir.string() << "\n";
      return 0;
    }

    if (compare->parsed()) {
      const auto config = to_config(cmp_provider);
      EmbeddingSet set("", 1);
      if (config.kind == ProviderKind::kFile && cmp_corpora.empty()) {
        set = load_embeddings(config.path).subset(cmp_ids);
      } else {
        if (cmp_corpora.empty()) {
          throw Error(ErrorCode::kInvalidArgument, "--corpus is required unless --embeddings is given");
        }
        const Corpus all = load_all(cmp_corpora, "compare");
        CacheFile cache(cmp_provider.cache);
        set = embed_corpus(subset(all, cmp_ids), config, cache.get());
        cache.flush();
      }
      const auto table = pairwise_table(cmp_ids, set);

      auto inputs = cmp_corpora;
      if (!cmp_provider.embeddings.empty()) inputs.push_back(cmp_provider.embeddings);
      Run run("compare", args, cmp_out, inputs);
      run.config()["provider"] = provider_json(config);
      run.config()["ids"] = cmp_ids;
      std::ostringstream csv, md;
      write_matrix_csv(csv, table);
      write_pairwise_markdown(md, table);
      run.write("pairwise.csv", csv.str());
      run.write("pairwise.json", dump(matrix_to_json(table)));
      run.write("pairwise.md", md.str());
      const auto dir = run.commit();
      out << md.str() << "\nrun directory: " << dir.string() << "\n";
      return 0;
    }

    if (evaluate->parsed()) {
      const auto config = to_config(ev_provider);
      const Corpus candidates = load_corpus(ev_candidates);
      const Corpus references = load_corpus(ev_references);
      std::optional<Corpus> pool;
      if (!ev_anchor_corpora.empty()) pool = load_all(ev_anchor_corpora, "anchors");

      EvaluationRequest request;
      request.corpus = &references;
      request.anchor_pool = pool ? &*pool : nullptr;
      request.anchors = ev_anchors;
      request.threshold = ev_threshold;
      request.exclusion = to_exclusion(ev_excl);

      CacheFile cache(ev_provider.cache);
      std::vector<EvaluationResult> results;
      for (const auto& def : candidates.definitions()) {
        results.push_back(evaluate_new(def, request, config, cache.get()));
      }
      cache.flush();

      auto inputs = concat({ev_candidates, ev_references}, ev_anchor_corpora);
      if (!ev_provider.embeddings.empty()) inputs.push_back(ev_provider.embeddings);
      Run run("evaluate", args, ev_out, inputs);
      run.config()["provider"] = provider_json(config);
      run.config()["exclusion"] = exclusion_json(request.exclusion);
      run.config()["threshold"] = ev_threshold;
      run.config()["anchors"] = ev_anchors;
      std::ostringstream md;
      write_evaluation_markdown(md, results);
      run.write("evaluation.json", dump(evaluation_to_json(results)));
      run.write("evaluation.md", md.str());
      const auto dir = run.commit();
      out << md.str() << "\nrun directory: " << dir.string() << "\n";
      return 0;
    }

    if (generate->parsed()) {
      if (seed_opt->count() > 0) gen_config.seed = gen_seed;
      gen_config.validate();
      const Corpus source = load_corpus(gen_corpus);
      auto prompts = PromptBundle::defaults(source, gen_config);
      if (!gen_initial.empty()) prompts.initial_prompt = gen_initial;
      if (!gen_continuation.empty()) prompts.continuation_prompt = gen_continuation;

      GenerationResult result = [&] {
        if (gen_mock) return generate_composites_mock(source, gen_config, prompts);
        RemoteChatClient client;
        return generate_composites(source, gen_config, prompts, client);
      }();
      for (const auto& w : result.warnings) err << "warning: " << w << "\n";

      Run run("generate", args, gen_out, {gen_corpus});
      run.config()["generation"] = {{"mock", gen_mock},
                                    {"endpoint", gen_config.endpoint},
                                    {"model_id", gen_config.model_id},
                                    {"temperature", gen_config.temperature},
                                    {"n_definitions", gen_config.n_definitions},
                                    {"max_words_per_definition", gen_config.max_words_per_definition},
                                    {"seed", gen_config.seed ? nlohmann::ordered_json(*gen_config.seed)
                                                             : nlohmann::ordered_json(nullptr)},
                                    {"context_chunk_size", gen_config.context_chunk_size},
                                    {"initial_prompt", prompts.initial_prompt},
                                    {"continuation_prompt", prompts.continuation_prompt}};
      run.write("generated.jsonl", serialize_corpus(result.corpus));
      std::ostringstream prov;
      write_provenance(prov, result.provenance);
      run.write("generated.provenance.jsonl", prov.str());
      const auto dir = run.commit();
      out << "generated " << result.corpus.size() << " definitions -> "
          << (dir / "generated.jsonl").string() << "\n";
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kInvalidArgument ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace defsim
