#include "defsim/generation.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "defsim/error.hpp"
#include "http_post.hpp"

namespace defsim {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\f\v");
  return std::string(s.substr(first, last - first + 1));
}

// "1. x", "1) x", "(1) x", "- x", "* x", "• x"
const std::regex& list_item_pattern() {
  static const std::regex re(R"(^(?:\(?\d+[.)]|[-*]|\xE2\x80\xA2)\s+(.*)$)");
  return re;
}

std::string id_prefix_for(const Corpus& corpus, std::size_t n) {
  for (std::size_t round = 1;; ++round) {
    const std::string prefix = round == 1 ? "gen" : "gen" + std::to_string(round);
    bool clash = false;
    for (std::size_t i = 1; i <= n && !clash; ++i) {
      clash = corpus.contains(prefix + "-" + std::to_string(i));
    }
    if (!clash) return prefix;
  }
}

GenerationResult assemble(const Corpus& source, const std::vector<std::string>& texts,
                          const GenerationConfig& config, const PromptBundle& prompts,
                          const std::string& generator, const std::string& model_id) {
  const std::string prefix = id_prefix_for(source, texts.size());
  const std::string stamp = utc_timestamp();
  const std::string corpus_hash = source.text_hash();

  std::vector<Definition> defs;
  std::vector<ProvenanceRecord> provenance;
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    Definition def;
    def.id = prefix + "-" + std::to_string(i + 1);
    def.text = normalize_whitespace(texts[i]);
    def.kind = DefinitionKind::kComposite;
    def.source = generator + ":" + model_id;

    ProvenanceRecord rec;
    rec.id = def.id;
    rec.generator = generator;
    rec.prompt = i == 0 ? prompts.initial_prompt : prompts.continuation_prompt;
    rec.model_id = model_id;
    rec.temperature = config.temperature;
    rec.seed = generator == "mock" ? std::optional<std::uint64_t>(config.seed.value_or(0))
                                   : std::nullopt;
    rec.timestamp = stamp;
    rec.corpus_hash = corpus_hash;
    rec.word_count = word_count(def.text);
    rec.over_limit = rec.word_count > config.max_words_per_definition;
    if (rec.over_limit) {
      warnings.push_back(def.id + ": " + std::to_string(rec.word_count) +
                         " words exceeds the limit of " +
                         std::to_string(config.max_words_per_definition));
    }
    defs.push_back(std::move(def));
    provenance.push_back(std::move(rec));
  }
  return GenerationResult{Corpus("generated", std::move(defs), stamp), std::move(provenance),
                          std::move(warnings)};
}

}  // namespace

void GenerationConfig::validate() const {
  if (!std::isfinite(temperature) || temperature < 0.0 || temperature > 2.0) {
    throw Error(ErrorCode::kInvalidArgument, "temperature must lie in [0, 2]");
  }
  if (n_definitions == 0) throw Error(ErrorCode::kInvalidArgument, "n_definitions must be >= 1");
  if (max_words_per_definition == 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_words_per_definition must be >= 1");
  }
}

std::string default_initial_prompt(std::size_t max_words) {
  return "Produce one complete definition of a smart city using various definitions mentioned "
         "below. Only include technology-related characteristics mentioned in these "
         "definitions. Write in one paragraph, shorten as much as possible. Limit to " +
         std::to_string(max_words) + " words.";
}

std::string default_continuation_prompt(std::size_t n_more, std::size_t max_words) {
  return "Produce another " + std::to_string(n_more) + " different definitions, limit each to " +
         std::to_string(max_words) + " words.";
}

std::string build_context(const Corpus& corpus) {
  std::string out;
  std::size_t i = 0;
  for (const auto& def : corpus.definitions()) {
    out += std::to_string(++i) + ". " + def.text + "\n";
  }
  return out;
}

PromptBundle PromptBundle::defaults(const Corpus& corpus, const GenerationConfig& config) {
  const std::size_t more = config.n_definitions > 1 ? config.n_definitions - 1 : 0;
  return PromptBundle{default_initial_prompt(config.max_words_per_definition),
                      default_continuation_prompt(more, config.max_words_per_definition),
                      build_context(corpus)};
}

std::size_t word_count(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::size_t n = 0;
  for (std::string w; in >> w;) ++n;
  return n;
}

std::vector<std::string> split_definitions(std::string_view response) {
  std::vector<std::string> lines;
  {
    std::istringstream in{std::string(response)};
    for (std::string line; std::getline(in, line);) lines.push_back(trim(line));
  }

  std::vector<std::string> items;
  bool in_item = false;
  std::smatch m;
  for (const auto& line : lines) {
    if (std::regex_match(line, m, list_item_pattern())) {
      items.push_back(m[1].str());
      in_item = true;
    } else if (line.empty()) {
      in_item = false;
    } else if (in_item) {
      items.back() += " " + line;
    }
  }

  if (items.empty()) {
    std::string paragraph;
    for (const auto& line : lines) {
      if (line.empty()) {
        if (!paragraph.empty()) items.push_back(std::move(paragraph));
        paragraph.clear();
      } else {
        paragraph += (paragraph.empty() ? "" : " ") + line;
      }
    }
    if (!paragraph.empty()) items.push_back(std::move(paragraph));
  }

  std::vector<std::string> out;
  for (auto& item : items) {
    auto text = normalize_whitespace(item);
    if (!text.empty()) out.push_back(std::move(text));
  }
  return out;
}

std::string RemoteChatClient::complete(const std::vector<ChatMessage>& messages,
                                       const GenerationConfig& config) {
  const auto endpoint = detail::parse_endpoint(config.endpoint);
  nlohmann::json body;
  body["model_id"] = config.model_id;
  body["temperature"] = config.temperature;
  auto& msgs = body["messages"] = nlohmann::json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});

  auto res = detail::post_json(endpoint, "/chat", body.dump(),
                               detail::env_or_empty("GEN_API_TOKEN"), config.timeout);
  if (!res.transport_ok) {
    throw Error(ErrorCode::kProviderUnavailable, config.endpoint + "/chat: " + res.error);
  }
  if (res.status < 200 || res.status >= 300) {
    throw Error(ErrorCode::kProviderUnavailable,
                config.endpoint + "/chat: HTTP " + std::to_string(res.status));
  }
  try {
    const auto doc = nlohmann::json::parse(res.body);
    return doc.at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kProviderUnavailable, config.endpoint + "/chat: " + e.what());
  }
}

GenerationResult generate_composites(const Corpus& corpus, const GenerationConfig& config,
                                     const PromptBundle& prompts, ChatClient& client) {
  config.validate();
  std::vector<ChatMessage> messages;
  if (config.context_chunk_size == 0) {
    messages.push_back({"user", prompts.initial_prompt + "\n\n" + prompts.context});
  } else {
    std::istringstream in(prompts.context);
    std::string chunk;
    std::size_t in_chunk = 0;
    for (std::string line; std::getline(in, line);) {
      chunk += line + "\n";
      if (++in_chunk == config.context_chunk_size) {
        messages.push_back({"user", chunk});
        chunk.clear();
        in_chunk = 0;
      }
    }
    if (!chunk.empty()) messages.push_back({"user", chunk});
    messages.push_back({"user", prompts.initial_prompt});
  }

  const std::string first_reply = client.complete(messages, config);
  auto first = split_definitions(first_reply);
  if (first.size() != 1) {
    throw Error(ErrorCode::kMalformedResponse, "initial reply held " +
                                                   std::to_string(first.size()) +
                                                   " definitions, expected 1");
  }
  std::vector<std::string> texts{std::move(first.front())};

  if (config.n_definitions > 1) {
    messages.push_back({"assistant", first_reply});
    messages.push_back({"user", prompts.continuation_prompt});
    auto rest = split_definitions(client.complete(messages, config));
    if (rest.size() != config.n_definitions - 1) {
      throw Error(ErrorCode::kMalformedResponse,
                  "continuation reply held " + std::to_string(rest.size()) +
                      " definitions, expected " + std::to_string(config.n_definitions - 1));
    }
    for (auto& t : rest) texts.push_back(std::move(t));
  }
  return assemble(corpus, texts, config, prompts, "remote", config.model_id);
}

GenerationResult generate_composites_mock(const Corpus& corpus, const GenerationConfig& config,
                                          const PromptBundle& prompts) {
  config.validate();
  const auto texts = mock_generate(corpus, config.seed.value_or(0), config.n_definitions);
  return assemble(corpus, texts, config, prompts, "mock", "mock");
}

void write_provenance(std::ostream& out, std::span<const ProvenanceRecord> records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["generator"] = r.generator;
    j["prompt"] = r.prompt;
    j["model_id"] = r.model_id;
    j["temperature"] = r.temperature;
    j["seed"] = r.seed ? nlohmann::ordered_json(*r.seed) : nlohmann::ordered_json(nullptr);
    j["timestamp"] = r.timestamp;
    j["corpus_hash"] = r.corpus_hash;
    j["word_count"] = r.word_count;
    j["over_limit"] = r.over_limit;
    out << j.dump() << '\n';
  }
}

std::vector<ProvenanceRecord> read_provenance(std::istream& in) {
  std::vector<ProvenanceRecord> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ProvenanceRecord r;
      r.id = j.at("id").get<std::string>();
      r.generator = j.at("generator").get<std::string>();
      r.prompt = j.at("prompt").get<std::string>();
      r.model_id = j.at("model_id").get<std::string>();
      r.temperature = j.at("temperature").get<double>();
      if (!j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
      r.timestamp = j.at("timestamp").get<std::string>();
      r.corpus_hash = j.at("corpus_hash").get<std::string>();
      r.word_count = j.at("word_count").get<std::size_t>();
      r.over_limit = j.at("over_limit").get<bool>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  "provenance line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace defsim
