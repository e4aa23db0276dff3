#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "defsim/corpus.hpp"

namespace defsim {

struct GenerationConfig {
  std::string endpoint;
  std::string model_id = "gpt-4";
  double temperature = 0.7;
  std::size_t n_definitions = 20;
  std::size_t max_words_per_definition = 35;
  std::optional<std::uint64_t> seed;  // mock generator only
  // 0 sends the whole corpus in the first user message; otherwise the corpus
  // is sent in user messages of this many definitions ahead of the prompt.
  std::size_t context_chunk_size = 0;
  std::chrono::milliseconds timeout{120'000};

  // Throws InvalidArgument.
  void validate() const;
};

std::string default_initial_prompt(std::size_t max_words = 35);
std::string default_continuation_prompt(std::size_t n_more = 19, std::size_t max_words = 35);

struct PromptBundle {
  std::string initial_prompt;
  std::string continuation_prompt;
  std::string context;  // numbered list of the corpus texts

  static PromptBundle defaults(const Corpus& corpus, const GenerationConfig& config);
};

// "1. text\n2. text\n..." in corpus order.
std::string build_context(const Corpus& corpus);

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  // Returns the assistant reply. Throws ProviderUnavailable.
  virtual std::string complete(const std::vector<ChatMessage>& messages,
                               const GenerationConfig& config) = 0;
};

// POST {endpoint}/chat {"model_id", "temperature", "messages"} -> {"content"}.
// Bearer token from GEN_API_TOKEN when set.
class RemoteChatClient : public ChatClient {
 public:
  std::string complete(const std::vector<ChatMessage>& messages,
                       const GenerationConfig& config) override;
};

struct ProvenanceRecord {
  std::string id;
  std::string generator;  // "remote" | "mock"
  std::string prompt;
  std::string model_id;
  double temperature = 0.0;
  std::optional<std::uint64_t> seed;
  std::string timestamp;
  std::string corpus_hash;
  std::size_t word_count = 0;
  bool over_limit = false;

  bool operator==(const ProvenanceRecord&) const = default;
};

struct GenerationResult {
  Corpus corpus;
  std::vector<ProvenanceRecord> provenance;  // one per definition, same order
  std::vector<std::string> warnings;         // over-long definitions
};

// Splits an assistant reply into definitions. Numbered or bulleted items win
// over any surrounding prose; otherwise each non-blank paragraph/line is one
// definition. List markers are stripped and whitespace normalized.
std::vector<std::string> split_definitions(std::string_view response);

std::size_t word_count(std::string_view text);

// Runs the two-step conversation: the initial prompt yields one definition,
// the continuation prompt yields the remaining n-1. Ids are gen-1..gen-N
// (re-prefixed if the source corpus already uses them).
// Throws ProviderUnavailable or MalformedResponse.
GenerationResult generate_composites(const Corpus& corpus, const GenerationConfig& config,
                                     const PromptBundle& prompts, ChatClient& client);

// Same output shape, texts from mock_generate(corpus, config.seed or 0, n).
GenerationResult generate_composites_mock(const Corpus& corpus, const GenerationConfig& config,
                                          const PromptBundle& prompts);

// Seeded, offline stand-in for the chat service. Samples corpus vocabulary
// into template sentences of at most 35 words. Output depends only on the
// corpus texts, the seed and n. Throws InvalidArgument for n == 0.
std::vector<std::string> mock_generate(const Corpus& corpus, std::uint64_t seed, std::size_t n);

void write_provenance(std::ostream& out, std::span<const ProvenanceRecord> records);
std::vector<ProvenanceRecord> read_provenance(std::istream& in);

}  // namespace defsim
