#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace defsim {

enum class DefinitionKind { kIndividual, kComposite, kBaseline, kExternal };

std::string_view to_string(DefinitionKind kind);
DefinitionKind parse_definition_kind(std::string_view name);

struct Definition {
  std::string id;
  std::string text;
  DefinitionKind kind = DefinitionKind::kIndividual;
  std::string source;

  bool operator==(const Definition&) const = default;
};

// An ordered, id-unique collection of definitions. Immutable once built.
class Corpus {
 public:
  // Throws EmptyCorpus, DuplicateId, or MalformedRecord (empty id or text).
  Corpus(std::string name, std::vector<Definition> definitions, std::string created = {});

  const std::string& name() const noexcept { return name_; }
  const std::string& created() const noexcept { return created_; }
  std::span<const Definition> definitions() const noexcept { return definitions_; }
  std::size_t size() const noexcept { return definitions_.size(); }

  bool contains(std::string_view id) const;
  const Definition* find(std::string_view id) const;
  // Throws UnknownId.
  const Definition& at(std::string_view id) const;
  std::vector<std::string> ids() const;

  // Hash over the texts in order; ids and metadata do not contribute.
  std::string text_hash() const;

 private:
  std::string name_;
  std::vector<Definition> definitions_;
  std::string created_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Collapses every run of ASCII whitespace to one space and trims both ends.
std::string normalize_whitespace(std::string_view text);

/// Current UTC time as ISO 8601, second precision ("2024-01-31T12:00:00Z").
std::string utc_timestamp();

// JSON-lines reader. One object per non-blank line with string fields
// "id", "text", "kind" and optional "source". Texts are whitespace-normalized.
Corpus parse_corpus(std::istream& input, std::string name);
Corpus parse_corpus(std::string_view input, std::string name);
Corpus load_corpus(const std::filesystem::path& path);

void write_corpus(std::ostream& out, const Corpus& corpus);
std::string serialize_corpus(const Corpus& corpus);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

// Requested order is kept. Throws EmptyCorpus for an empty id list and
// UnknownId for an id not in `corpus`.
Corpus subset(const Corpus& corpus, std::span<const std::string> ids);

// Concatenates corpora in order; ids must stay unique across all of them.
Corpus merge(std::span<const Corpus> corpora, std::string name);

}  // namespace defsim
