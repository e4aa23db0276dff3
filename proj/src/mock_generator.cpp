#include <algorithm>
#include <array>
#include <random>
#include <set>

#include "defsim/error.hpp"
#include "defsim/generation.hpp"
#include "defsim/hashing.hpp"

namespace defsim {
namespace {

constexpr std::array<std::string_view, 24> kStopwords = {
    "that", "this", "with", "from", "their", "they", "have", "which", "into", "such",
    "while", "also", "more", "than", "been", "were", "those", "these", "there", "where",
    "through", "about", "each", "will"};

// Seven slots per template; at most 16 words each once filled.
constexpr std::array<std::string_view, 4> kTemplates = {
    "It is an {} {} that uses {} and {} to improve {}, {} and {}.",
    "This {} combines {}, {} and {} to enhance {} and {} for its {}.",
    "An {} approach where {} and {} support {}, {} and the {} of {}.",
    "It applies {} {} and {} {} to deliver {}, {} and {}.",
};

std::vector<std::string> vocabulary(const Corpus& corpus) {
  std::set<std::string> long_words;
  std::set<std::string> any_words;
  for (const auto& def : corpus.definitions()) {
    std::string word;
    auto flush = [&] {
      if (word.empty()) return;
      any_words.insert(word);
      if (word.size() >= 4 &&
          std::find(kStopwords.begin(), kStopwords.end(), word) == kStopwords.end()) {
        long_words.insert(word);
      }
      word.clear();
    };
    for (char c : def.text) {
      if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) {
        word.push_back(static_cast<char>(c | 0x20));
      } else {
        flush();
      }
    }
    flush();
  }
  if (!long_words.empty()) return {long_words.begin(), long_words.end()};
  if (!any_words.empty()) return {any_words.begin(), any_words.end()};
  return {"definition"};
}

std::string fill(std::string_view tmpl, const std::vector<std::string>& vocab,
                 std::mt19937_64& rng) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
      out += vocab[rng() % vocab.size()];
      ++i;
    } else {
      out.push_back(tmpl[i]);
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> mock_generate(const Corpus& corpus, std::uint64_t seed, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "mock generator needs n >= 1");
  const auto vocab = vocabulary(corpus);
  // mt19937_64 output is fixed by the standard; only raw draws are used so
  // results do not depend on the library's distribution implementations.
  std::mt19937_64 rng(fnv1a64(corpus.text_hash() + ":" + std::to_string(seed)));

  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t sentences = 1 + rng() % 2;
    std::string text;
    for (std::size_t s = 0; s < sentences; ++s) {
      if (!text.empty()) text.push_back(' ');
      text += fill(kTemplates[rng() % kTemplates.size()], vocab, rng);
    }
    out.push_back(std::move(text));
  }
  return out;
}

}  // namespace defsim
