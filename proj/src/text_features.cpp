#include "patternmine/text_features.hpp"

#include "patternmine/text_util.hpp"

namespace patternmine {
namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

void append_tokens(std::string_view text, std::string_view prefix, std::vector<std::string>& out) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) {
      std::string tok(prefix);
      for (std::size_t k = start; k < i; ++k) tok.push_back(ascii_lower(text[k]));
      out.push_back(std::move(tok));
    }
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  append_tokens(text, "", out);
  return out;
}

std::vector<std::string> pair_tokens(std::string_view hyp, std::string_view prem) {
  std::vector<std::string> out;
  append_tokens(hyp, "h:", out);
  append_tokens(prem, "p:", out);
  return out;
}

std::vector<std::string> example_tokens(const MinedExample& ex) {
  return ex.pair ? pair_tokens(ex.hyp, ex.prem) : tokenize(ex.input);
}

}  // namespace patternmine
