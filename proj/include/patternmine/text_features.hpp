#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "patternmine/miner.hpp"

namespace patternmine {

/// Lowercased word unigrams: maximal runs of ASCII letters and digits, with
/// non-ASCII bytes treated as word characters.
std::vector<std::string> tokenize(std::string_view text);

/// Tokens of one example. Pair examples get disjoint "h:" and "p:" namespaces.
std::vector<std::string> example_tokens(const MinedExample& ex);
std::vector<std::string> pair_tokens(std::string_view hyp, std::string_view prem);

}  // namespace patternmine
