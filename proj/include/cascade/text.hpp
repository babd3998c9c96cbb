#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cascade {

// Lowercases ASCII, trims, and collapses internal whitespace runs to a single
// space. Idempotent.
std::string normalize_text(std::string_view raw);

// Splits lowercased text on any non-alphanumeric byte. Empty tokens and a
// short list of filler words ("the", "for", "picks", ...) are dropped.
std::vector<std::string> tokenize(std::string_view raw);

std::set<std::string> token_set(std::string_view raw);

// Joins `parts` with a single space.
std::string join(const std::vector<std::string>& parts,
                 std::string_view sep = " ");

bool is_stopword(std::string_view token);

}  // namespace cascade
