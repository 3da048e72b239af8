#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rulex/automaton.hpp"
#include "rulex/grammar.hpp"

namespace rulex {

// Complete DFA. State names follow the merge convention: subset states are
// descending underscore-joins of member ids ("9_1"), merged states join
// their members' names ("9_9_1_6").
struct Dfa {
    int n_symbols = kAlphabetSize;
    std::vector<std::string> names;
    std::vector<std::vector<int>> next;  // [state][symbol]
    std::vector<char> accepting;         // per state (avoids vector<bool> quirks)
    int start = 0;
    int trash = -1;  // index of the trash sink, -1 if the DFA has none
    bool flow_end_check = true;  // provenance: extracted with flow edges

    int state_count() const { return static_cast<int>(names.size()); }
    bool is_accepting(int s) const { return accepting[static_cast<std::size_t>(s)] != 0; }
};

// Subset construction from {-1}; missing transitions are completed with the
// trash sink -2. A subset accepts iff it contains a final node. Throws
// std::runtime_error if more than `max_states` subsets appear.
Dfa determinize(const ExtractedAutomaton& a, std::size_t max_states = 1 << 20);

// Table-filling minimization. Unreachable states are dropped first; the
// input must be complete (every transition defined) or std::invalid_argument
// is thrown. Result has the minimum number of states for the language.
Dfa minimize(const Dfa& d);

// Comparator behind merged-state naming: numeric components descending,
// a name that is a prefix of another sorts first ({9, 9_1, 6} -> 9_9_1_6).
bool merge_name_less(const std::string& lhs, const std::string& rhs);

int dfa_step(const Dfa& d, int state, Symbol sym);

// Trash excluded by default, matching how the minimized automata are drawn.
std::string export_dot(const Dfa& d, bool include_trash = false);

void save_dfa(const Dfa& d, const std::filesystem::path& path);
Dfa load_dfa(const std::filesystem::path& path);

}  // namespace rulex
