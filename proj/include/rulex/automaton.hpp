#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rulex/clustering.hpp"
#include "rulex/grammar.hpp"
#include "rulex/trace.hpp"

namespace rulex {

inline constexpr int kStartNode = -1;
inline constexpr int kTrashNode = -2;

struct EdgeData {
    int weight = 0;
    std::vector<std::string> long_label;  // timestamped symbols, e.g. "T1"
    std::set<Symbol> short_label;
};

// Automaton over cluster ids as produced by the trace walk; generally an NFA.
struct ExtractedAutomaton {
    std::set<int> nodes;  // includes the start node -1
    std::map<std::pair<int, int>, EdgeData> edges;
    std::set<int> final_nodes;  // nodes a sequence-ending E was consumed from
    bool flow_edges = true;     // sequences fed end-to-end (no reset to -1)
};

enum class LabelMode { None, Long, Short };

// Algorithm-1 walk over (cluster id, label) pairs. `boundaries` lists the
// trace index where each sequence starts; with flow_edges the walk never
// returns to -1, producing the E->B continuation edges.
ExtractedAutomaton build_automaton(const std::vector<int>& clusters,
                                   const std::vector<std::string>& labels,
                                   const std::vector<std::size_t>& boundaries, bool flow_edges);
ExtractedAutomaton build_automaton(const HiddenTrace& trace, const ClusterAssignment& assignment,
                                   bool flow_edges = true);

// Same construction but with ground-truth grammar states instead of cluster
// ids; a perfect-quantization harness.
ExtractedAutomaton build_oracle_automaton(const GrammarSpec& g, const Corpus& corpus,
                                          bool flow_edges = true);

// Topology preserved, long labels dropped.
ExtractedAutomaton short_label_view(const ExtractedAutomaton& a);

// True iff no node has two outgoing edges sharing a symbol.
bool is_deterministic(const ExtractedAutomaton& a);

std::string export_dot(const ExtractedAutomaton& a, LabelMode mode);

void save_automaton(const ExtractedAutomaton& a, const std::filesystem::path& path);
ExtractedAutomaton load_automaton(const std::filesystem::path& path);

}  // namespace rulex
