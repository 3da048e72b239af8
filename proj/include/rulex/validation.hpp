#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rulex/automaton.hpp"
#include "rulex/dfa.hpp"
#include "rulex/grammar.hpp"
#include "rulex/trace.hpp"

namespace rulex {

struct AcceptResult {
    bool accepted = false;
    std::size_t consumed = 0;  // symbols consumed before the walk died (== length if it survived)
    bool end_check_passed = false;
};

// Deterministic walk over the whole sequence, final E included. Flow-built
// DFAs pass when the walk stays out of trash and a B transition leaves the
// final state; non-flow DFAs when the state before the final E accepts.
// Malformed input (missing B prefix / E suffix) throws std::invalid_argument.
AcceptResult accepts(const Dfa& d, const Sequence& s);

// 100 * accepted / total over the corpus.
double evaluate_acceptance(const Dfa& d, const Corpus& corpus);

// Pre-minimization diagnostic: is there any path from -1 consuming s?
bool nfa_path_exists(const ExtractedAutomaton& a, const Sequence& s);

struct SweepRow {
    int k = 0;
    int sim = 0;
    std::uint64_t seed = 0;
    double silhouette = 0.0;
    double pct_accepted = 0.0;
    int n_states_minimized = 0;  // trash excluded
    long long wall_ms = 0;
    std::string error;  // nonempty: cell failed, numeric fields meaningless
};

struct SweepAggregate {
    int k = 0;
    int sims_ok = 0;
    double mean_silhouette = 0.0;
    double std_silhouette = 0.0;
    double mean_pct_accepted = 0.0;
    double std_pct_accepted = 0.0;
};

struct SweepReport {
    std::vector<SweepRow> rows;  // sorted by (k, sim)
    std::vector<SweepAggregate> aggregates;
};

struct SweepOptions {
    std::vector<int> k_list;
    int n_sims = 10;
    std::size_t max_patterns = 5000;  // trace cut to whole sequences under this budget
    int workers = 0;                  // 0: hardware concurrency
    std::uint64_t base_seed = 0;
    bool flow_edges = true;
    // cells already on disk, identified by (k, derived seed); they are skipped
    std::set<std::pair<int, std::uint64_t>> skip_cells;
    // called as soon as a cell finishes (any thread, externally serialized)
    std::function<void(const SweepRow&)> on_row;
};

std::uint64_t sweep_cell_seed(std::uint64_t base_seed, int k, int sim);

// Per-cell pipeline: kmeans -> silhouette -> construction -> determinize ->
// minimize -> acceptance on eval_corpus. Failures land in SweepRow::error.
SweepReport sweep_k(const HiddenTrace& trace, const Corpus& eval_corpus,
                    const SweepOptions& opts);

// Recomputes per-k aggregates (population std-dev) from successful rows.
std::vector<SweepAggregate> aggregate_rows(const std::vector<SweepRow>& rows);

}  // namespace rulex
