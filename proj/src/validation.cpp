#include "rulex/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "rulex/clustering.hpp"

namespace rulex {

AcceptResult accepts(const Dfa& d, const Sequence& s) {
    if (s.size() < 2 || s.symbols.front() != Symbol::B || s.symbols.back() != Symbol::E)
        throw std::invalid_argument("accepts: sequence must run from B to E: " + s.str());

    AcceptResult res;
    int state = d.start;
    const std::size_t n = s.size();
    for (std::size_t t = 0; t + 1 < n; ++t) {
        state = dfa_step(d, state, s.symbols[t]);
        if (state == d.trash) {
            res.consumed = t;  // the walk died on symbol t
            return res;
        }
        res.consumed = t + 1;
    }

    if (d.flow_end_check) {
        // consume the final E, then the sequence-chaining check: a B must
        // lead somewhere useful from the post-E state
        state = dfa_step(d, state, s.symbols[n - 1]);
        if (state == d.trash) return res;  // died on the E itself
        res.consumed = n;
        res.end_check_passed = dfa_step(d, state, Symbol::B) != d.trash;
        res.accepted = res.end_check_passed;
    } else {
        // without flow edges the post-E node is a dead end by construction
        // (often merged into trash), so the verdict is taken on the state
        // holding the final E
        res.accepted = d.is_accepting(state);
        res.end_check_passed = res.accepted;
        if (res.accepted) res.consumed = n;
    }
    return res;
}

double evaluate_acceptance(const Dfa& d, const Corpus& corpus) {
    if (corpus.sequences.empty()) throw std::invalid_argument("evaluate_acceptance: empty corpus");
    std::size_t ok = 0;
    for (const Sequence& s : corpus.sequences)
        if (accepts(d, s).accepted) ++ok;
    return 100.0 * static_cast<double>(ok) / static_cast<double>(corpus.sequences.size());
}

bool nfa_path_exists(const ExtractedAutomaton& a, const Sequence& s) {
    // successors by symbol, then breadth-first over reachable node sets
    std::map<int, std::map<Symbol, std::vector<int>>> out;
    for (const auto& [key, edge] : a.edges)
        for (Symbol sym : edge.short_label) out[key.first][sym].push_back(key.second);

    std::set<int> frontier{kStartNode};
    for (Symbol sym : s.symbols) {
        std::set<int> next;
        for (int n : frontier) {
            auto it = out.find(n);
            if (it == out.end()) continue;
            auto jt = it->second.find(sym);
            if (jt == it->second.end()) continue;
            next.insert(jt->second.begin(), jt->second.end());
        }
        if (next.empty()) return false;
        frontier = std::move(next);
    }
    return true;
}

std::uint64_t sweep_cell_seed(std::uint64_t base_seed, int k, int sim) {
    // splitmix64 over a (base, k, sim) blend
    std::uint64_t x = base_seed ^ (static_cast<std::uint64_t>(k) << 32) ^
                      static_cast<std::uint64_t>(sim + 1);
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<SweepAggregate> aggregate_rows(const std::vector<SweepRow>& rows) {
    std::map<int, std::vector<const SweepRow*>> by_k;
    for (const SweepRow& r : rows)
        if (r.error.empty()) by_k[r.k].push_back(&r);

    std::vector<SweepAggregate> out;
    for (const auto& [k, cell_rows] : by_k) {
        SweepAggregate agg;
        agg.k = k;
        agg.sims_ok = static_cast<int>(cell_rows.size());
        double ssum = 0.0, asum = 0.0;
        for (const SweepRow* r : cell_rows) {
            ssum += r->silhouette;
            asum += r->pct_accepted;
        }
        agg.mean_silhouette = ssum / agg.sims_ok;
        agg.mean_pct_accepted = asum / agg.sims_ok;
        double svar = 0.0, avar = 0.0;
        for (const SweepRow* r : cell_rows) {
            svar += (r->silhouette - agg.mean_silhouette) * (r->silhouette - agg.mean_silhouette);
            avar += (r->pct_accepted - agg.mean_pct_accepted) *
                    (r->pct_accepted - agg.mean_pct_accepted);
        }
        agg.std_silhouette = std::sqrt(svar / agg.sims_ok);
        agg.std_pct_accepted = std::sqrt(avar / agg.sims_ok);
        out.push_back(agg);
    }
    return out;
}

SweepReport sweep_k(const HiddenTrace& trace, const Corpus& eval_corpus,
                    const SweepOptions& opts) {
    if (opts.k_list.empty()) throw std::invalid_argument("sweep_k: empty k list");
    if (!std::is_sorted(opts.k_list.begin(), opts.k_list.end()))
        throw std::invalid_argument("sweep_k: k list must be ascending");
    if (opts.n_sims < 1) throw std::invalid_argument("sweep_k: n_sims must be positive");

    const HiddenTrace cut = trace.prefix_complete(opts.max_patterns);

    struct Cell {
        int k;
        int sim;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (int k : opts.k_list)
        for (int sim = 0; sim < opts.n_sims; ++sim) {
            const std::uint64_t seed = sweep_cell_seed(opts.base_seed, k, sim);
            if (opts.skip_cells.count({k, seed})) continue;
            cells.push_back({k, sim, seed});
        }

    SweepReport report;
    std::mutex mu;
    std::size_t cursor = 0;

    auto worker = [&]() {
        for (;;) {
            Cell cell{};
            {
                std::lock_guard<std::mutex> lock(mu);
                if (cursor >= cells.size()) return;
                cell = cells[cursor++];
            }
            SweepRow row;
            row.k = cell.k;
            row.sim = cell.sim;
            row.seed = cell.seed;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                std::mt19937_64 rng(cell.seed);
                ClusterAssignment ca = kmeans(cut.patterns, cell.k, rng);
                row.silhouette = silhouette_mean(cut.patterns, ca.assignment);
                ExtractedAutomaton a = build_automaton(cut, ca, opts.flow_edges);
                Dfa mini = minimize(determinize(short_label_view(a)));
                row.pct_accepted = evaluate_acceptance(mini, eval_corpus);
                row.n_states_minimized = mini.state_count() - (mini.trash >= 0 ? 1 : 0);
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
            {
                std::lock_guard<std::mutex> lock(mu);
                if (opts.on_row) opts.on_row(row);
                report.rows.push_back(row);
            }
        }
    };

    int n_workers = opts.workers > 0 ? opts.workers
                                     : static_cast<int>(std::thread::hardware_concurrency());
    if (n_workers < 1) n_workers = 1;
    n_workers = std::min<int>(n_workers, static_cast<int>(cells.size()) > 0
                                             ? static_cast<int>(cells.size())
                                             : 1);
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    std::sort(report.rows.begin(), report.rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return a.k != b.k ? a.k < b.k : a.sim < b.sim;
    });
    report.aggregates = aggregate_rows(report.rows);
    return report;
}

}  // namespace rulex
