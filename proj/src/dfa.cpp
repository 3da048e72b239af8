#include "rulex/dfa.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rulex {

namespace {

std::vector<long long> name_components(const std::string& name) {
    std::vector<long long> parts;
    std::size_t pos = 0;
    while (pos <= name.size()) {
        std::size_t us = name.find('_', pos);
        if (us == std::string::npos) us = name.size();
        parts.push_back(std::stoll(name.substr(pos, us - pos)));
        pos = us + 1;
    }
    return parts;
}

std::string join_descending(const std::vector<int>& members) {
    std::string s;
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (i) s += '_';
        s += std::to_string(members[i]);
    }
    return s;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

bool merge_name_less(const std::string& lhs, const std::string& rhs) {
    const auto a = name_components(lhs);
    const auto b = name_components(rhs);
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i)
        if (a[i] != b[i]) return a[i] > b[i];  // larger ids first, like "9_1"
    return a.size() < b.size();               // "9" ahead of "9_1"
}

Dfa determinize(const ExtractedAutomaton& a, std::size_t max_states) {
    // (node, symbol) -> successor set
    std::map<int, std::array<std::vector<int>, kAlphabetSize>> out;
    for (const auto& [key, edge] : a.edges)
        for (Symbol sym : edge.short_label) out[key.first][symbol_index(sym)].push_back(key.second);

    Dfa d;
    d.n_symbols = kAlphabetSize;
    d.flow_end_check = a.flow_edges;
    d.trash = -1;

    std::map<std::vector<int>, int> index;  // subset (descending) -> state
    std::deque<std::vector<int>> queue;
    auto intern = [&](std::vector<int> subset, bool accepting) {
        auto it = index.find(subset);
        if (it != index.end()) return it->second;
        const int id = static_cast<int>(d.names.size());
        if (d.names.size() >= max_states)
            throw std::runtime_error("determinize: subset construction exceeded state cap");
        index.emplace(subset, id);
        d.names.push_back(join_descending(subset));
        d.next.emplace_back(kAlphabetSize, -1);
        d.accepting.push_back(accepting ? 1 : 0);
        queue.push_back(std::move(subset));
        return id;
    };
    auto ensure_trash = [&]() {
        if (d.trash >= 0) return d.trash;
        d.trash = static_cast<int>(d.names.size());
        d.names.push_back(std::to_string(kTrashNode));
        d.next.emplace_back(kAlphabetSize, d.trash);
        d.accepting.push_back(0);
        return d.trash;
    };

    d.start = intern({kStartNode}, a.final_nodes.count(kStartNode) > 0);
    while (!queue.empty()) {
        std::vector<int> subset = std::move(queue.front());
        queue.pop_front();
        const int from = index.at(subset);
        for (int x = 0; x < kAlphabetSize; ++x) {
            std::vector<int> target;
            for (int n : subset) {
                auto it = out.find(n);
                if (it == out.end()) continue;
                for (int v : it->second[x]) target.push_back(v);
            }
            int to;
            if (target.empty()) {
                to = ensure_trash();
            } else {
                std::sort(target.begin(), target.end(), std::greater<int>());
                target.erase(std::unique(target.begin(), target.end()), target.end());
                bool acc = std::any_of(target.begin(), target.end(),
                                       [&](int n) { return a.final_nodes.count(n) > 0; });
                to = intern(std::move(target), acc);
            }
            d.next[from][x] = to;
        }
    }
    return d;
}

Dfa minimize(const Dfa& d) {
    const int n = d.state_count();
    if (n == 0) throw std::invalid_argument("minimize: empty DFA");
    for (const auto& row : d.next) {
        if (static_cast<int>(row.size()) != d.n_symbols)
            throw std::invalid_argument("minimize: transition table has wrong arity");
        for (int t : row)
            if (t < 0 || t >= n) throw std::invalid_argument("minimize: incomplete DFA");
    }

    // keep only states reachable from the start
    std::vector<int> remap(n, -1);
    std::vector<int> order;
    std::deque<int> bfs{d.start};
    remap[d.start] = 0;
    order.push_back(d.start);
    while (!bfs.empty()) {
        const int s = bfs.front();
        bfs.pop_front();
        for (int t : d.next[s]) {
            if (remap[t] >= 0) continue;
            remap[t] = static_cast<int>(order.size());
            order.push_back(t);
            bfs.push_back(t);
        }
    }
    const int m = static_cast<int>(order.size());
    std::vector<std::vector<int>> next(m, std::vector<int>(d.n_symbols));
    std::vector<char> accepting(m);
    std::vector<std::string> names(m);
    for (int s = 0; s < m; ++s) {
        const int src = order[s];
        names[s] = d.names[src];
        accepting[s] = d.accepting[src];
        for (int x = 0; x < d.n_symbols; ++x) next[s][x] = remap[d.next[src][x]];
    }
    const int start = 0;
    const int trash = d.trash >= 0 ? remap[d.trash] : -1;  // trash reachable or gone

    // table filling: mark distinguishable pairs until fixpoint
    std::vector<char> marked(static_cast<std::size_t>(m) * m, 0);
    auto at = [&](int p, int q) -> char& { return marked[static_cast<std::size_t>(p) * m + q]; };
    for (int p = 0; p < m; ++p)
        for (int q = p + 1; q < m; ++q)
            if (accepting[p] != accepting[q]) at(p, q) = 1;
    for (bool changed = true; changed;) {
        changed = false;
        for (int p = 0; p < m; ++p)
            for (int q = p + 1; q < m; ++q) {
                if (at(p, q)) continue;
                for (int x = 0; x < d.n_symbols; ++x) {
                    int a = next[p][x], b = next[q][x];
                    if (a == b) continue;
                    if (at(std::min(a, b), std::max(a, b))) {
                        at(p, q) = 1;
                        changed = true;
                        break;
                    }
                }
            }
    }

    UnionFind uf(m);
    for (int p = 0; p < m; ++p)
        for (int q = p + 1; q < m; ++q)
            if (!at(p, q)) uf.unite(p, q);

    // classes in order of first appearance
    std::vector<int> class_id(m, -1);
    std::vector<std::vector<int>> members;
    for (int s = 0; s < m; ++s) {
        const int root = uf.find(s);
        if (class_id[root] < 0) {
            class_id[root] = static_cast<int>(members.size());
            members.emplace_back();
        }
        class_id[s] = class_id[root];
        members[class_id[s]].push_back(s);
    }

    Dfa out;
    out.n_symbols = d.n_symbols;
    out.flow_end_check = d.flow_end_check;
    out.start = class_id[start];
    out.trash = trash >= 0 ? class_id[trash] : -1;
    const int k = static_cast<int>(members.size());
    out.names.resize(k);
    out.next.assign(k, std::vector<int>(d.n_symbols));
    out.accepting.resize(k);
    for (int c = 0; c < k; ++c) {
        std::vector<std::string> parts;
        for (int s : members[c]) parts.push_back(names[s]);
        std::sort(parts.begin(), parts.end(), merge_name_less);
        std::string joined = parts[0];
        for (std::size_t i = 1; i < parts.size(); ++i) joined += "_" + parts[i];
        out.names[c] = std::move(joined);
        out.accepting[c] = accepting[members[c][0]];
        for (int x = 0; x < d.n_symbols; ++x) out.next[c][x] = class_id[next[members[c][0]][x]];
    }
    return out;
}

int dfa_step(const Dfa& d, int state, Symbol sym) {
    return d.next[static_cast<std::size_t>(state)][symbol_index(sym)];
}

std::string export_dot(const Dfa& d, bool include_trash) {
    std::ostringstream out;
    out << "digraph dfa {\n  rankdir=LR;\n  __start [shape=point];\n";
    auto skip = [&](int s) { return !include_trash && s == d.trash; };
    for (int s = 0; s < d.state_count(); ++s) {
        if (skip(s)) continue;
        out << "  \"" << d.names[s] << "\"";
        if (d.is_accepting(s)) out << " [shape=doublecircle]";
        out << ";\n";
    }
    out << "  __start -> \"" << d.names[d.start] << "\";\n";
    for (int s = 0; s < d.state_count(); ++s) {
        if (skip(s)) continue;
        // group symbols by target for compact edges
        std::map<int, std::string> by_target;
        for (int x = 0; x < d.n_symbols; ++x) {
            const int t = d.next[s][x];
            if (skip(t)) continue;
            std::string& lbl = by_target[t];
            if (!lbl.empty()) lbl += ',';
            lbl += to_char(symbol_at(x));
        }
        for (const auto& [t, lbl] : by_target)
            out << "  \"" << d.names[s] << "\" -> \"" << d.names[t] << "\" [label=\"" << lbl
                << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

void save_dfa(const Dfa& d, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = "rulex-dfa";
    j["version"] = 1;
    j["n_symbols"] = d.n_symbols;
    std::string symbols;
    for (int x = 0; x < d.n_symbols; ++x) symbols += to_char(symbol_at(x));
    j["symbols"] = symbols;
    j["names"] = d.names;
    j["next"] = d.next;
    std::vector<int> acc;
    for (int s = 0; s < d.state_count(); ++s)
        if (d.is_accepting(s)) acc.push_back(s);
    j["accepting"] = acc;
    j["start"] = d.start;
    j["trash"] = d.trash;
    j["flow_end_check"] = d.flow_end_check;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Dfa load_dfa(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dfa: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("bad dfa " + path.string() + ": " + e.what());
    }
    if (j.value("format", "") != "rulex-dfa")
        throw std::runtime_error("unrecognized dfa file: " + path.string());
    Dfa d;
    d.n_symbols = j.at("n_symbols").get<int>();
    d.names = j.at("names").get<std::vector<std::string>>();
    d.next = j.at("next").get<std::vector<std::vector<int>>>();
    d.accepting.assign(d.names.size(), 0);
    for (int s : j.at("accepting").get<std::vector<int>>()) d.accepting[s] = 1;
    d.start = j.at("start").get<int>();
    d.trash = j.at("trash").get<int>();
    d.flow_end_check = j.at("flow_end_check").get<bool>();
    return d;
}

}  // namespace rulex
