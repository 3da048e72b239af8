#include "rulex/automaton.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rulex {

namespace {

Symbol label_symbol(const std::string& label) {
    if (label.empty()) throw std::invalid_argument("empty trace label");
    auto sym = symbol_from_char(label[0]);
    if (!sym) throw std::invalid_argument("trace label has unknown symbol: " + label);
    return *sym;
}

std::string short_label_str(const std::set<Symbol>& syms) {
    std::string s;
    for (Symbol sym : syms) s += to_char(sym);
    return s;
}

}  // namespace

ExtractedAutomaton build_automaton(const std::vector<int>& clusters,
                                   const std::vector<std::string>& labels,
                                   const std::vector<std::size_t>& boundaries, bool flow_edges) {
    if (clusters.size() != labels.size())
        throw std::invalid_argument("build_automaton: clusters/labels length mismatch");

    ExtractedAutomaton a;
    a.flow_edges = flow_edges;
    a.nodes.insert(kStartNode);
    int current = kStartNode;
    std::size_t next_boundary = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        if (next_boundary < boundaries.size() && boundaries[next_boundary] == i) {
            ++next_boundary;
            if (!flow_edges) current = kStartNode;
        }
        const int c = clusters[i];
        const Symbol sym = label_symbol(labels[i]);
        a.nodes.insert(c);
        EdgeData& e = a.edges[{current, c}];
        ++e.weight;
        e.long_label.push_back(labels[i]);
        e.short_label.insert(sym);
        // A node is final when a sequence-ending E is consumed from it. An E in
        // the middle of a sequence (ERG carries the inner grammar's E) is an
        // ordinary transition, not an end marker.
        const bool ends_sequence = i + 1 == clusters.size() ||
                                   (next_boundary < boundaries.size() &&
                                    boundaries[next_boundary] == i + 1);
        if (sym == Symbol::E && ends_sequence) a.final_nodes.insert(current);
        current = c;
    }
    return a;
}

ExtractedAutomaton build_automaton(const HiddenTrace& trace, const ClusterAssignment& assignment,
                                   bool flow_edges) {
    if (trace.size() != assignment.assignment.size())
        throw std::invalid_argument("build_automaton: trace/assignment length mismatch");
    return build_automaton(assignment.assignment, trace.labels, trace.boundaries, flow_edges);
}

ExtractedAutomaton build_oracle_automaton(const GrammarSpec& g, const Corpus& corpus,
                                          bool flow_edges) {
    std::vector<int> clusters;
    std::vector<std::string> labels;
    std::vector<std::size_t> boundaries;
    for (const Sequence& seq : corpus.sequences) {
        auto path = grammar_state_path(g, seq);
        if (!path) throw std::invalid_argument("build_oracle_automaton: ungrammatical sequence " + seq.str());
        boundaries.push_back(clusters.size());
        for (std::size_t t = 0; t < seq.size(); ++t) {
            clusters.push_back((*path)[t]);
            labels.push_back(std::string(1, to_char(seq.symbols[t])) + std::to_string(t));
        }
    }
    return build_automaton(clusters, labels, boundaries, flow_edges);
}

ExtractedAutomaton short_label_view(const ExtractedAutomaton& a) {
    ExtractedAutomaton out = a;
    for (auto& [key, edge] : out.edges) edge.long_label.clear();
    return out;
}

bool is_deterministic(const ExtractedAutomaton& a) {
    std::map<std::pair<int, Symbol>, int> seen;  // (node, symbol) -> fan-out
    for (const auto& [key, edge] : a.edges)
        for (Symbol sym : edge.short_label)
            if (++seen[{key.first, sym}] > 1) return false;
    return true;
}

std::string export_dot(const ExtractedAutomaton& a, LabelMode mode) {
    std::ostringstream out;
    out << "digraph extracted {\n  rankdir=LR;\n";
    for (int n : a.nodes) {
        out << "  \"" << n << "\"";
        if (a.final_nodes.count(n)) out << " [shape=doublecircle]";
        out << ";\n";
    }
    for (const auto& [key, edge] : a.edges) {
        out << "  \"" << key.first << "\" -> \"" << key.second << "\" [";
        if (mode == LabelMode::Long) {
            out << "label=\"";
            for (std::size_t i = 0; i < edge.long_label.size(); ++i)
                out << (i ? "," : "") << edge.long_label[i];
            out << "\", ";
        } else if (mode == LabelMode::Short) {
            out << "label=\"" << short_label_str(edge.short_label) << "\", ";
        }
        out << "weight=" << edge.weight << "];\n";
    }
    out << "}\n";
    return out.str();
}

void save_automaton(const ExtractedAutomaton& a, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = "rulex-automaton";
    j["version"] = 1;
    j["flow_edges"] = a.flow_edges;
    j["nodes"] = std::vector<int>(a.nodes.begin(), a.nodes.end());
    j["final_nodes"] = std::vector<int>(a.final_nodes.begin(), a.final_nodes.end());
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [key, edge] : a.edges) {
        edges.push_back({{"from", key.first},
                         {"to", key.second},
                         {"weight", edge.weight},
                         {"long_label", edge.long_label},
                         {"short_label", short_label_str(edge.short_label)}});
    }
    j["edges"] = std::move(edges);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

ExtractedAutomaton load_automaton(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open automaton: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("bad automaton " + path.string() + ": " + e.what());
    }
    if (j.value("format", "") != "rulex-automaton")
        throw std::runtime_error("unrecognized automaton file: " + path.string());
    ExtractedAutomaton a;
    a.flow_edges = j.at("flow_edges").get<bool>();
    for (int n : j.at("nodes")) a.nodes.insert(n);
    for (const auto& je : j.at("edges")) {
        EdgeData e;
        e.weight = je.at("weight").get<int>();
        e.long_label = je.at("long_label").get<std::vector<std::string>>();
        for (char c : je.at("short_label").get<std::string>())
            e.short_label.insert(label_symbol(std::string(1, c)));
        a.edges[{je.at("from").get<int>(), je.at("to").get<int>()}] = std::move(e);
    }
    for (int n : j.at("final_nodes")) a.final_nodes.insert(n);
    return a;
}

}  // namespace rulex
