#include "rulex/grammar.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace rulex {

namespace {

constexpr char kSymbolChars[] = "BTPSXVE";

// Upper bound on the random walk; self-loop chains are unbounded in
// principle, so pathological seeds restart instead of spinning forever.
constexpr std::size_t kMaxGeneratedLength = 1000;

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

int add_state(GrammarSpec& g) {
    g.emissions.emplace_back();
    return g.state_count() - 1;
}

// The classic six-interior-state Reber machine. Returns {entry, exit}.
std::pair<int, int> embed_reber(GrammarSpec& g) {
    int s0 = add_state(g);
    int s1 = add_state(g);
    int s2 = add_state(g);
    int s3 = add_state(g);
    int s4 = add_state(g);
    int s5 = add_state(g);
    int s6 = add_state(g);
    int s7 = add_state(g);
    g.emissions[s0] = {{Symbol::B, s1}};
    g.emissions[s1] = {{Symbol::T, s2}, {Symbol::P, s3}};
    g.emissions[s2] = {{Symbol::S, s2}, {Symbol::X, s4}};
    g.emissions[s3] = {{Symbol::T, s3}, {Symbol::V, s5}};
    g.emissions[s4] = {{Symbol::X, s3}, {Symbol::S, s6}};
    g.emissions[s5] = {{Symbol::P, s4}, {Symbol::V, s6}};
    g.emissions[s6] = {{Symbol::E, s7}};
    return {s0, s7};
}

}  // namespace

char to_char(Symbol s) {
    return kSymbolChars[symbol_index(s)];
}

std::optional<Symbol> symbol_from_char(char c) {
    for (int i = 0; i < kAlphabetSize; ++i)
        if (kSymbolChars[i] == c) return symbol_at(i);
    return std::nullopt;
}

std::string Sequence::str() const {
    std::string out;
    out.reserve(symbols.size());
    for (Symbol s : symbols) out.push_back(to_char(s));
    return out;
}

Sequence Sequence::parse(std::string_view text, bool valid) {
    Sequence seq;
    seq.valid = valid;
    seq.symbols.reserve(text.size());
    for (char c : text) {
        auto s = symbol_from_char(c);
        if (!s) throw std::runtime_error(std::string("unknown symbol character: '") + c + "'");
        seq.symbols.push_back(*s);
    }
    return seq;
}

const char* to_string(GrammarKind k) {
    switch (k) {
        case GrammarKind::RG: return "rg";
        case GrammarKind::ERG: return "erg";
        case GrammarKind::CERG: return "cerg";
    }
    return "?";
}

std::optional<GrammarKind> grammar_kind_from_string(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "rg") return GrammarKind::RG;
    if (lower == "erg") return GrammarKind::ERG;
    if (lower == "cerg") return GrammarKind::CERG;
    return std::nullopt;
}

GrammarSpec build_grammar(GrammarKind kind) {
    GrammarSpec g;
    g.kind = kind;
    if (kind == GrammarKind::RG) {
        auto [entry, exit] = embed_reber(g);
        g.start_state = entry;
        g.end_state = exit;
        return g;
    }
    // ERG wraps two Reber copies behind a shared T/P branch whose closing
    // symbol must match the opening one; CERG additionally wraps end to start.
    int start = add_state(g);
    int branch = add_state(g);
    auto [t_in, t_out] = embed_reber(g);
    auto [p_in, p_out] = embed_reber(g);
    int pre_end = add_state(g);
    int end = add_state(g);
    g.emissions[start] = {{Symbol::B, branch}};
    g.emissions[branch] = {{Symbol::T, t_in}, {Symbol::P, p_in}};
    g.emissions[t_out] = {{Symbol::T, pre_end}};
    g.emissions[p_out] = {{Symbol::P, pre_end}};
    g.emissions[pre_end] = {{Symbol::E, end}};
    g.start_state = start;
    g.end_state = end;
    g.continuous = (kind == GrammarKind::CERG);
    return g;
}

Sequence generate_sequence(const GrammarSpec& g, std::mt19937_64& rng) {
    if (g.continuous)
        throw std::invalid_argument("generate_sequence: continuous grammar, use generate_flow");
    for (;;) {
        Sequence seq;
        int state = g.start_state;
        while (state != g.end_state && seq.symbols.size() < kMaxGeneratedLength) {
            const auto& options = g.emissions[state];
            const Emission& e = options.size() == 1 ? options[0] : options[pick(rng, options.size())];
            seq.symbols.push_back(e.symbol);
            state = e.next_state;
        }
        if (state == g.end_state) return seq;
    }
}

Sequence generate_flow(const GrammarSpec& g, std::size_t length, std::mt19937_64& rng) {
    if (!g.continuous)
        throw std::invalid_argument("generate_flow: grammar is not continuous");
    if (length < 1) throw std::invalid_argument("generate_flow: length must be >= 1");
    Sequence seq;
    seq.symbols.reserve(length);
    int state = g.start_state;
    while (seq.symbols.size() < length) {
        if (state == g.end_state) state = g.start_state;
        const auto& options = g.emissions[state];
        const Emission& e = options.size() == 1 ? options[0] : options[pick(rng, options.size())];
        seq.symbols.push_back(e.symbol);
        state = e.next_state;
    }
    return seq;
}

Sequence generate_invalid(const GrammarSpec& g, std::mt19937_64& rng) {
    for (;;) {
        Sequence seq = generate_sequence(g, rng);
        std::size_t ops = 1 + pick(rng, 4);
        for (std::size_t i = 0; i < ops && seq.symbols.size() >= 2; ++i) {
            switch (pick(rng, 3)) {
                case 0: {  // substitute an interior symbol
                    std::size_t pos = 1 + pick(rng, seq.symbols.size() - 1);
                    seq.symbols[pos] = symbol_at(static_cast<int>(pick(rng, kAlphabetSize)));
                    break;
                }
                case 1: {  // insert after the leading B
                    std::size_t pos = 1 + pick(rng, seq.symbols.size());
                    seq.symbols.insert(seq.symbols.begin() + static_cast<std::ptrdiff_t>(pos),
                                       symbol_at(static_cast<int>(pick(rng, kAlphabetSize))));
                    break;
                }
                case 2: {  // delete an interior symbol
                    std::size_t pos = 1 + pick(rng, seq.symbols.size() - 1);
                    seq.symbols.erase(seq.symbols.begin() + static_cast<std::ptrdiff_t>(pos));
                    break;
                }
            }
        }
        seq.valid = false;
        if (!seq.symbols.empty() && !is_grammatical(g, seq)) return seq;
    }
}

std::optional<std::vector<int>> grammar_state_path(const GrammarSpec& g, const Sequence& s) {
    std::vector<int> states;
    states.reserve(s.size());
    int state = g.start_state;
    for (Symbol sym : s.symbols) {
        if (state == g.end_state) {
            if (!g.continuous) return std::nullopt;
            state = g.start_state;
        }
        const Emission* hit = nullptr;
        for (const Emission& e : g.emissions[state]) {
            if (e.symbol == sym) {
                hit = &e;
                break;
            }
        }
        if (!hit) return std::nullopt;
        state = hit->next_state;
        states.push_back(state);
    }
    return states;
}

bool is_grammatical(const GrammarSpec& g, const Sequence& s) {
    if (s.empty()) return false;
    auto path = grammar_state_path(g, s);
    if (!path) return false;
    if (g.continuous) return true;  // flows are valid at any truncation point
    return path->back() == g.end_state;
}

CorpusStats corpus_stats(const Corpus& c) {
    if (c.sequences.empty()) throw std::invalid_argument("corpus_stats: empty corpus");
    CorpusStats st;
    st.count = c.sequences.size();
    for (const Sequence& s : c.sequences) st.total_symbols += s.size();
    st.mean_length = static_cast<double>(st.total_symbols) / static_cast<double>(st.count);
    double sq = 0.0;
    for (const Sequence& s : c.sequences) {
        double d = static_cast<double>(s.size()) - st.mean_length;
        sq += d * d;
    }
    st.stddev_length = std::sqrt(sq / static_cast<double>(st.count));
    return st;
}

void write_corpus(const Corpus& c, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open corpus file for writing: " + path.string());
    for (const Sequence& s : c.sequences) out << s.str() << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Corpus read_corpus(const std::filesystem::path& path, bool valid) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path.string());
    Corpus c;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        try {
            c.sequences.push_back(Sequence::parse(line, valid));
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return c;
}

}  // namespace rulex
