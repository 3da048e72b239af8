#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace rulex {

// The seven-symbol alphabet shared by all Reber-family grammars.
enum class Symbol : std::uint8_t { B, T, P, S, X, V, E };

inline constexpr int kAlphabetSize = 7;

char to_char(Symbol s);
std::optional<Symbol> symbol_from_char(char c);

constexpr int symbol_index(Symbol s) { return static_cast<int>(s); }
constexpr Symbol symbol_at(int i) { return static_cast<Symbol>(i); }

// A sequence of symbols plus its provenance (generated as valid or not).
struct Sequence {
    std::vector<Symbol> symbols;
    bool valid = true;

    std::size_t size() const { return symbols.size(); }
    bool empty() const { return symbols.empty(); }
    std::string str() const;

    // Throws std::runtime_error on characters outside the alphabet.
    static Sequence parse(std::string_view text, bool valid = true);

    bool operator==(const Sequence& other) const { return symbols == other.symbols; }
};

enum class GrammarKind { RG, ERG, CERG };

const char* to_string(GrammarKind k);
std::optional<GrammarKind> grammar_kind_from_string(std::string_view name);

// One outgoing arc of an emitting state machine.
struct Emission {
    Symbol symbol;
    int next_state;
};

// A symbol-emitting finite-state machine. Walking from start_state to
// end_state emits one valid sequence. For continuous grammars (CERG) the
// end state silently wraps back to the start, producing unbounded flows.
struct GrammarSpec {
    GrammarKind kind = GrammarKind::RG;
    int start_state = 0;
    int end_state = 0;
    bool continuous = false;
    std::vector<std::vector<Emission>> emissions;  // indexed by state id

    int state_count() const { return static_cast<int>(emissions.size()); }
};

GrammarSpec build_grammar(GrammarKind kind);

// Uniform random walk from start to end state. RG/ERG only.
Sequence generate_sequence(const GrammarSpec& g, std::mt19937_64& rng);

// Valid sequences put end to end, truncated to exactly `length` symbols.
// Requires a continuous grammar (CERG) and length >= 1.
Sequence generate_flow(const GrammarSpec& g, std::size_t length, std::mt19937_64& rng);

// Mutates a valid sequence (substitute / insert / delete, never touching the
// leading B) and rejection-samples until the membership oracle rejects.
Sequence generate_invalid(const GrammarSpec& g, std::mt19937_64& rng);

// Membership oracle: true iff s is a complete emission path from start to
// end state (for continuous grammars: any truncation of a valid flow).
// All branch pairs of the Reber machines are symbol-distinct, so a
// deterministic walk suffices; no backtracking is ever needed.
bool is_grammatical(const GrammarSpec& g, const Sequence& s);

// State reached after each consumed symbol, or nullopt if the walk fails.
std::optional<std::vector<int>> grammar_state_path(const GrammarSpec& g, const Sequence& s);

struct Corpus {
    std::vector<Sequence> sequences;

    std::size_t size() const { return sequences.size(); }
};

struct CorpusStats {
    std::size_t count = 0;
    std::size_t total_symbols = 0;
    double mean_length = 0.0;
    double stddev_length = 0.0;  // population standard deviation
};

// Throws std::invalid_argument on an empty corpus.
CorpusStats corpus_stats(const Corpus& c);

// Corpus files are UTF-8 text, one sequence per line, no separators.
// Lines starting with '#' are comments.
void write_corpus(const Corpus& c, const std::filesystem::path& path);
Corpus read_corpus(const std::filesystem::path& path, bool valid = true);

}  // namespace rulex
