#include <doctest.h>

#include <algorithm>
#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "rulex/dfa.hpp"

using namespace rulex;
using namespace rulex::testing;

namespace {

ExtractedAutomaton fig_automaton(bool flow) {
    return build_automaton({0, 3, 2, 2, 0}, {"B0", "T1", "X2", "S3", "E4"}, {0}, flow);
}

int index_of(const Dfa& d, const std::string& name) {
    const auto it = std::find(d.names.begin(), d.names.end(), name);
    REQUIRE(it != d.names.end());
    return static_cast<int>(it - d.names.begin());
}

// 3-symbol complete DFA shorthand
Dfa small_dfa(std::vector<std::vector<int>> next, std::vector<char> accepting) {
    Dfa d;
    d.n_symbols = 3;
    d.next = std::move(next);
    d.accepting = std::move(accepting);
    for (std::size_t s = 0; s < d.next.size(); ++s) d.names.push_back(std::to_string(s));
    d.start = 0;
    d.trash = -1;
    d.flow_end_check = false;
    return d;
}

}  // namespace

TEST_SUITE_BEGIN("dfa");

TEST_CASE("subset construction of the worked example") {
    const Dfa d = determinize(fig_automaton(false));

    REQUIRE(d.state_count() == 5);  // -1, 0, 3, 2 and the trash sink
    CHECK(d.names[static_cast<std::size_t>(d.start)] == "-1");
    REQUIRE(d.trash >= 0);
    CHECK(d.names[static_cast<std::size_t>(d.trash)] == "-2");
    CHECK(!d.flow_end_check);

    const int s0 = index_of(d, "0"), s3 = index_of(d, "3"), s2 = index_of(d, "2");
    CHECK(dfa_step(d, d.start, Symbol::B) == s0);
    CHECK(dfa_step(d, s0, Symbol::T) == s3);
    CHECK(dfa_step(d, s3, Symbol::X) == s2);
    CHECK(dfa_step(d, s2, Symbol::S) == s2);
    CHECK(dfa_step(d, s2, Symbol::E) == s0);
    CHECK(dfa_step(d, d.start, Symbol::V) == d.trash);
    CHECK(dfa_step(d, d.trash, Symbol::B) == d.trash);

    for (int s = 0; s < d.state_count(); ++s) CHECK(d.is_accepting(s) == (s == s2));
    CHECK(determinize(fig_automaton(true)).flow_end_check);
}

TEST_CASE("nondeterministic fanout becomes a descending-joined subset") {
    ExtractedAutomaton a;
    a.nodes = {kStartNode, 1, 2};
    a.edges[{kStartNode, 1}].short_label = {Symbol::T};
    a.edges[{kStartNode, 2}].short_label = {Symbol::T};
    a.flow_edges = false;

    const Dfa d = determinize(a);
    CHECK(dfa_step(d, d.start, Symbol::T) == index_of(d, "2_1"));
}

TEST_CASE("the subset cap aborts runaway constructions") {
    CHECK_THROWS_AS(determinize(fig_automaton(false), 2), std::runtime_error);
}

TEST_CASE("merge naming sorts numeric components descending, prefixes first") {
    CHECK(merge_name_less("9", "9_1"));
    CHECK(!merge_name_less("9_1", "9"));
    CHECK(merge_name_less("9_1", "6"));
    CHECK(!merge_name_less("6", "9"));
    CHECK(merge_name_less("10", "9"));
    CHECK(merge_name_less("5", "-1"));
    CHECK(!merge_name_less("-1", "5"));
    CHECK(!merge_name_less("7", "7"));

    std::vector<std::string> names = {"6", "9_1", "9"};
    std::sort(names.begin(), names.end(), merge_name_less);
    CHECK(names == std::vector<std::string>{"9", "9_1", "6"});
}

TEST_CASE("equivalent states merge under their joined name") {
    // 1 and 2 are both accept-everything sinks
    const Dfa d = small_dfa({{1, 2, 0}, {1, 1, 1}, {2, 2, 2}}, {0, 1, 1});
    const Dfa m = minimize(d);

    REQUIRE(m.state_count() == 2);
    CHECK(m.names[static_cast<std::size_t>(dfa_step(m, m.start, Symbol::B))] == "2_1");
    CHECK(dfa_mismatch(d, m, 3, 8) == std::nullopt);
    CHECK(minimal_state_count(d) == 2);
}

TEST_CASE("minimization drops unreachable states") {
    // state 3 is never entered
    const Dfa d = small_dfa({{1, 0, 0}, {1, 1, 1}, {3, 3, 3}, {1, 0, 2}}, {0, 1, 1, 0});
    const Dfa m = minimize(d);
    CHECK(m.state_count() == 2);
    CHECK(dfa_mismatch(d, m, 3, 8) == std::nullopt);
}

TEST_CASE("minimization requires a complete transition table") {
    Dfa d = small_dfa({{1, 0, 0}, {1, 1, 1}}, {0, 1});
    d.next[0][1] = -1;
    CHECK_THROWS_AS(minimize(d), std::invalid_argument);
    d.next[0][1] = 5;
    CHECK_THROWS_AS(minimize(d), std::invalid_argument);
}

TEST_CASE("trash survives minimization as the dead-state class") {
    const GrammarSpec rg = build_grammar(GrammarKind::RG);
    Corpus corpus;
    corpus.sequences.push_back(Sequence::parse("BTXSE"));
    corpus.sequences.push_back(Sequence::parse("BPVVE"));
    const Dfa d = determinize(build_oracle_automaton(rg, corpus, false));
    const Dfa m = minimize(d);

    REQUIRE(m.trash >= 0);
    CHECK(!m.is_accepting(m.trash));
    // the post-E grammar state is dead in the cut view, so it joins the sink
    CHECK(m.names[static_cast<std::size_t>(m.trash)].find("-2") != std::string::npos);
    CHECK(m.names[static_cast<std::size_t>(m.trash)].find("7") != std::string::npos);
    for (int x = 0; x < m.n_symbols; ++x) CHECK(m.next[static_cast<std::size_t>(m.trash)][static_cast<std::size_t>(x)] == m.trash);
}

TEST_CASE("random complete DFAs: minimize is exact, minimal and idempotent") {
    std::mt19937_64 rng(2024);
    for (int round = 0; round < 25; ++round) {
        const Dfa d = random_complete_dfa(rng, 8, 3);
        const Dfa m = minimize(d);

        const auto mismatch = dfa_mismatch(d, m, 3, 8);
        CHECK_MESSAGE(mismatch == std::nullopt, "round ", round, " diverged on \"",
                      mismatch.value_or(""), "\"");
        CHECK(m.state_count() == minimal_state_count(d));
        CHECK(dfa_isomorphic(minimize(m), m));
    }
}

TEST_CASE("random NFAs: subset construction preserves the language") {
    std::mt19937_64 rng(7777);
    for (int round = 0; round < 25; ++round) {
        const ExtractedAutomaton nfa = random_nfa(rng, 6, 3);
        const Dfa d = determinize(nfa);
        const auto mismatch = nfa_dfa_mismatch(nfa, d, 3, 8);
        CHECK_MESSAGE(mismatch == std::nullopt, "round ", round, " diverged on \"",
                      mismatch.value_or(""), "\"");
        // and minimizing afterwards changes nothing about the language
        CHECK(dfa_mismatch(d, minimize(d), 3, 8) == std::nullopt);
    }
}

TEST_CASE("DOT export hides the sink unless asked") {
    const Dfa m = minimize(determinize(fig_automaton(false)));
    const std::string plain = export_dot(m);
    CHECK(plain.find("digraph") != std::string::npos);
    CHECK(plain.find("__start") != std::string::npos);
    CHECK(plain.find("-2") == std::string::npos);

    const std::string full = export_dot(m, true);
    CHECK(full.find("-2") != std::string::npos);
}

TEST_CASE("JSON round-trip preserves the DFA") {
    TempDir dir;
    const auto path = dir.path() / "dfa.json";
    const Dfa d = minimize(determinize(fig_automaton(true)));
    save_dfa(d, path);
    const Dfa back = load_dfa(path);

    CHECK(back.n_symbols == d.n_symbols);
    CHECK(back.names == d.names);
    CHECK(back.next == d.next);
    CHECK(back.accepting == d.accepting);
    CHECK(back.start == d.start);
    CHECK(back.trash == d.trash);
    CHECK(back.flow_end_check == d.flow_end_check);

    CHECK_THROWS(load_dfa(dir.path() / "missing.json"));
}

TEST_SUITE_END();
