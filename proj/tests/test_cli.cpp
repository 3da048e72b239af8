#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "oracles.hpp"
#include "rulex/lstm.hpp"

using rulex::testing::TempDir;

namespace {

int run(const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::size_t data_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') ++n;
    return n;
}

// shared small-experiment flags: tiny corpora, one epoch, modest clustering
std::string base_cmd(const std::filesystem::path& out) {
    return std::string(RULEX_BIN) + " --out-dir " + out.string() +
           " --train 50 --test 20 --eval 10 --epochs 1 --k 6 --restarts 2 --subsample 400";
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("usage errors exit 1, help exits 0") {
    CHECK(run(std::string(RULEX_BIN) + " --help") == 0);
    CHECK(run(std::string(RULEX_BIN) + " gen --help") == 0);
    CHECK(run(std::string(RULEX_BIN)) == 1);                       // a subcommand is required
    CHECK(run(std::string(RULEX_BIN) + " gen --bogus-flag") == 1);
    CHECK(run(std::string(RULEX_BIN) + " frobnicate") == 1);
    CHECK(run(std::string(RULEX_BIN) + " gen --train 0") == 1);    // rejected by validation
}

TEST_CASE("gen writes the corpora deterministically") {
    TempDir a, b;
    REQUIRE(run(base_cmd(a.path() / "x") + " gen") == 0);
    REQUIRE(run(base_cmd(b.path() / "y") + " gen") == 0);

    for (const char* name : {"train.txt", "test.txt", "eval.txt", "gen_report.json"})
        CHECK(std::filesystem::exists(a.path() / "x" / name));
    CHECK(data_lines(a.path() / "x" / "train.txt") == 50);
    CHECK(data_lines(a.path() / "x" / "test.txt") == 20);
    CHECK(data_lines(a.path() / "x" / "eval.txt") == 10);
    CHECK(slurp(a.path() / "x" / "train.txt") == slurp(b.path() / "y" / "train.txt"));

    // a different corpus seed moves the data
    TempDir c;
    REQUIRE(run(base_cmd(c.path() / "z") + " --seed-corpus 77 gen") == 0);
    CHECK(slurp(a.path() / "x" / "train.txt") != slurp(c.path() / "z" / "train.txt"));

    const auto report = nlohmann::json::parse(slurp(a.path() / "x" / "gen_report.json"));
    CHECK(report.at("config").at("corpus").at("train") == 50);
    CHECK(report.at("stats").at("train").at("count") == 50);
}

TEST_CASE("train refuses to run before gen, then honors a zero learning rate") {
    TempDir dir;
    const auto out = dir.path() / "exp";
    CHECK(run(base_cmd(out) + " train") == 1);  // no corpora yet

    REQUIRE(run(base_cmd(out) + " gen") == 0);
    REQUIRE(run(base_cmd(out) + " --lr 0 train") == 0);
    REQUIRE(std::filesystem::exists(out / "checkpoint.json"));
    REQUIRE(std::filesystem::exists(out / "train_report.json"));

    // SGD at lr 0 must leave the freshly initialized weights in place
    const rulex::Lstm net = rulex::Lstm::load(out / "checkpoint.json");
    const rulex::Lstm fresh(rulex::NetworkConfig{}, 2);  // default init seed
    CHECK(net.params() == fresh.params());

    const auto report = nlohmann::json::parse(slurp(out / "train_report.json"));
    CHECK(report.at("epoch_loss").size() == 1);
    CHECK(report.at("test_accuracy").at("step_accuracy").is_number());
}

TEST_CASE("extract and validate produce their artifacts reproducibly") {
    TempDir dir;
    const auto out = dir.path() / "exp";
    REQUIRE(run(base_cmd(out) + " gen") == 0);
    REQUIRE(run(base_cmd(out) + " train") == 0);

    CHECK(run(base_cmd(out) + " validate") == 1);  // dfa.json not written yet
    REQUIRE(run(base_cmd(out) + " extract") == 0);
    for (const char* name : {"trace.bin", "assignment.csv", "centroids.txt", "automaton.json",
                             "automaton.dot", "dfa.json", "dfa.dot", "extract_report.json"})
        CHECK(std::filesystem::exists(out / name));

    const std::string automaton_first = slurp(out / "automaton.json");
    REQUIRE(run(base_cmd(out) + " extract") == 0);
    CHECK(slurp(out / "automaton.json") == automaton_first);

    REQUIRE(run(base_cmd(out) + " validate") == 0);
    const auto report = nlohmann::json::parse(slurp(out / "validate_report.json"));
    CHECK(report.at("pct_accepted").is_number());
    CHECK(report.at("config").at("clustering").at("k") == 6);

    // a mangled DFA file is a runtime failure, not a usage error
    {
        std::ofstream corrupt(out / "dfa.json");
        corrupt << "{\"format\":\"rulex-dfa\",\"version\":1,\"names\":42}";
    }
    CHECK(run(base_cmd(out) + " validate") == 2);
}

TEST_CASE("sweep writes resumable rows") {
    TempDir dir;
    const auto out = dir.path() / "exp";
    const std::string sweep_flags = " --k-list 4,6 --n-sims 2 --workers 2";
    REQUIRE(run(base_cmd(out) + " gen") == 0);
    REQUIRE(run(base_cmd(out) + " train") == 0);
    REQUIRE(run(base_cmd(out) + sweep_flags + " sweep") == 0);

    REQUIRE(std::filesystem::exists(out / "sweep_rows.csv"));
    REQUIRE(std::filesystem::exists(out / "sweep_agg.csv"));
    REQUIRE(std::filesystem::exists(out / "sweep_report.json"));
    CHECK(data_lines(out / "sweep_rows.csv") == 1 + 4);  // header + 2 k x 2 sims

    // nothing left to do: resume adds no rows
    const std::string before = slurp(out / "sweep_rows.csv");
    REQUIRE(run(base_cmd(out) + sweep_flags + " sweep --resume") == 0);
    CHECK(slurp(out / "sweep_rows.csv") == before);

    // a wider resumed sweep keeps the finished cells and adds the new k
    REQUIRE(run(base_cmd(out) + " --k-list 4,6,8 --n-sims 2 --workers 2 sweep --resume") == 0);
    CHECK(data_lines(out / "sweep_rows.csv") == 1 + 6);
    const auto report = nlohmann::json::parse(slurp(out / "sweep_report.json"));
    CHECK(report.at("resumed") == true);
    CHECK(report.at("aggregates").size() == 3);
}

TEST_CASE("export-dot renders both artifact kinds") {
    TempDir dir;
    const auto out = dir.path() / "exp";
    REQUIRE(run(base_cmd(out) + " gen") == 0);
    REQUIRE(run(base_cmd(out) + " train") == 0);
    REQUIRE(run(base_cmd(out) + " extract") == 0);

    const auto a_dot = out / "a.dot";
    const auto d_dot = out / "d.dot";
    REQUIRE(run(std::string(RULEX_BIN) + " export-dot --input " + (out / "automaton.json").string() +
                " --output " + a_dot.string() + " --mode short") == 0);
    REQUIRE(run(std::string(RULEX_BIN) + " export-dot --input " + (out / "dfa.json").string() +
                " --output " + d_dot.string()) == 0);
    CHECK(slurp(a_dot).find("digraph") != std::string::npos);
    CHECK(slurp(d_dot).find("digraph") != std::string::npos);
    // a file that is not a rulex artifact is a usage error, not a crash
    CHECK(run(std::string(RULEX_BIN) + " export-dot --input " + (out / "train.txt").string() +
              " --output " + (out / "t.dot").string()) == 1);
}

TEST_CASE("relative output directories resolve against RULEX_OUT_ROOT") {
    TempDir dir;
    const std::string cmd = "RULEX_OUT_ROOT=" + dir.path().string() + " " + std::string(RULEX_BIN) +
                            " --out-dir nested/exp --train 10 --test 5 --eval 5 gen";
    REQUIRE(run(cmd) == 0);
    CHECK(std::filesystem::exists(dir.path() / "nested" / "exp" / "train.txt"));
}

TEST_SUITE_END();
