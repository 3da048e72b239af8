#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rulex/commands.hpp"
#include "rulex/config.hpp"

namespace {

std::vector<int> parse_k_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw rulex::ConfigError("bad --k-list entry '" + item + "'");
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "rulex: train a small LSTM on Reber-family sequences, quantize its hidden states,\n"
        "and extract a minimized finite-state automaton that is then validated on fresh\n"
        "sequences. Stages communicate through files in the experiment output directory."};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON experiment config; flags override its fields");

    // every override is optional so the config file (or defaults) stay in charge
    std::optional<std::string> grammar, out_dir, label_mode;
    std::optional<int> train_n, test_n, eval_n, flow_length, epochs, fine_epochs, bptt_window;
    std::optional<int> k, restarts, n_sims, subsample, workers;
    std::optional<double> lr, fine_lr, threshold;
    std::optional<std::string> k_list;
    std::optional<std::uint64_t> seed_corpus, seed_init, seed_shuffle, seed_kmeans, seed_sweep;
    std::optional<bool> flow_edges;

    app.add_option("--grammar", grammar, "rg | erg | cerg");
    app.add_option("--out-dir", out_dir, "experiment output directory (under $RULEX_OUT_ROOT if relative)");
    app.add_option("--train", train_n, "training corpus size");
    app.add_option("--test", test_n, "test corpus size (trace source)");
    app.add_option("--eval", eval_n, "evaluation corpus size (acceptance runs)");
    app.add_option("--flow-length", flow_length, "symbols per continuous flow (cerg)");
    app.add_option("--lr", lr, "SGD learning rate");
    app.add_option("--epochs", epochs, "training epochs at --lr");
    app.add_option("--fine-lr", fine_lr, "settle-phase learning rate");
    app.add_option("--fine-epochs", fine_epochs, "settle-phase epochs (0 disables)");
    app.add_option("--bptt-window", bptt_window, "truncated BPTT window for flows");
    app.add_option("--threshold", threshold, "next-symbol probability threshold");
    app.add_option("--k", k, "cluster count for extract");
    app.add_option("--restarts", restarts, "k-means restarts");
    app.add_option("--k-list", k_list, "sweep cluster counts, comma separated (e.g. 6,12,25)");
    app.add_option("--n-sims", n_sims, "simulations per k in the sweep");
    app.add_option("--subsample", subsample, "max trace patterns used for clustering");
    app.add_option("--workers", workers, "sweep worker threads (0 = hardware)");
    app.add_option("--seed-corpus", seed_corpus, "corpus generation seed");
    app.add_option("--seed-init", seed_init, "weight initialization seed");
    app.add_option("--seed-shuffle", seed_shuffle, "training shuffle seed");
    app.add_option("--seed-kmeans", seed_kmeans, "k-means seed for extract");
    app.add_option("--seed-sweep", seed_sweep, "base seed for sweep cells");
    app.add_flag("--flow-edges,!--no-flow-edges", flow_edges,
                 "feed sequences end-to-end during construction (keeps E->B edges)");
    app.add_option("--label-mode", label_mode, "automaton DOT labels: none | long | short");

    CLI::App* sub_gen = app.add_subcommand("gen", "generate train/test/eval corpora");
    CLI::App* sub_train = app.add_subcommand("train", "train the network on the train corpus");
    CLI::App* sub_extract =
        app.add_subcommand("extract", "trace -> k-means -> automaton -> minimized DFA");
    CLI::App* sub_validate = app.add_subcommand("validate", "acceptance of the eval corpus");
    CLI::App* sub_sweep = app.add_subcommand("sweep", "silhouette/acceptance sweep over k");
    CLI::App* sub_export = app.add_subcommand("export-dot", "render an automaton/DFA JSON as DOT");

    bool resume = false;
    sub_sweep->add_flag("--resume", resume, "skip (k, seed) cells already in sweep_rows.csv");

    std::string export_input, export_output, export_mode = "long";
    sub_export->add_option("--input", export_input, "automaton.json or dfa.json")->required();
    sub_export->add_option("--output", export_output, "DOT file to write")->required();
    sub_export->add_option("--mode", export_mode, "none | long | short (extracted automata only)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage problems exit 1, --help exits 0
    }

    try {
        rulex::ExperimentConfig config;
        if (!config_path.empty()) config = rulex::ExperimentConfig::load(config_path);

        if (grammar) {
            auto kind = rulex::grammar_kind_from_string(*grammar);
            if (!kind) throw rulex::ConfigError("unknown grammar: " + *grammar);
            config.grammar = *kind;
        }
        if (out_dir) config.out_dir = *out_dir;
        if (train_n) config.corpus.train = *train_n;
        if (test_n) config.corpus.test = *test_n;
        if (eval_n) config.corpus.eval = *eval_n;
        if (flow_length) config.corpus.flow_length = *flow_length;
        if (lr) config.train.lr = *lr;
        if (epochs) config.train.epochs = *epochs;
        if (fine_lr) config.train.fine_lr = *fine_lr;
        if (fine_epochs) config.train.fine_epochs = *fine_epochs;
        if (bptt_window) config.train.bptt_window = *bptt_window;
        if (threshold) config.train.threshold = *threshold;
        if (k) config.clustering.k = *k;
        if (restarts) config.clustering.restarts = *restarts;
        if (k_list) config.sweep.k_list = parse_k_list(*k_list);
        if (n_sims) config.sweep.n_sims = *n_sims;
        if (subsample) config.sweep.subsample = *subsample;
        if (workers) config.sweep.workers = *workers;
        if (seed_corpus) config.seeds.corpus = *seed_corpus;
        if (seed_init) config.seeds.init = *seed_init;
        if (seed_shuffle) config.seeds.shuffle = *seed_shuffle;
        if (seed_kmeans) config.seeds.kmeans = *seed_kmeans;
        if (seed_sweep) config.seeds.sweep = *seed_sweep;
        if (flow_edges) config.flags.flow_edges = *flow_edges;
        if (label_mode) config.flags.label_mode = *label_mode;

        if (sub_gen->parsed()) return rulex::cmd_gen(config);
        if (sub_train->parsed()) return rulex::cmd_train(config);
        if (sub_extract->parsed()) return rulex::cmd_extract(config);
        if (sub_validate->parsed()) return rulex::cmd_validate(config);
        if (sub_sweep->parsed()) return rulex::cmd_sweep(config, resume);
        if (sub_export->parsed())
            return rulex::cmd_export_dot(config, export_input, export_output, export_mode);
        throw rulex::ConfigError("no subcommand given");
    } catch (const rulex::ConfigError& e) {
        std::cerr << "rulex: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "rulex: " << e.what() << "\n";
        return 2;
    }
}
