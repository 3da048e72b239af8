#include "rulex/commands.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "rulex/automaton.hpp"
#include "rulex/clustering.hpp"
#include "rulex/dfa.hpp"
#include "rulex/lstm.hpp"
#include "rulex/trace.hpp"
#include "rulex/validation.hpp"

namespace rulex {

namespace {

using nlohmann::json;

std::filesystem::path prepare_out_dir(const ExperimentConfig& config) {
    const std::filesystem::path dir = config.resolved_out_dir();
    std::filesystem::create_directories(dir);
    return dir;
}

json config_json(const ExperimentConfig& config) { return json::parse(config.to_json_string()); }

void write_json(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Corpus require_corpus(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        throw ConfigError("missing corpus file " + path.string() + " (run `rulex gen` first)");
    return read_corpus(path);
}

Lstm require_checkpoint(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        throw ConfigError("missing checkpoint " + path.string() + " (run `rulex train` first)");
    return Lstm::load(path);
}

NetworkConfig network_config(const ExperimentConfig& config) {
    NetworkConfig net;
    net.n_blocks = config.network.n_blocks;
    net.cells_per_block = config.network.cells_per_block;
    net.skip_connections = config.network.skip_connections;
    return net;
}

LabelMode parse_label_mode(const std::string& mode) {
    if (mode == "none") return LabelMode::None;
    if (mode == "long") return LabelMode::Long;
    if (mode == "short") return LabelMode::Short;
    throw ConfigError("label mode must be none|long|short, got '" + mode + "'");
}

json stats_json(const Corpus& corpus) {
    const CorpusStats st = corpus_stats(corpus);
    return json{{"count", st.count},
                {"total_symbols", st.total_symbols},
                {"mean_length", st.mean_length},
                {"stddev_length", st.stddev_length}};
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_sweep_row(std::ostream& out, const SweepRow& row) {
    out << row.k << ',' << row.seed << ',';
    if (row.error.empty()) {
        out << row.silhouette << ',' << row.pct_accepted << ',' << row.n_states_minimized << ','
            << row.wall_ms << ',';
    } else {
        out << ",,," << row.wall_ms << ',' << csv_escape(row.error);
    }
    out << '\n';
    out.flush();
}

// Pull back rows already on disk so a resumed sweep can skip and re-aggregate them.
std::vector<SweepRow> read_sweep_rows(const std::filesystem::path& path) {
    std::vector<SweepRow> rows;
    std::ifstream in(path);
    if (!in) return rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t pos = 0;
        for (int i = 0; i < 6 && pos <= line.size(); ++i) {
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) comma = line.size();
            fields.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
        }
        if (pos <= line.size()) fields.push_back(line.substr(pos));  // error column, may be quoted
        if (fields.size() < 6) continue;
        SweepRow row;
        row.sim = -1;  // not stored in the CSV
        try {
            row.k = std::stoi(fields[0]);
            row.seed = std::stoull(fields[1]);
            if (!fields[2].empty()) {
                row.silhouette = std::stod(fields[2]);
                row.pct_accepted = std::stod(fields[3]);
                row.n_states_minimized = std::stoi(fields[4]);
            }
            row.wall_ms = std::stoll(fields[5]);
        } catch (const std::exception&) {
            continue;  // tolerate a truncated trailing line from an aborted run
        }
        if (fields.size() > 6) row.error = fields[6];
        if (!fields[2].empty() || !row.error.empty()) rows.push_back(row);
    }
    return rows;
}

void write_aggregates(const std::vector<SweepAggregate>& aggs, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.precision(10);
    out << "k,sims_ok,mean_silhouette,std_silhouette,mean_pct_accepted,std_pct_accepted\n";
    for (const SweepAggregate& a : aggs)
        out << a.k << ',' << a.sims_ok << ',' << a.mean_silhouette << ',' << a.std_silhouette
            << ',' << a.mean_pct_accepted << ',' << a.std_pct_accepted << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Corpus generate_corpus(const GrammarSpec& g, int count, int flow_length, std::mt19937_64& rng) {
    Corpus corpus;
    corpus.sequences.reserve(count);
    for (int i = 0; i < count; ++i)
        corpus.sequences.push_back(g.continuous ? generate_flow(g, flow_length, rng)
                                                : generate_sequence(g, rng));
    return corpus;
}

}  // namespace

int cmd_gen(const ExperimentConfig& config) {
    config.validate();
    const auto dir = prepare_out_dir(config);
    const GrammarSpec g = build_grammar(config.grammar);
    std::mt19937_64 rng(config.seeds.corpus);

    const Corpus train = generate_corpus(g, config.corpus.train, config.corpus.flow_length, rng);
    const Corpus test = generate_corpus(g, config.corpus.test, config.corpus.flow_length, rng);
    const Corpus eval = generate_corpus(g, config.corpus.eval, config.corpus.flow_length, rng);
    write_corpus(train, dir / artifact::kTrainCorpus);
    write_corpus(test, dir / artifact::kTestCorpus);
    write_corpus(eval, dir / artifact::kEvalCorpus);

    json report{{"config", config_json(config)},
                {"stats",
                 {{"train", stats_json(train)},
                  {"test", stats_json(test)},
                  {"eval", stats_json(eval)}}}};
    write_json(report, dir / artifact::kGenReport);
    std::cout << "gen: " << to_string(config.grammar) << " corpora written to " << dir.string()
              << " (train " << train.size() << ", test " << test.size() << ", eval "
              << eval.size() << ")\n";
    return 0;
}

int cmd_train(const ExperimentConfig& config) {
    config.validate();
    const auto dir = prepare_out_dir(config);
    const Corpus train = require_corpus(dir / artifact::kTrainCorpus);
    const Corpus test = require_corpus(dir / artifact::kTestCorpus);

    Lstm net(network_config(config), config.seeds.init);
    TrainHyper hyper;
    hyper.learning_rate = config.train.lr;
    hyper.epochs = config.train.epochs;
    hyper.shuffle_seed = config.seeds.shuffle;
    hyper.continuous = config.grammar == GrammarKind::CERG;
    hyper.bptt_window = config.train.bptt_window;

    const auto t0 = std::chrono::steady_clock::now();
    TrainReport rep = net.train(train, hyper);
    if (config.train.fine_epochs > 0) {
        hyper.learning_rate = config.train.fine_lr;
        hyper.epochs = config.train.fine_epochs;
        hyper.shuffle_seed = config.seeds.shuffle + 1;
        const TrainReport fine = net.train(train, hyper);
        rep.epoch_loss.insert(rep.epoch_loss.end(), fine.epoch_loss.begin(),
                              fine.epoch_loss.end());
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    const EvalReport ev = net.evaluate(test, config.train.threshold);

    net.save(dir / artifact::kCheckpoint);
    json report{{"config", config_json(config)},
                {"epoch_loss", rep.epoch_loss},
                {"wall_ms", ms},
                {"test_accuracy",
                 {{"sequences", ev.sequences},
                  {"steps", ev.steps},
                  {"sequence_accuracy", ev.sequence_accuracy()},
                  {"step_accuracy", ev.step_accuracy()}}}};
    write_json(report, dir / artifact::kTrainReport);
    std::cout << "train: " << rep.epoch_loss.size() << " epochs in " << ms << " ms, step accuracy "
              << ev.step_accuracy() << ", checkpoint " << (dir / artifact::kCheckpoint).string()
              << "\n";
    return 0;
}

int cmd_extract(const ExperimentConfig& config) {
    config.validate();
    const auto dir = prepare_out_dir(config);
    const Lstm net = require_checkpoint(dir / artifact::kCheckpoint);
    const Corpus test = require_corpus(dir / artifact::kTestCorpus);

    const HiddenTrace full = net.record_traces(test);
    const HiddenTrace trace = full.prefix_complete(static_cast<std::size_t>(config.sweep.subsample));
    write_trace(trace, dir / artifact::kTrace);

    std::mt19937_64 rng(config.seeds.kmeans);
    KmeansOptions opts;
    opts.n_init = config.clustering.restarts;
    const ClusterAssignment ca = kmeans(trace.patterns, config.clustering.k, rng, opts);
    write_assignment_csv(ca, trace.labels, dir / artifact::kAssignment);
    write_centroids(ca, dir / artifact::kCentroids);
    const double sil = silhouette_mean(trace.patterns, ca.assignment);

    const ExtractedAutomaton a = build_automaton(trace, ca, config.flags.flow_edges);
    save_automaton(a, dir / artifact::kAutomaton);
    {
        std::ofstream out(dir / artifact::kAutomatonDot);
        out << export_dot(a, parse_label_mode(config.flags.label_mode));
    }

    const Dfa mini = minimize(determinize(short_label_view(a)));
    save_dfa(mini, dir / artifact::kDfa);
    {
        std::ofstream out(dir / artifact::kDfaDot);
        out << export_dot(mini);
    }

    json report{{"config", config_json(config)},
                {"n_patterns", trace.size()},
                {"n_sequences", trace.boundaries.size()},
                {"silhouette", sil},
                {"kmeans_inertia", ca.inertia},
                {"automaton", {{"nodes", a.nodes.size()}, {"edges", a.edges.size()}}},
                {"dfa",
                 {{"states", mini.state_count()},
                  {"states_excl_trash", mini.state_count() - (mini.trash >= 0 ? 1 : 0)},
                  {"deterministic_before_subset", is_deterministic(a)}}}};
    write_json(report, dir / artifact::kExtractReport);
    std::cout << "extract: k=" << config.clustering.k << " silhouette " << sil << ", automaton "
              << a.nodes.size() << " nodes, minimized DFA "
              << mini.state_count() - (mini.trash >= 0 ? 1 : 0) << " states (excl. trash)\n";
    return 0;
}

int cmd_validate(const ExperimentConfig& config) {
    config.validate();
    const auto dir = prepare_out_dir(config);
    if (!std::filesystem::exists(dir / artifact::kDfa))
        throw ConfigError("missing " + (dir / artifact::kDfa).string() + " (run `rulex extract` first)");
    const Dfa d = load_dfa(dir / artifact::kDfa);
    const Corpus eval = require_corpus(dir / artifact::kEvalCorpus);

    std::size_t ok = 0, end_fail = 0;
    json rejected = json::array();
    for (std::size_t i = 0; i < eval.sequences.size(); ++i) {
        const AcceptResult r = accepts(d, eval.sequences[i]);
        if (r.accepted) {
            ++ok;
            continue;
        }
        if (r.consumed == eval.sequences[i].size() && !r.end_check_passed) ++end_fail;
        if (rejected.size() < 50)
            rejected.push_back({{"index", i},
                                {"sequence", eval.sequences[i].str()},
                                {"consumed", r.consumed},
                                {"end_check_passed", r.end_check_passed}});
    }
    const double pct = 100.0 * static_cast<double>(ok) / eval.sequences.size();
    json report{{"config", config_json(config)},
                {"n_total", eval.sequences.size()},
                {"n_accepted", ok},
                {"pct_accepted", pct},
                {"n_end_check_failures", end_fail},
                {"rejected_head", rejected}};
    write_json(report, dir / artifact::kValidateReport);
    std::cout << "validate: " << pct << "% accepted (" << ok << "/" << eval.sequences.size()
              << "), " << end_fail << " end-check failures\n";
    return 0;
}

int cmd_sweep(const ExperimentConfig& config, bool resume) {
    config.validate();
    const auto dir = prepare_out_dir(config);
    const Lstm net = require_checkpoint(dir / artifact::kCheckpoint);
    const Corpus test = require_corpus(dir / artifact::kTestCorpus);
    const Corpus eval = require_corpus(dir / artifact::kEvalCorpus);

    const HiddenTrace trace = net.record_traces(test);

    SweepOptions opts;
    opts.k_list = config.sweep.k_list;
    opts.n_sims = config.sweep.n_sims;
    opts.max_patterns = static_cast<std::size_t>(config.sweep.subsample);
    opts.workers = config.sweep.workers;
    opts.base_seed = config.seeds.sweep;
    opts.flow_edges = config.flags.flow_edges;

    const std::filesystem::path rows_path = dir / artifact::kSweepRows;
    std::vector<SweepRow> previous;
    if (resume && std::filesystem::exists(rows_path)) {
        previous = read_sweep_rows(rows_path);
        for (const SweepRow& r : previous) opts.skip_cells.insert({r.k, r.seed});
    }
    std::ofstream rows_out;
    if (!previous.empty()) {
        rows_out.open(rows_path, std::ios::app);
    } else {
        rows_out.open(rows_path);
        rows_out << "k,seed,silhouette,pct_accepted,n_states_minimized,wall_ms,error\n";
    }
    if (!rows_out) throw std::runtime_error("cannot open for writing: " + rows_path.string());
    rows_out.precision(10);

    opts.on_row = [&](const SweepRow& row) {
        write_sweep_row(rows_out, row);
        std::cout << "sweep: k=" << row.k << " seed=" << row.seed;
        if (row.error.empty())
            std::cout << " silhouette=" << row.silhouette << " accepted=" << row.pct_accepted
                      << "%";
        else
            std::cout << " ERROR: " << row.error;
        std::cout << " (" << row.wall_ms << " ms)" << std::endl;
    };

    SweepReport report = sweep_k(trace, eval, opts);
    std::vector<SweepRow> all = previous;
    all.insert(all.end(), report.rows.begin(), report.rows.end());
    const auto aggs = aggregate_rows(all);
    write_aggregates(aggs, dir / artifact::kSweepAgg);

    json jaggs = json::array();
    for (const SweepAggregate& a : aggs)
        jaggs.push_back({{"k", a.k},
                         {"sims_ok", a.sims_ok},
                         {"mean_silhouette", a.mean_silhouette},
                         {"std_silhouette", a.std_silhouette},
                         {"mean_pct_accepted", a.mean_pct_accepted},
                         {"std_pct_accepted", a.std_pct_accepted}});
    json sidecar{{"config", config_json(config)},
                 {"n_rows_total", all.size()},
                 {"n_rows_new", report.rows.size()},
                 {"resumed", !previous.empty()},
                 {"aggregates", jaggs}};
    write_json(sidecar, dir / artifact::kSweepReport);
    std::cout << "sweep: " << report.rows.size() << " new cells, aggregates in "
              << (dir / artifact::kSweepAgg).string() << "\n";
    return 0;
}

int cmd_export_dot(const ExperimentConfig& config, const std::filesystem::path& input,
                   const std::filesystem::path& output, const std::string& label_mode) {
    config.validate();
    if (!std::filesystem::exists(input)) throw ConfigError("no such file: " + input.string());
    std::ifstream in(input);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + input.string() + ": " + e.what());
    }
    const std::string format = j.value("format", "");
    std::string dot;
    if (format == "rulex-automaton") {
        dot = export_dot(load_automaton(input), parse_label_mode(label_mode));
    } else if (format == "rulex-dfa") {
        dot = export_dot(load_dfa(input));
    } else {
        throw ConfigError("unrecognized automaton file format in " + input.string());
    }
    std::ofstream out(output);
    if (!out) throw std::runtime_error("cannot open for writing: " + output.string());
    out << dot;
    if (!out) throw std::runtime_error("write failed: " + output.string());
    std::cout << "export-dot: wrote " << output.string() << "\n";
    return 0;
}

}  // namespace rulex
