#include "rulex/config.hpp"

#include <cstdlib>
#include <fstream>

#include <json.hpp>

namespace rulex {

namespace {

using nlohmann::json;

json to_json(const ExperimentConfig& c) {
    return json{
        {"grammar", to_string(c.grammar)},
        {"out_dir", c.out_dir},
        {"corpus",
         {{"train", c.corpus.train},
          {"test", c.corpus.test},
          {"eval", c.corpus.eval},
          {"flow_length", c.corpus.flow_length}}},
        {"network",
         {{"n_blocks", c.network.n_blocks},
          {"cells_per_block", c.network.cells_per_block},
          {"skip_connections", c.network.skip_connections}}},
        {"train",
         {{"lr", c.train.lr},
          {"epochs", c.train.epochs},
          {"fine_lr", c.train.fine_lr},
          {"fine_epochs", c.train.fine_epochs},
          {"bptt_window", c.train.bptt_window},
          {"threshold", c.train.threshold}}},
        {"clustering", {{"k", c.clustering.k}, {"restarts", c.clustering.restarts}}},
        {"sweep",
         {{"k_list", c.sweep.k_list},
          {"n_sims", c.sweep.n_sims},
          {"subsample", c.sweep.subsample},
          {"workers", c.sweep.workers}}},
        {"seeds",
         {{"corpus", c.seeds.corpus},
          {"init", c.seeds.init},
          {"shuffle", c.seeds.shuffle},
          {"kmeans", c.seeds.kmeans},
          {"sweep", c.seeds.sweep}}},
        {"flags", {{"flow_edges", c.flags.flow_edges}, {"label_mode", c.flags.label_mode}}},
    };
}

ExperimentConfig from_json(const json& j) {
    ExperimentConfig c;
    if (j.contains("grammar")) {
        auto kind = grammar_kind_from_string(j.at("grammar").get<std::string>());
        if (!kind) throw ConfigError("unknown grammar: " + j.at("grammar").get<std::string>());
        c.grammar = *kind;
    }
    c.out_dir = j.value("out_dir", c.out_dir);
    if (j.contains("corpus")) {
        const json& s = j.at("corpus");
        c.corpus.train = s.value("train", c.corpus.train);
        c.corpus.test = s.value("test", c.corpus.test);
        c.corpus.eval = s.value("eval", c.corpus.eval);
        c.corpus.flow_length = s.value("flow_length", c.corpus.flow_length);
    }
    if (j.contains("network")) {
        const json& s = j.at("network");
        c.network.n_blocks = s.value("n_blocks", c.network.n_blocks);
        c.network.cells_per_block = s.value("cells_per_block", c.network.cells_per_block);
        c.network.skip_connections = s.value("skip_connections", c.network.skip_connections);
    }
    if (j.contains("train")) {
        const json& s = j.at("train");
        c.train.lr = s.value("lr", c.train.lr);
        c.train.epochs = s.value("epochs", c.train.epochs);
        c.train.fine_lr = s.value("fine_lr", c.train.fine_lr);
        c.train.fine_epochs = s.value("fine_epochs", c.train.fine_epochs);
        c.train.bptt_window = s.value("bptt_window", c.train.bptt_window);
        c.train.threshold = s.value("threshold", c.train.threshold);
    }
    if (j.contains("clustering")) {
        const json& s = j.at("clustering");
        c.clustering.k = s.value("k", c.clustering.k);
        c.clustering.restarts = s.value("restarts", c.clustering.restarts);
    }
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        c.sweep.k_list = s.value("k_list", c.sweep.k_list);
        c.sweep.n_sims = s.value("n_sims", c.sweep.n_sims);
        c.sweep.subsample = s.value("subsample", c.sweep.subsample);
        c.sweep.workers = s.value("workers", c.sweep.workers);
    }
    if (j.contains("seeds")) {
        const json& s = j.at("seeds");
        c.seeds.corpus = s.value("corpus", c.seeds.corpus);
        c.seeds.init = s.value("init", c.seeds.init);
        c.seeds.shuffle = s.value("shuffle", c.seeds.shuffle);
        c.seeds.kmeans = s.value("kmeans", c.seeds.kmeans);
        c.seeds.sweep = s.value("sweep", c.seeds.sweep);
    }
    if (j.contains("flags")) {
        const json& s = j.at("flags");
        c.flags.flow_edges = s.value("flow_edges", c.flags.flow_edges);
        c.flags.label_mode = s.value("label_mode", c.flags.label_mode);
    }
    return c;
}

}  // namespace

std::filesystem::path ExperimentConfig::resolved_out_dir() const {
    std::filesystem::path p(out_dir);
    if (p.is_relative()) {
        if (const char* root = std::getenv("RULEX_OUT_ROOT")) p = std::filesystem::path(root) / p;
    }
    return p;
}

void ExperimentConfig::validate() const {
    auto positive = [](int v, const char* what) {
        if (v < 1) throw ConfigError(std::string(what) + " must be >= 1");
    };
    positive(corpus.train, "corpus.train");
    positive(corpus.test, "corpus.test");
    positive(corpus.eval, "corpus.eval");
    positive(corpus.flow_length, "corpus.flow_length");
    positive(network.n_blocks, "network.n_blocks");
    positive(network.cells_per_block, "network.cells_per_block");
    positive(train.epochs, "train.epochs");
    positive(train.bptt_window, "train.bptt_window");
    positive(clustering.restarts, "clustering.restarts");
    positive(sweep.n_sims, "sweep.n_sims");
    positive(sweep.subsample, "sweep.subsample");
    if (train.fine_epochs < 0) throw ConfigError("train.fine_epochs must be >= 0");
    if (sweep.workers < 0) throw ConfigError("sweep.workers must be >= 0");
    if (clustering.k < 2) throw ConfigError("clustering.k must be >= 2");
    if (train.lr < 0 || train.fine_lr < 0) throw ConfigError("learning rates must be >= 0");
    if (train.threshold <= 0 || train.threshold >= 1)
        throw ConfigError("train.threshold must be in (0,1)");
    if (sweep.k_list.empty()) throw ConfigError("sweep.k_list must not be empty");
    for (std::size_t i = 0; i < sweep.k_list.size(); ++i) {
        if (sweep.k_list[i] < 2) throw ConfigError("sweep.k_list entries must be >= 2");
        if (i && sweep.k_list[i] <= sweep.k_list[i - 1])
            throw ConfigError("sweep.k_list must be strictly ascending");
    }
    if (flags.label_mode != "none" && flags.label_mode != "long" && flags.label_mode != "short")
        throw ConfigError("flags.label_mode must be none|long|short");
    if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

std::string ExperimentConfig::to_json_string() const { return to_json(*this).dump(2); }

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    try {
        return from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_string(text);
}

void ExperimentConfig::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open config for writing: " + path.string());
    out << to_json_string() << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace rulex
