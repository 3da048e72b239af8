#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "rulex/grammar.hpp"

namespace rulex {

// Bad usage or bad configuration; the CLI maps this to exit code 1
// (runtime failures exit 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    GrammarKind grammar = GrammarKind::RG;
    std::string out_dir = "out";

    struct {
        int train = 10000;
        int test = 2000;
        int eval = 500;
        int flow_length = 100;  // symbols per CERG flow
    } corpus;

    struct {
        int n_blocks = 4;
        int cells_per_block = 2;
        bool skip_connections = true;
    } network;

    struct {
        double lr = 0.1;
        int epochs = 1;
        double fine_lr = 0.02;  // optional low-rate settle phase
        int fine_epochs = 0;
        int bptt_window = 50;
        double threshold = 0.3;
    } train;

    struct {
        int k = 100;
        int restarts = 10;
    } clustering;

    struct {
        std::vector<int> k_list = {6, 12, 25, 50, 100, 200};
        int n_sims = 10;
        int subsample = 5000;
        int workers = 0;
    } sweep;

    struct {
        std::uint64_t corpus = 1;
        std::uint64_t init = 2;
        std::uint64_t shuffle = 3;
        std::uint64_t kmeans = 4;
        std::uint64_t sweep = 5;
    } seeds;

    struct {
        bool flow_edges = true;
        std::string label_mode = "long";  // none | long | short
    } flags;

    // out_dir resolved against RULEX_OUT_ROOT when relative.
    std::filesystem::path resolved_out_dir() const;

    void validate() const;  // throws ConfigError
    std::string to_json_string() const;

    static ExperimentConfig from_json_string(const std::string& text);
    static ExperimentConfig load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

}  // namespace rulex
