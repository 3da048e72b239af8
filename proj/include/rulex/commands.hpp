#pragma once

#include <filesystem>
#include <string>

#include "rulex/config.hpp"

namespace rulex {

// Artifact names inside the experiment's output directory.
namespace artifact {
inline constexpr const char* kTrainCorpus = "train.txt";
inline constexpr const char* kTestCorpus = "test.txt";
inline constexpr const char* kEvalCorpus = "eval.txt";
inline constexpr const char* kGenReport = "gen_report.json";
inline constexpr const char* kCheckpoint = "checkpoint.json";
inline constexpr const char* kTrainReport = "train_report.json";
inline constexpr const char* kTrace = "trace.bin";
inline constexpr const char* kAssignment = "assignment.csv";
inline constexpr const char* kCentroids = "centroids.txt";
inline constexpr const char* kAutomaton = "automaton.json";
inline constexpr const char* kAutomatonDot = "automaton.dot";
inline constexpr const char* kDfa = "dfa.json";
inline constexpr const char* kDfaDot = "dfa.dot";
inline constexpr const char* kExtractReport = "extract_report.json";
inline constexpr const char* kValidateReport = "validate_report.json";
inline constexpr const char* kSweepRows = "sweep_rows.csv";
inline constexpr const char* kSweepAgg = "sweep_agg.csv";
inline constexpr const char* kSweepReport = "sweep_report.json";
}  // namespace artifact

// Each command reads/writes only files under config.resolved_out_dir().
// Missing inputs raise ConfigError (exit 1); failures past validation raise
// std::runtime_error (exit 2).
int cmd_gen(const ExperimentConfig& config);
int cmd_train(const ExperimentConfig& config);
int cmd_extract(const ExperimentConfig& config);
int cmd_validate(const ExperimentConfig& config);
int cmd_sweep(const ExperimentConfig& config, bool resume);
int cmd_export_dot(const ExperimentConfig& config, const std::filesystem::path& input,
                   const std::filesystem::path& output, const std::string& label_mode);

}  // namespace rulex
