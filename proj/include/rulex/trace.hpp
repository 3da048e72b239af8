#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace rulex {

// Time-ordered hidden activation vectors with symbol-timestep labels
// ("list-patterns"). A label is the consumed symbol plus its position
// within the sequence, e.g. B0, T1, X2, S3.
struct HiddenTrace {
    int dim = 0;
    std::vector<std::vector<double>> patterns;
    std::vector<std::string> labels;
    std::vector<std::size_t> boundaries;  // indices where sequences begin

    std::size_t size() const { return patterns.size(); }

    // Longest prefix of whole sequences holding at most max_patterns
    // patterns. Falls back to a plain cut if the first sequence alone
    // exceeds the budget.
    HiddenTrace prefix_complete(std::size_t max_patterns) const;
};

// Binary trace file: magic, version, dimension, record count, then one
// record per consumed symbol (length-prefixed label + dim little-endian
// IEEE-754 doubles). Sequence boundaries are recovered from the labels'
// time indices.
void write_trace(const HiddenTrace& t, const std::filesystem::path& path);
HiddenTrace read_trace(const std::filesystem::path& path);

// Debug variant: CSV with columns index,label,h0..h{dim-1}.
void write_trace_csv(const HiddenTrace& t, const std::filesystem::path& path);

}  // namespace rulex
