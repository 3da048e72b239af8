#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rulex/grammar.hpp"
#include "rulex/trace.hpp"

namespace rulex {

// LSTM with memory blocks: input/forget/output gates shared across the
// cells of a block, no peephole connections.
struct NetworkConfig {
    int n_symbols = kAlphabetSize;
    int n_blocks = 4;
    int cells_per_block = 2;
    bool skip_connections = true;  // feed the one-hot input straight to the output layer

    int hidden_size() const { return n_blocks * cells_per_block; }
    int input_size() const { return n_symbols + hidden_size(); }  // one-hot + recurrence
    int output_inputs() const {
        return hidden_size() + (skip_connections ? n_symbols : 0);
    }
    int param_count() const;

    bool operator==(const NetworkConfig&) const = default;
};

struct LstmState {
    std::vector<double> h;  // cell outputs
    std::vector<double> s;  // cell states
};

// Everything forward_step computes, for tests and for BPTT.
struct StepTrace {
    std::vector<double> z;                // [one-hot ; h_prev]
    std::vector<double> i, f, o;          // per block
    std::vector<double> g;                // per cell
    std::vector<double> s_prev, s, h;     // per cell
    std::vector<double> probs;            // next-symbol distribution
};

struct TrainHyper {
    double learning_rate = 0.1;
    int epochs = 1;
    std::uint64_t shuffle_seed = 0;
    bool continuous = false;  // truncated BPTT over flows, state carried across windows
    int bptt_window = 50;
};

struct TrainReport {
    std::vector<double> epoch_loss;  // mean cross-entropy per predicted symbol
};

struct EvalReport {
    std::size_t sequences = 0;
    std::size_t steps = 0;
    std::size_t correct_sequences = 0;  // every step of the sequence predicted correctly
    std::size_t correct_steps = 0;

    double sequence_accuracy() const {
        return sequences ? static_cast<double>(correct_sequences) / sequences : 0.0;
    }
    double step_accuracy() const {
        return steps ? static_cast<double>(correct_steps) / steps : 0.0;
    }
};

class Lstm {
public:
    Lstm(NetworkConfig cfg, std::uint64_t init_seed);

    const NetworkConfig& config() const { return cfg_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    LstmState initial_state() const;

    // Consumes one symbol, updates the state, returns the next-symbol
    // distribution. `trace`, when given, receives all intermediates.
    std::vector<double> forward_step(LstmState& state, Symbol input,
                                     StepTrace* trace = nullptr) const;

    // Summed cross-entropy of predicting seq[t+1] from seq[0..t], t < n-1.
    double sequence_loss(const Sequence& seq) const;
    std::vector<double> sequence_gradient(const Sequence& seq) const;

    // Online SGD, one update per sequence (per window for continuous data).
    // Throws std::runtime_error if the loss stops being finite.
    TrainReport train(const Corpus& corpus, const TrainHyper& hyper);

    // A step is correct when the predicted probability of the true next
    // symbol exceeds `threshold`.
    EvalReport evaluate(const Corpus& corpus, double threshold = 0.3) const;

    // Hidden activations after every consumed symbol (including the final
    // one), state reset per sequence. Labels are "<symbol><t>".
    HiddenTrace record_traces(const Corpus& corpus) const;

    void save(const std::filesystem::path& path) const;
    static Lstm load(const std::filesystem::path& path);

private:
    // BPTT over inputs [begin,end); scores step t when t+1 < syms.size().
    // Gradient does not leak past `begin`; state carries across calls.
    double bptt_span(const std::vector<Symbol>& syms, std::size_t begin, std::size_t end,
                     LstmState& state, std::vector<double>& grad, std::size_t& scored) const;

    // Parameter segment accessors (rows into the flat vector).
    const double* wi(int b) const { return &params_[off_wi_ + static_cast<std::size_t>(b) * z_]; }
    const double* wf(int b) const { return &params_[off_wf_ + static_cast<std::size_t>(b) * z_]; }
    const double* wo(int b) const { return &params_[off_wo_ + static_cast<std::size_t>(b) * z_]; }
    const double* wg(int c) const { return &params_[off_wg_ + static_cast<std::size_t>(c) * z_]; }
    const double* wy(int s) const { return &params_[off_wy_ + static_cast<std::size_t>(s) * o_]; }

    NetworkConfig cfg_;
    std::size_t z_ = 0, o_ = 0;  // input_size, output_inputs
    std::size_t off_wi_ = 0, off_bi_ = 0, off_wf_ = 0, off_bf_ = 0, off_wo_ = 0, off_bo_ = 0,
                off_wg_ = 0, off_bg_ = 0, off_wy_ = 0, off_by_ = 0;
    std::vector<double> params_;

    friend struct LstmLayout;  // test access to the segment offsets
};

// Exposes the flat parameter layout so tests can build an independent oracle.
struct LstmLayout {
    explicit LstmLayout(const Lstm& net);
    std::size_t wi, bi, wf, bf, wo, bo, wg, bg, wy, by;
};

}  // namespace rulex
