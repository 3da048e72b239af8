#include "rulex/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace rulex {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> softmax(const std::vector<double>& logits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

}  // namespace

int NetworkConfig::param_count() const {
    const int z = input_size();
    const int h = hidden_size();
    const int o = output_inputs();
    return 3 * (n_blocks * z + n_blocks)   // gate weights + biases
           + h * z + h                     // cell input
           + n_symbols * o + n_symbols;    // output layer
}

Lstm::Lstm(NetworkConfig cfg, std::uint64_t init_seed) : cfg_(cfg) {
    if (cfg_.n_symbols < 2 || cfg_.n_blocks < 1 || cfg_.cells_per_block < 1)
        throw std::invalid_argument("lstm: degenerate network configuration");
    z_ = static_cast<std::size_t>(cfg_.input_size());
    o_ = static_cast<std::size_t>(cfg_.output_inputs());
    const std::size_t nb = static_cast<std::size_t>(cfg_.n_blocks);
    const std::size_t h = static_cast<std::size_t>(cfg_.hidden_size());
    const std::size_t ns = static_cast<std::size_t>(cfg_.n_symbols);

    off_wi_ = 0;
    off_bi_ = off_wi_ + nb * z_;
    off_wf_ = off_bi_ + nb;
    off_bf_ = off_wf_ + nb * z_;
    off_wo_ = off_bf_ + nb;
    off_bo_ = off_wo_ + nb * z_;
    off_wg_ = off_bo_ + nb;
    off_bg_ = off_wg_ + h * z_;
    off_wy_ = off_bg_ + h;
    off_by_ = off_wy_ + ns * o_;
    params_.assign(off_by_ + ns, 0.0);

    // Weights uniform in [-0.1, 0.1]; forget biases start at 1 so memory is
    // kept by default, all other biases at 0.
    std::mt19937_64 rng(init_seed);
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    auto fill = [&](std::size_t off, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) params_[off + i] = dist(rng);
    };
    fill(off_wi_, nb * z_);
    fill(off_wf_, nb * z_);
    fill(off_wo_, nb * z_);
    fill(off_wg_, h * z_);
    fill(off_wy_, ns * o_);
    std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(off_bf_), nb, 1.0);
}

LstmState Lstm::initial_state() const {
    const std::size_t h = static_cast<std::size_t>(cfg_.hidden_size());
    return LstmState{std::vector<double>(h, 0.0), std::vector<double>(h, 0.0)};
}

std::vector<double> Lstm::forward_step(LstmState& state, Symbol input, StepTrace* trace) const {
    const int nb = cfg_.n_blocks;
    const int cpb = cfg_.cells_per_block;
    const int hs = cfg_.hidden_size();
    const int ns = cfg_.n_symbols;

    std::vector<double> z(z_, 0.0);
    z[symbol_index(input)] = 1.0;
    std::copy(state.h.begin(), state.h.end(), z.begin() + ns);

    std::vector<double> gi(nb), gf(nb), go(nb), g(hs);
    std::vector<double> s_new(hs), h_new(hs);
    for (int b = 0; b < nb; ++b) {
        double ai = params_[off_bi_ + b], af = params_[off_bf_ + b], ao = params_[off_bo_ + b];
        const double *rwi = wi(b), *rwf = wf(b), *rwo = wo(b);
        for (std::size_t j = 0; j < z_; ++j) {
            ai += rwi[j] * z[j];
            af += rwf[j] * z[j];
            ao += rwo[j] * z[j];
        }
        gi[b] = sigmoid(ai);
        gf[b] = sigmoid(af);
        go[b] = sigmoid(ao);
        for (int k = 0; k < cpb; ++k) {
            const int c = b * cpb + k;
            double ag = params_[off_bg_ + c];
            const double* rwg = wg(c);
            for (std::size_t j = 0; j < z_; ++j) ag += rwg[j] * z[j];
            g[c] = std::tanh(ag);
            s_new[c] = gf[b] * state.s[c] + gi[b] * g[c];
            h_new[c] = go[b] * std::tanh(s_new[c]);
        }
    }

    std::vector<double> logits(ns);
    for (int sy = 0; sy < ns; ++sy) {
        double a = params_[off_by_ + sy];
        const double* row = wy(sy);
        for (int j = 0; j < hs; ++j) a += row[j] * h_new[j];
        if (cfg_.skip_connections) a += row[hs + symbol_index(input)];
        logits[sy] = a;
    }
    std::vector<double> probs = softmax(logits);

    if (trace) {
        trace->z = z;
        trace->i = gi;
        trace->f = gf;
        trace->o = go;
        trace->g = g;
        trace->s_prev = state.s;
        trace->s = s_new;
        trace->h = h_new;
        trace->probs = probs;
    }
    state.s = std::move(s_new);
    state.h = std::move(h_new);
    return probs;
}

double Lstm::sequence_loss(const Sequence& seq) const {
    if (seq.size() < 2) return 0.0;
    LstmState state = initial_state();
    double loss = 0.0;
    for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
        std::vector<double> p = forward_step(state, seq.symbols[t]);
        loss -= std::log(p[symbol_index(seq.symbols[t + 1])]);
    }
    return loss;
}

double Lstm::bptt_span(const std::vector<Symbol>& syms, std::size_t begin, std::size_t end,
                       LstmState& state, std::vector<double>& grad, std::size_t& scored) const {
    const int nb = cfg_.n_blocks;
    const int cpb = cfg_.cells_per_block;
    const int hs = cfg_.hidden_size();
    const int ns = cfg_.n_symbols;

    const std::size_t steps = end - begin;
    std::vector<StepTrace> cache(steps);
    double loss = 0.0;
    for (std::size_t t = begin; t < end; ++t) {
        forward_step(state, syms[t], &cache[t - begin]);
        if (t + 1 < syms.size()) {
            loss -= std::log(cache[t - begin].probs[symbol_index(syms[t + 1])]);
            ++scored;
        }
    }

    std::vector<double> dh(hs, 0.0), ds(hs, 0.0);
    std::vector<double> da_i(nb), da_f(nb), da_o(nb), da_g(hs), dz(z_);
    for (std::size_t rt = steps; rt-- > 0;) {
        const std::size_t t = begin + rt;
        const StepTrace& st = cache[rt];

        if (t + 1 < syms.size()) {
            const int target = symbol_index(syms[t + 1]);
            for (int sy = 0; sy < ns; ++sy) {
                const double dl = st.probs[sy] - (sy == target ? 1.0 : 0.0);
                const double* row = wy(sy);
                double* grow = &grad[off_wy_ + static_cast<std::size_t>(sy) * o_];
                for (int j = 0; j < hs; ++j) {
                    grow[j] += dl * st.h[j];
                    dh[j] += row[j] * dl;
                }
                if (cfg_.skip_connections) grow[hs + symbol_index(syms[t])] += dl;
                grad[off_by_ + sy] += dl;
            }
        }

        for (int b = 0; b < nb; ++b) {
            double dia = 0.0, dfa = 0.0, doa = 0.0;
            for (int k = 0; k < cpb; ++k) {
                const int c = b * cpb + k;
                const double ts = std::tanh(st.s[c]);
                doa += dh[c] * ts;
                const double dsc = dh[c] * st.o[b] * (1.0 - ts * ts) + ds[c];
                da_g[c] = dsc * st.i[b] * (1.0 - st.g[c] * st.g[c]);
                dia += dsc * st.g[c];
                dfa += dsc * st.s_prev[c];
                ds[c] = dsc * st.f[b];  // flows to step t-1
            }
            da_i[b] = dia * st.i[b] * (1.0 - st.i[b]);
            da_f[b] = dfa * st.f[b] * (1.0 - st.f[b]);
            da_o[b] = doa * st.o[b] * (1.0 - st.o[b]);
        }

        std::fill(dz.begin(), dz.end(), 0.0);
        for (int b = 0; b < nb; ++b) {
            const double *rwi = wi(b), *rwf = wf(b), *rwo = wo(b);
            double* gwi = &grad[off_wi_ + static_cast<std::size_t>(b) * z_];
            double* gwf = &grad[off_wf_ + static_cast<std::size_t>(b) * z_];
            double* gwo = &grad[off_wo_ + static_cast<std::size_t>(b) * z_];
            for (std::size_t j = 0; j < z_; ++j) {
                dz[j] += rwi[j] * da_i[b] + rwf[j] * da_f[b] + rwo[j] * da_o[b];
                gwi[j] += da_i[b] * st.z[j];
                gwf[j] += da_f[b] * st.z[j];
                gwo[j] += da_o[b] * st.z[j];
            }
            grad[off_bi_ + b] += da_i[b];
            grad[off_bf_ + b] += da_f[b];
            grad[off_bo_ + b] += da_o[b];
        }
        for (int c = 0; c < hs; ++c) {
            const double* rwg = wg(c);
            double* gwg = &grad[off_wg_ + static_cast<std::size_t>(c) * z_];
            for (std::size_t j = 0; j < z_; ++j) {
                dz[j] += rwg[j] * da_g[c];
                gwg[j] += da_g[c] * st.z[j];
            }
            grad[off_bg_ + c] += da_g[c];
        }

        for (int j = 0; j < hs; ++j) dh[j] = dz[ns + j];
    }
    return loss;
}

std::vector<double> Lstm::sequence_gradient(const Sequence& seq) const {
    std::vector<double> grad(params_.size(), 0.0);
    if (seq.size() < 2) return grad;
    LstmState state = initial_state();
    std::size_t scored = 0;
    bptt_span(seq.symbols, 0, seq.size() - 1, state, grad, scored);
    return grad;
}

TrainReport Lstm::train(const Corpus& corpus, const TrainHyper& hyper) {
    if (corpus.sequences.empty()) throw std::invalid_argument("train: empty corpus");
    if (hyper.continuous && hyper.bptt_window < 1)
        throw std::invalid_argument("train: bptt_window must be positive");

    TrainReport report;
    std::mt19937_64 rng(hyper.shuffle_seed);
    std::vector<std::size_t> order(corpus.sequences.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad(params_.size());

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t epoch_scored = 0;
        for (std::size_t idx : order) {
            const std::vector<Symbol>& syms = corpus.sequences[idx].symbols;
            if (syms.size() < 2) continue;
            LstmState state = initial_state();
            const std::size_t last_input = syms.size() - 1;  // final symbol has no target
            const std::size_t window =
                hyper.continuous ? static_cast<std::size_t>(hyper.bptt_window) : last_input;
            for (std::size_t a = 0; a < last_input; a += window) {
                const std::size_t b = std::min(a + window, last_input);
                std::fill(grad.begin(), grad.end(), 0.0);
                std::size_t scored = 0;
                const double loss = bptt_span(syms, a, b, state, grad, scored);
                if (!std::isfinite(loss))
                    throw std::runtime_error("train: loss diverged (non-finite)");
                epoch_loss += loss;
                epoch_scored += scored;
                for (std::size_t p = 0; p < params_.size(); ++p)
                    params_[p] -= hyper.learning_rate * grad[p];
            }
        }
        report.epoch_loss.push_back(epoch_scored ? epoch_loss / epoch_scored : 0.0);
    }
    return report;
}

EvalReport Lstm::evaluate(const Corpus& corpus, double threshold) const {
    EvalReport rep;
    for (const Sequence& seq : corpus.sequences) {
        if (seq.size() < 2) continue;
        ++rep.sequences;
        LstmState state = initial_state();
        bool all_ok = true;
        for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
            std::vector<double> p = forward_step(state, seq.symbols[t]);
            ++rep.steps;
            if (p[symbol_index(seq.symbols[t + 1])] > threshold)
                ++rep.correct_steps;
            else
                all_ok = false;
        }
        if (all_ok) ++rep.correct_sequences;
    }
    return rep;
}

HiddenTrace Lstm::record_traces(const Corpus& corpus) const {
    HiddenTrace trace;
    trace.dim = cfg_.hidden_size();
    for (const Sequence& seq : corpus.sequences) {
        if (seq.empty()) continue;
        trace.boundaries.push_back(trace.patterns.size());
        LstmState state = initial_state();
        for (std::size_t t = 0; t < seq.size(); ++t) {
            forward_step(state, seq.symbols[t]);
            trace.patterns.push_back(state.h);
            trace.labels.push_back(std::string(1, to_char(seq.symbols[t])) + std::to_string(t));
        }
    }
    return trace;
}

void Lstm::save(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["format"] = "rulex-lstm";
    j["version"] = 1;
    j["config"] = {{"n_symbols", cfg_.n_symbols},
                   {"n_blocks", cfg_.n_blocks},
                   {"cells_per_block", cfg_.cells_per_block},
                   {"skip_connections", cfg_.skip_connections}};
    j["params"] = params_;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Lstm Lstm::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("bad checkpoint " + path.string() + ": " + e.what());
    }
    if (j.value("format", "") != "rulex-lstm" || j.value("version", 0) != 1)
        throw std::runtime_error("unrecognized checkpoint format: " + path.string());
    NetworkConfig cfg;
    const auto& jc = j.at("config");
    cfg.n_symbols = jc.at("n_symbols").get<int>();
    cfg.n_blocks = jc.at("n_blocks").get<int>();
    cfg.cells_per_block = jc.at("cells_per_block").get<int>();
    cfg.skip_connections = jc.at("skip_connections").get<bool>();
    Lstm net(cfg, 0);
    auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != net.params_.size())
        throw std::runtime_error("checkpoint parameter count mismatch: " + path.string());
    net.params_ = std::move(params);
    return net;
}

LstmLayout::LstmLayout(const Lstm& net)
    : wi(net.off_wi_), bi(net.off_bi_), wf(net.off_wf_), bf(net.off_bf_), wo(net.off_wo_),
      bo(net.off_bo_), wg(net.off_wg_), bg(net.off_bg_), wy(net.off_wy_), by(net.off_by_) {}

}  // namespace rulex
