#include "rulex/trace.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace rulex {

namespace {

constexpr char kMagic[8] = {'R', 'U', 'L', 'E', 'X', 'T', 'R', 'C'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

void put_f64(std::ostream& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in) {
    return std::bit_cast<double>(get_u64(in));
}

// Trailing integer of a label like "T12"; 0 marks a sequence start.
long label_time(const std::string& label) {
    if (label.size() < 2) throw std::runtime_error("trace: malformed label '" + label + "'");
    return std::stol(label.substr(1));
}

}  // namespace

HiddenTrace HiddenTrace::prefix_complete(std::size_t max_patterns) const {
    HiddenTrace out;
    out.dim = dim;
    if (patterns.size() <= max_patterns) return *this;
    std::size_t cut = 0;
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        std::size_t seq_end = (i + 1 < boundaries.size()) ? boundaries[i + 1] : patterns.size();
        if (seq_end > max_patterns) break;
        cut = seq_end;
        out.boundaries.push_back(boundaries[i]);
    }
    if (cut == 0) {  // first sequence alone exceeds the budget
        cut = max_patterns;
        out.boundaries.push_back(0);
    }
    out.patterns.assign(patterns.begin(), patterns.begin() + static_cast<std::ptrdiff_t>(cut));
    out.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(cut));
    return out;
}

void write_trace(const HiddenTrace& t, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open trace file for writing: " + path.string());
    out.write(kMagic, sizeof(kMagic));
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(t.dim));
    put_u64(out, t.patterns.size());
    for (std::size_t i = 0; i < t.patterns.size(); ++i) {
        const std::string& label = t.labels[i];
        put_u32(out, static_cast<std::uint32_t>(label.size()));
        out.write(label.data(), static_cast<std::streamsize>(label.size()));
        for (double v : t.patterns[i]) put_f64(out, v);
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

HiddenTrace read_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace file: " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != std::string(kMagic, 8))
        throw std::runtime_error("not a trace file: " + path.string());
    std::uint32_t version = get_u32(in);
    if (version != kVersion)
        throw std::runtime_error("unsupported trace version " + std::to_string(version));
    HiddenTrace t;
    t.dim = static_cast<int>(get_u32(in));
    std::uint64_t count = get_u64(in);
    t.patterns.reserve(count);
    t.labels.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint32_t len = get_u32(in);
        std::string label(len, '\0');
        in.read(label.data(), len);
        std::vector<double> v(static_cast<std::size_t>(t.dim));
        for (double& x : v) x = get_f64(in);
        if (!in) throw std::runtime_error("truncated trace file: " + path.string());
        if (label_time(label) == 0) t.boundaries.push_back(static_cast<std::size_t>(i));
        t.labels.push_back(std::move(label));
        t.patterns.push_back(std::move(v));
    }
    return t;
}

void write_trace_csv(const HiddenTrace& t, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open trace csv for writing: " + path.string());
    out << "index,label";
    for (int d = 0; d < t.dim; ++d) out << ",h" << d;
    out << '\n';
    out.precision(17);
    for (std::size_t i = 0; i < t.patterns.size(); ++i) {
        out << i << ',' << t.labels[i];
        for (double v : t.patterns[i]) out << ',' << v;
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace rulex
