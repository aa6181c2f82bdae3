#include "relrank/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace relrank {

namespace {

std::string hexfloat(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double parse_hexfloat(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw FormatError("checkpoint: bad float token '" + s + "'");
    return v;
}

std::string expect_line(std::istream& in, const char* ctx) {
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError(std::string("checkpoint: truncated file while reading ") + ctx);
    }
    return line;
}

} // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
    for (const auto& [n, t] : tensors) {
        if (n == name) return &t;
    }
    return nullptr;
}

void Checkpoint::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("checkpoint: cannot write " + path);
    out << "relrank-checkpoint " << kVersion << "\n";
    out << "config " << config.size() << "\n";
    for (const auto& [k, v] : config) {
        if (k.find('\n') != std::string::npos || v.find('\n') != std::string::npos ||
            k.find('=') != std::string::npos) {
            throw FormatError("checkpoint: config key/value contains forbidden character");
        }
        out << k << "=" << v << "\n";
    }
    out << "tensors " << tensors.size() << "\n";
    for (const auto& [name, t] : tensors) {
        out << name << " " << t.rank();
        for (std::size_t e : t.shape()) out << " " << e;
        out << "\n";
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (i) out << ' ';
            out << hexfloat(static_cast<double>(t[i]));
        }
        out << "\n";
    }
    if (!out) throw IoError("checkpoint: write failed for " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("checkpoint: cannot read " + path);

    Checkpoint ck;
    std::string magic;
    int version = 0;
    {
        std::istringstream header(expect_line(in, "header"));
        header >> magic >> version;
        if (magic != "relrank-checkpoint") {
            throw FormatError("checkpoint: bad magic in " + path);
        }
        if (version != kVersion) {
            throw FormatError("checkpoint: unsupported version " + std::to_string(version));
        }
    }
    std::size_t n_config = 0;
    {
        std::istringstream ls(expect_line(in, "config count"));
        std::string tag;
        ls >> tag >> n_config;
        if (tag != "config") throw FormatError("checkpoint: expected config section");
    }
    for (std::size_t i = 0; i < n_config; ++i) {
        const std::string line = expect_line(in, "config entry");
        const auto pos = line.find('=');
        if (pos == std::string::npos) {
            throw FormatError("checkpoint: malformed config line '" + line + "'");
        }
        ck.config[line.substr(0, pos)] = line.substr(pos + 1);
    }
    std::size_t n_tensors = 0;
    {
        std::istringstream ls(expect_line(in, "tensor count"));
        std::string tag;
        ls >> tag >> n_tensors;
        if (tag != "tensors") throw FormatError("checkpoint: expected tensors section");
    }
    for (std::size_t i = 0; i < n_tensors; ++i) {
        std::istringstream hdr(expect_line(in, "tensor header"));
        std::string name;
        std::size_t rank = 0;
        hdr >> name >> rank;
        std::vector<std::size_t> shape(rank);
        for (std::size_t r = 0; r < rank; ++r) {
            if (!(hdr >> shape[r])) throw FormatError("checkpoint: bad tensor shape");
        }
        Tensor t(shape);
        std::istringstream body(expect_line(in, "tensor values"));
        std::string token;
        for (std::size_t j = 0; j < t.size(); ++j) {
            if (!(body >> token)) throw FormatError("checkpoint: too few values for " + name);
            t[j] = static_cast<Real>(parse_hexfloat(token));
        }
        ck.tensors.emplace_back(std::move(name), std::move(t));
    }
    return ck;
}

} // namespace relrank
