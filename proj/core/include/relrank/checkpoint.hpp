#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "relrank/tensor.hpp"

namespace relrank {

// Versioned textual model container: named tensors (parameters and batch-norm
// running statistics) plus the flat effective configuration. Values are
// written as C hexfloats, so load(save(x)) is bit-exact.
struct Checkpoint {
    static constexpr int kVersion = 1;

    std::map<std::string, std::string> config;
    std::vector<std::pair<std::string, Tensor>> tensors;

    const Tensor* find(const std::string& name) const;

    void save(const std::string& path) const;
    static Checkpoint load(const std::string& path);
};

} // namespace relrank
