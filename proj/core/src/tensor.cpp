#include "relrank/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace relrank {

Tensor::Tensor(std::vector<std::size_t> shape, Real fill) : shape_(std::move(shape)) {
    std::size_t total = 1;
    for (std::size_t e : shape_) total *= e;
    data_.assign(total, fill);
}

void Tensor::fill(Real v) {
    std::fill(data_.begin(), data_.end(), v);
}

bool Tensor::all_finite() const {
    for (Real v : data_) {
        if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
}

void Tensor::require_shape(const Tensor& other, const char* what) const {
    if (shape_ == other.shape_) return;
    auto fmt = [](const std::vector<std::size_t>& s) {
        std::string out = "(";
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i) out += "x";
            out += std::to_string(s[i]);
        }
        return out + ")";
    };
    throw DimensionError(std::string(what) + ": shape mismatch " + fmt(shape_) +
                         " vs " + fmt(other.shape_));
}

void debug_check_finite(const Tensor& t, const char* what) {
#ifndef NDEBUG
    if (!t.all_finite()) throw NumericError(std::string(what) + ": non-finite value");
#else
    (void)t;
    (void)what;
#endif
}

} // namespace relrank
