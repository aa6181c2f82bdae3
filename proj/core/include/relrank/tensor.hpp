#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "relrank/common.hpp"

namespace relrank {

// Dense row-major array of reals. Rank is dynamic but the layers only use
// ranks 1..3. data().size() always equals the product of the extents.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape, Real fill = Real(0));
    Tensor(std::initializer_list<std::size_t> shape, Real fill = Real(0))
        : Tensor(std::vector<std::size_t>(shape), fill) {}

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t extent(std::size_t axis) const { return shape_[axis]; }
    bool empty() const { return data_.empty(); }

    Real* data() { return data_.data(); }
    const Real* data() const { return data_.data(); }
    std::vector<Real>& values() { return data_; }
    const std::vector<Real>& values() const { return data_; }

    Real& operator[](std::size_t i) { return data_[i]; }
    Real operator[](std::size_t i) const { return data_[i]; }

    // Row-major index helpers.
    Real& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    Real at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
    Real& at(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    Real at(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    void fill(Real v);
    void zero() { fill(Real(0)); }
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

    // Throws DimensionError unless shapes match.
    void require_shape(const Tensor& other, const char* what) const;

private:
    std::vector<std::size_t> shape_;
    std::vector<Real> data_;
};

// Asserts every cell is finite; active outside NDEBUG builds only.
void debug_check_finite(const Tensor& t, const char* what);

} // namespace relrank
