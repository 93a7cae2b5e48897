#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "wnn/errors.hpp"

namespace wnn {

// Dense row-major double tensor. The single value carrier for signals, images,
// feature maps, gradients and weights. Kept deliberately small: shape + data.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0)
        : shape_(std::move(shape)), data_(count_(shape_), fill) {}

    static Tensor from(std::vector<std::size_t> shape, std::vector<double> data) {
        if (count_(shape) != data.size())
            throw ShapeMismatch("tensor data length " + std::to_string(data.size()) +
                                " does not match shape product " +
                                std::to_string(count_(shape)));
        Tensor t;
        t.shape_ = std::move(shape);
        t.data_ = std::move(data);
        return t;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& vec() { return data_; }
    const std::vector<double>& vec() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // Multi-index access for up to four axes; rank is checked.
    double& at(std::size_t i) { check_rank_(1); return data_[i]; }
    double& at(std::size_t i, std::size_t j) {
        check_rank_(2);
        return data_[i * shape_[1] + j];
    }
    double& at(std::size_t i, std::size_t j, std::size_t k) {
        check_rank_(3);
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    double& at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        check_rank_(4);
        return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
    }
    double at(std::size_t i) const { return const_cast<Tensor*>(this)->at(i); }
    double at(std::size_t i, std::size_t j) const {
        return const_cast<Tensor*>(this)->at(i, j);
    }
    double at(std::size_t i, std::size_t j, std::size_t k) const {
        return const_cast<Tensor*>(this)->at(i, j, k);
    }
    double at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
        return const_cast<Tensor*>(this)->at(i, j, k, l);
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    std::string shape_str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape_.size(); ++i)
            s += (i ? "," : "") + std::to_string(shape_[i]);
        return s + "]";
    }

private:
    static std::size_t count_(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }
    void check_rank_(std::size_t r) const {
        if (shape_.size() != r)
            throw ShapeMismatch("rank " + std::to_string(shape_.size()) +
                                " tensor indexed with " + std::to_string(r) +
                                " indices");
    }

    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

inline Tensor zeros_like(const Tensor& t) { return Tensor(t.shape()); }

inline void require_finite(const Tensor& t, const char* where) {
    if (!t.all_finite())
        throw NonFiniteInput(std::string(where) + " received NaN or Inf");
}

}  // namespace wnn
