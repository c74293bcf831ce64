#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "haze/core/errors.hpp"

namespace haze {

// Dense row-major double tensor. Copies are shallow (shared storage); use
// clone() for a deep copy. Ops in this codebase never mutate their inputs,
// so sharing is safe outside of optimizer parameter updates.
class Tensor {
  public:
    Tensor() = default;

    explicit Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
        data_ = std::make_shared<std::vector<double>>(static_cast<size_t>(compute_numel()), 0.0);
    }

    Tensor(std::vector<int64_t> shape, double fill_value) : Tensor(std::move(shape)) {
        fill(fill_value);
    }

    static Tensor from_vector(std::vector<int64_t> shape, std::vector<double> values) {
        Tensor t;
        t.shape_ = std::move(shape);
        if (t.compute_numel() != static_cast<int64_t>(values.size()))
            throw InvalidInput("Tensor::from_vector: shape does not match value count");
        t.data_ = std::make_shared<std::vector<double>>(std::move(values));
        return t;
    }

    bool defined() const { return data_ != nullptr; }
    const std::vector<int64_t>& shape() const { return shape_; }
    int ndim() const { return static_cast<int>(shape_.size()); }

    int64_t dim(int i) const {
        if (i < 0) i += ndim();
        return shape_.at(static_cast<size_t>(i));
    }

    int64_t numel() const { return data_ ? static_cast<int64_t>(data_->size()) : 0; }

    double* data() { return data_->data(); }
    const double* data() const { return data_->data(); }

    double& operator()(int64_t a) { return (*data_)[static_cast<size_t>(a)]; }
    double operator()(int64_t a) const { return (*data_)[static_cast<size_t>(a)]; }
    double& operator()(int64_t a, int64_t b) { return (*data_)[static_cast<size_t>(a * shape_[1] + b)]; }
    double operator()(int64_t a, int64_t b) const { return (*data_)[static_cast<size_t>(a * shape_[1] + b)]; }
    double& operator()(int64_t a, int64_t b, int64_t c) {
        return (*data_)[static_cast<size_t>((a * shape_[1] + b) * shape_[2] + c)];
    }
    double operator()(int64_t a, int64_t b, int64_t c) const {
        return (*data_)[static_cast<size_t>((a * shape_[1] + b) * shape_[2] + c)];
    }
    double& operator()(int64_t a, int64_t b, int64_t c, int64_t d) {
        return (*data_)[static_cast<size_t>(((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d)];
    }
    double operator()(int64_t a, int64_t b, int64_t c, int64_t d) const {
        return (*data_)[static_cast<size_t>(((a * shape_[1] + b) * shape_[2] + c) * shape_[3] + d)];
    }

    void fill(double v) {
        for (double& x : *data_) x = v;
    }

    Tensor clone() const {
        Tensor t;
        t.shape_ = shape_;
        if (data_) t.data_ = std::make_shared<std::vector<double>>(*data_);
        return t;
    }

    // Shares storage under a new shape; element count must match.
    Tensor reshaped(std::vector<int64_t> new_shape) const {
        Tensor t;
        t.shape_ = std::move(new_shape);
        int64_t n = 1;
        for (int64_t d : t.shape_) n *= d;
        if (n != numel()) throw InvalidInput("Tensor::reshaped: element count mismatch");
        t.data_ = data_;
        return t;
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  private:
    int64_t compute_numel() const {
        int64_t n = 1;
        for (int64_t d : shape_) {
            if (d < 0) throw InvalidParameter("Tensor: negative dimension");
            n *= d;
        }
        return n;
    }

    std::vector<int64_t> shape_;
    std::shared_ptr<std::vector<double>> data_;
};

inline std::string shape_string(const Tensor& t) {
    std::string s = "(";
    for (int i = 0; i < t.ndim(); ++i) {
        if (i) s += ",";
        s += std::to_string(t.dim(i));
    }
    return s + ")";
}

}  // namespace haze
