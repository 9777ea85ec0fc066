#pragma once

#include <cstddef>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace veracity::engine {

// Dense row-major value container. Rank is whatever the shape says; most of
// the engine works on rank-1 and rank-2 tensors.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    v.assign(count(shape), 0.0);
  }
  Tensor(std::vector<std::size_t> s, std::vector<double> values)
      : shape(std::move(s)), v(std::move(values)) {
    if (v.size() != count(shape))
      throw std::invalid_argument("tensor value count does not match shape");
  }

  static std::size_t count(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
  }

  std::size_t size() const { return v.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(std::size_t i) { return v[i]; }
  double at(std::size_t i) const { return v[i]; }
  double& at(std::size_t i, std::size_t j) { return v[i * cols() + j]; }
  double at(std::size_t i, std::size_t j) const { return v[i * cols() + j]; }

  double* data() { return v.data(); }
  const double* data() const { return v.data(); }

  void fill(double x) { std::fill(v.begin(), v.end(), x); }

  bool operator==(const Tensor&) const = default;
};

// One named trainable tensor with its gradient accumulator.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  explicit Param(std::string n, std::vector<std::size_t> shape)
      : name(std::move(n)), value(shape), grad(std::move(shape)) {}
};

// Ordered registry of parameters. Registration order is the canonical order
// for optimizer state and checkpoints, so it must be deterministic.
class ParamSet {
 public:
  Param& add(std::string name, std::vector<std::size_t> shape) {
    if (index_.count(name))
      throw std::invalid_argument("duplicate parameter name: " + name);
    params_.emplace_back(std::move(name), std::move(shape));
    index_[params_.back().name] = params_.size() - 1;
    return params_.back();
  }

  std::size_t size() const { return params_.size(); }
  Param& operator[](std::size_t i) { return params_[i]; }
  const Param& operator[](std::size_t i) const { return params_[i]; }

  Param& by_name(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end())
      throw std::out_of_range("no parameter named " + name);
    return params_[it->second];
  }

  void zero_grads() {
    for (auto& p : params_) p.grad.fill(0.0);
  }

  std::size_t value_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

  std::vector<Tensor> snapshot_values() const {
    std::vector<Tensor> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p.value);
    return out;
  }

  void restore_values(const std::vector<Tensor>& values) {
    if (values.size() != params_.size())
      throw std::invalid_argument("snapshot size mismatch");
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (values[i].shape != params_[i].value.shape)
        throw std::invalid_argument("snapshot shape mismatch for " + params_[i].name);
      params_[i].value = values[i];
    }
  }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::deque<Param> params_;  // deque keeps references stable across add()
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace veracity::engine
