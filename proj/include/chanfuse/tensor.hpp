// Copyright 2026 The chanfuse Authors
//
// Licensed under the Apache License, Version 2.0

#ifndef CHANFUSE_TENSOR_HPP
#define CHANFUSE_TENSOR_HPP

#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "chanfuse/types.hpp"

namespace chanfuse {

/// Dense row-major f64 tensor with semantic axis names (B, K, T, D, F...).
/// The flat buffer is what flows through every kernel; 2-D matrix views are
/// cheap Eigen maps over it.
struct Tensor {
  std::vector<Eigen::Index> shape;
  std::vector<std::string> axes;  // optional, same length as shape when set
  Arr data;                       // row-major, product(shape) entries

  Tensor() = default;

  static Tensor zeros(std::vector<Eigen::Index> shape,
                      std::vector<std::string> axes = {}) {
    Tensor t;
    t.shape = std::move(shape);
    t.axes = std::move(axes);
    t.data = Arr::Zero(t.count());
    return t;
  }

  Eigen::Index count() const {
    return std::accumulate(shape.begin(), shape.end(), Eigen::Index(1),
                           std::multiplies<>());
  }
  Eigen::Index rank() const { return Eigen::Index(shape.size()); }
  Eigen::Index dim(Eigen::Index i) const { return shape[size_t(i)]; }

  double& operator()(Eigen::Index i) { return data[i]; }
  double operator()(Eigen::Index i) const { return data[i]; }
  double& operator()(Eigen::Index i, Eigen::Index j) {
    return data[i * dim(1) + j];
  }
  double operator()(Eigen::Index i, Eigen::Index j) const {
    return data[i * dim(1) + j];
  }
  double& operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) {
    return data[(i * dim(1) + j) * dim(2) + k];
  }
  double operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) const {
    return data[(i * dim(1) + j) * dim(2) + k];
  }

  /// Whole tensor as rows x cols (rows * cols must equal count()).
  MapRMat mat(Eigen::Index rows, Eigen::Index cols) {
    return MapRMat(data.data(), rows, cols);
  }
  ConstMapRMat mat(Eigen::Index rows, Eigen::Index cols) const {
    return ConstMapRMat(data.data(), rows, cols);
  }
  /// Rank-2 view using the tensor's own shape.
  MapRMat mat2() { return mat(dim(0), dim(1)); }
  ConstMapRMat mat2() const { return mat(dim(0), dim(1)); }
  /// Slice k of a rank-3 tensor as dim(1) x dim(2).
  MapRMat slice(Eigen::Index k) {
    return MapRMat(data.data() + k * dim(1) * dim(2), dim(1), dim(2));
  }
  ConstMapRMat slice(Eigen::Index k) const {
    return ConstMapRMat(data.data() + k * dim(1) * dim(2), dim(1), dim(2));
  }

  void set_zero() { data.setZero(); }
};

/// A learnable tensor: value plus a gradient slot of identical shape.
/// Gradients accumulate; callers zero them between steps.
struct ParamTensor {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// Deterministic Gaussian via Box-Muller on mt19937_64 draws; identical
/// streams on every platform, unlike std::normal_distribution.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  double uniform() {  // [0, 1)
    return double(gen_() >> 11) * 0x1.0p-53;
  }
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(theta);
    have_spare_ = true;
    return radius * std::cos(theta);
  }
  uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Owns every ParamTensor of a model under a unique name. Addresses are
/// stable, so modules keep plain pointers into the store.
class ParamStore {
 public:
  ParamTensor& create(const std::string& name, std::vector<Eigen::Index> shape,
                      std::vector<std::string> axes = {}) {
    auto [it, inserted] = items_.try_emplace(name);
    if (!inserted)
      throw UsageError("parameter registered twice: " + name);
    auto p = std::make_unique<ParamTensor>();
    p->name = name;
    p->value = Tensor::zeros(shape, axes);
    p->grad = Tensor::zeros(std::move(shape), std::move(axes));
    it->second = std::move(p);
    return *it->second;
  }

  ParamTensor& at(const std::string& name) {
    auto it = items_.find(name);
    if (it == items_.end()) throw UsageError("unknown parameter: " + name);
    return *it->second;
  }
  const ParamTensor& at(const std::string& name) const {
    auto it = items_.find(name);
    if (it == items_.end()) throw UsageError("unknown parameter: " + name);
    return *it->second;
  }
  bool contains(const std::string& name) const {
    return items_.count(name) > 0;
  }

  void zero_grads() {
    for (auto& [_, p] : items_) p->grad.set_zero();
  }
  void sgd_step(double lr) {
    for (auto& [_, p] : items_) p->value.data -= lr * p->grad.data;
  }

  /// value <- N(0, scale^2) draws in a fixed (name-sorted) order.
  void init_normal(Rng& rng, double scale) {
    for (auto& [_, p] : items_)
      for (Eigen::Index i = 0; i < p->value.count(); ++i)
        p->value.data[i] = scale * rng.normal();
  }

  template <typename Fn>
  void for_each(Fn&& fn) {
    for (auto& [_, p] : items_) fn(*p);
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [_, p] : items_) fn(*p);
  }
  size_t size() const { return items_.size(); }

 private:
  std::map<std::string, std::unique_ptr<ParamTensor>> items_;
};

}  // namespace chanfuse

#endif  // CHANFUSE_TENSOR_HPP
