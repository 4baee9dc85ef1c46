#include "vitdd/tensor.hpp"

#include <cmath>
#include <sstream>

#include "vitdd/errors.hpp"

namespace vitdd {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_shape(const Shape& shape) {
  for (std::size_t d : shape) {
    if (d == 0) {
      throw DimensionError("tensor dimensions must be positive, got " + shape_str(shape));
    }
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) {
  check_shape(shape);
  auto s = std::make_shared<Storage>();
  s->data.assign(shape_numel(shape), fill);
  s->shape = std::move(shape);
  st_ = std::move(s);
}

Tensor::Tensor(Shape shape, std::vector<double> values) {
  check_shape(shape);
  if (shape_numel(shape) != values.size()) {
    throw DimensionError("shape " + shape_str(shape) + " expects " +
                         std::to_string(shape_numel(shape)) + " values, got " +
                         std::to_string(values.size()));
  }
  auto s = std::make_shared<Storage>();
  s->shape = std::move(shape);
  s->data = std::move(values);
  st_ = std::move(s);
}

Tensor Tensor::scalar(double v) { return Tensor(Shape{1}, std::vector<double>{v}); }

Tensor Tensor::row(std::vector<double> values) {
  Shape shape{values.size()};
  return Tensor(std::move(shape), std::move(values));
}

Tensor::Storage& Tensor::st() {
  if (!st_) throw ContractError("use of an undefined tensor");
  return *st_;
}

const Tensor::Storage& Tensor::st() const {
  if (!st_) throw ContractError("use of an undefined tensor");
  return *st_;
}

const Shape& Tensor::shape() const { return st().shape; }

std::size_t Tensor::numel() const { return st().data.size(); }

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  if (axis >= s.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_str(s));
  }
  return s[axis];
}

std::span<const double> Tensor::values() const { return st().data; }
std::span<double> Tensor::values() { return st().data; }

double Tensor::operator()(std::size_t i) const { return st().data.at(i); }

double Tensor::operator()(std::size_t i, std::size_t j) const {
  const Storage& s = st();
  return s.data.at(i * s.shape.at(1) + j);
}

double Tensor::operator()(std::size_t i, std::size_t j, std::size_t k) const {
  const Storage& s = st();
  return s.data.at((i * s.shape.at(1) + j) * s.shape.at(2) + k);
}

double& Tensor::at(std::size_t flat) { return st().data.at(flat); }

bool Tensor::requires_grad() const { return st().requires_grad; }

Tensor& Tensor::set_requires_grad(bool b) {
  st().requires_grad = b;
  return *this;
}

bool Tensor::has_grad() const { return !st().grad.empty(); }

std::span<const double> Tensor::grad() const {
  const Storage& s = st();
  if (s.grad.empty()) {
    throw StateError("gradient absent; run backward first");
  }
  return s.grad;
}

std::vector<double>& Tensor::grad_buffer() {
  Storage& s = st();
  if (s.grad.empty()) s.grad.assign(s.data.size(), 0.0);
  return s.grad;
}

void Tensor::zero_grad() { st().grad.clear(); }

Tensor Tensor::clone() const {
  Tensor out(st().shape, st().data);
  out.st().requires_grad = st().requires_grad;
  return out;
}

void Tensor::ensure_finite(std::string_view what) const {
  const Storage& s = st();
  for (std::size_t i = 0; i < s.data.size(); ++i) {
    if (!std::isfinite(s.data[i])) {
      throw NumericError(std::string(what) + ": non-finite value at flat index " +
                         std::to_string(i) + " in " + shape_str(s.shape));
    }
  }
}

}  // namespace vitdd
