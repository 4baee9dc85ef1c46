#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vitdd {

/// Dimension sizes, outermost first. All dimensions are positive.
using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Dense 64-bit float tensor in row-major order, with an optional gradient
/// buffer of the same extent. Tensor is a shared handle: copies refer to the
/// same storage, which is what lets tape nodes and parameter registries alias
/// the values they update. Use clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double v);
  static Tensor row(std::vector<double> values);

  bool defined() const { return static_cast<bool>(st_); }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;
  std::size_t dim(std::size_t axis) const;

  std::span<const double> values() const;
  std::span<double> values();

  double operator()(std::size_t i) const;
  double operator()(std::size_t i, std::size_t j) const;
  double operator()(std::size_t i, std::size_t j, std::size_t k) const;
  double& at(std::size_t flat);

  bool requires_grad() const;
  Tensor& set_requires_grad(bool b);

  bool has_grad() const;
  std::span<const double> grad() const;
  /// Gradient buffer, allocated (zeroed) on first use.
  std::vector<double>& grad_buffer();
  /// Drops the gradient buffer entirely ("absent" state).
  void zero_grad();

  /// Deep copy of values; gradient is not copied.
  Tensor clone() const;
  bool shares_storage(const Tensor& other) const { return st_ == other.st_; }
  const void* storage_id() const { return st_.get(); }

  /// Validation pass: throws NumericError naming `what` if any value is
  /// NaN or infinite.
  void ensure_finite(std::string_view what) const;

 private:
  struct Storage {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty = absent
    bool requires_grad = false;
  };
  std::shared_ptr<Storage> st_;

  Storage& st();
  const Storage& st() const;
};

}  // namespace vitdd
