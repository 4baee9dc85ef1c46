#include "vitdd/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "vitdd/errors.hpp"
#include "vitdd/exact_sum.hpp"

namespace vitdd {

namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
  }
}

/// grad(t) += contrib
void accumulate(Tensor t, std::span<const double> contrib) {
  std::vector<double>& g = t.grad_buffer();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += contrib[i];
}

struct AxisSplit {
  std::size_t outer, axis, inner;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s{1, shape[axis], 1};
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

double gauss_cdf(double x) { return 0.5 * (1.0 + std::erf(x * M_SQRT1_2)); }

double gauss_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

}  // namespace

void Tape::record(const char* op, std::vector<Tensor> inputs, Tensor output,
                  std::function<void()> backprop) {
  if (!recording_) return;
  nodes_.push_back(Node{op, std::move(inputs), std::move(output), std::move(backprop)});
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  Tensor out(a.shape());
  auto av = a.values();
  auto bv = b.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + bv[i];
  record("add", {a, b}, out, [a = a, b = b, out]() mutable {
    accumulate(a, out.grad());
    accumulate(b, out.grad());
  });
  return out;
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  Tensor out(a.shape());
  auto av = a.values();
  auto bv = b.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
  record("mul", {a, b}, out, [a = a, b = b, out]() mutable {
    auto g = out.grad();
    std::vector<double>& ga = a.grad_buffer();
    std::vector<double>& gb = b.grad_buffer();
    auto av2 = a.values();
    auto bv2 = b.values();
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * bv2[i];
      gb[i] += g[i] * av2[i];
    }
  });
  return out;
}

Tensor Tape::scale(const Tensor& a, double factor) {
  Tensor out(a.shape());
  auto av = a.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = factor * av[i];
  record("scale", {a}, out, [a = a, out, factor]() mutable {
    auto g = out.grad();
    std::vector<double>& ga = a.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
  });
  return out;
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: incompatible shapes " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor out(Shape{m, n});
  auto av = a.values();
  auto bv = b.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double aip = av[i * k + p];
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) ov[i * n + j] += aip * bv[p * n + j];
    }
  }
  record("matmul", {a, b}, out, [a = a, b = b, out, m, k, n]() mutable {
    auto g = out.grad();
    auto av2 = a.values();
    auto bv2 = b.values();
    std::vector<double>& ga = a.grad_buffer();
    std::vector<double>& gb = b.grad_buffer();
    // dA = dC . B^T
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = 0; p < k; ++p) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bv2[p * n + j];
        ga[i * k + p] += acc;
      }
    // dB = A^T . dC
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t i = 0; i < m; ++i) {
        double aip = av2[i * k + p];
        if (aip == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * g[i * n + j];
      }
  });
  return out;
}

Tensor Tape::transpose(const Tensor& a) {
  if (a.rank() != 2) {
    throw DimensionError("transpose: expected rank-2 tensor, got " + shape_str(a.shape()));
  }
  const std::size_t m = a.dim(0), n = a.dim(1);
  Tensor out(Shape{n, m});
  auto av = a.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) ov[j * m + i] = av[i * n + j];
  record("transpose", {a}, out, [a = a, out, m, n]() mutable {
    auto g = out.grad();
    std::vector<double>& ga = a.grad_buffer();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
  });
  return out;
}

Tensor Tape::reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw DimensionError("reshape: " + shape_str(a.shape()) + " has " +
                         std::to_string(a.numel()) + " elements, target " + shape_str(shape) +
                         " wants " + std::to_string(shape_numel(shape)));
  }
  Tensor out(std::move(shape), std::vector<double>(a.values().begin(), a.values().end()));
  record("reshape", {a}, out, [a = a, out]() mutable { accumulate(a, out.grad()); });
  return out;
}

Tensor Tape::concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const Shape& first = parts[0].shape();
  if (axis >= first.size()) {
    throw DimensionError("concat: axis " + std::to_string(axis) + " out of range for " +
                         shape_str(first));
  }
  Shape out_shape = first;
  for (std::size_t p = 1; p < parts.size(); ++p) {
    const Shape& s = parts[p].shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = (i == axis) || s[i] == first[i];
    if (!ok) {
      throw DimensionError("concat: incompatible shapes " + shape_str(first) + " vs " +
                           shape_str(s) + " on axis " + std::to_string(axis));
    }
    out_shape[axis] += s[axis];
  }
  Tensor out(out_shape);
  auto ov = out.values();
  AxisSplit os = split_at(out_shape, axis);
  std::size_t offset = 0;
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  for (const Tensor& part : parts) {
    AxisSplit ps = split_at(part.shape(), axis);
    auto pv = part.values();
    for (std::size_t o = 0; o < ps.outer; ++o)
      for (std::size_t x = 0; x < ps.axis; ++x)
        for (std::size_t in = 0; in < ps.inner; ++in)
          ov[(o * os.axis + offset + x) * os.inner + in] = pv[(o * ps.axis + x) * ps.inner + in];
    offset += ps.axis;
  }
  record("concat", inputs, out, [inputs, out, axis, os]() mutable {
    auto g = out.grad();
    std::size_t pos = 0;
    for (Tensor& part : inputs) {
      AxisSplit ps = split_at(part.shape(), axis);
      std::vector<double>& gp = part.grad_buffer();
      for (std::size_t o = 0; o < ps.outer; ++o)
        for (std::size_t x = 0; x < ps.axis; ++x)
          for (std::size_t in = 0; in < ps.inner; ++in)
            gp[(o * ps.axis + x) * ps.inner + in] +=
                g[(o * os.axis + pos + x) * os.inner + in];
      pos += ps.axis;
    }
  });
  return out;
}

Tensor Tape::slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end) {
  if (axis >= a.rank() || begin >= end || end > a.dim(axis)) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") on axis " + std::to_string(axis) + " invalid for " +
                         shape_str(a.shape()));
  }
  Shape out_shape = a.shape();
  out_shape[axis] = end - begin;
  Tensor out(out_shape);
  AxisSplit as = split_at(a.shape(), axis);
  AxisSplit os = split_at(out_shape, axis);
  auto av = a.values();
  auto ov = out.values();
  for (std::size_t o = 0; o < os.outer; ++o)
    for (std::size_t x = 0; x < os.axis; ++x)
      for (std::size_t in = 0; in < os.inner; ++in)
        ov[(o * os.axis + x) * os.inner + in] = av[(o * as.axis + begin + x) * as.inner + in];
  record("slice", {a}, out, [a = a, out, begin, as, os]() mutable {
    auto g = out.grad();
    std::vector<double>& ga = a.grad_buffer();
    for (std::size_t o = 0; o < os.outer; ++o)
      for (std::size_t x = 0; x < os.axis; ++x)
        for (std::size_t in = 0; in < os.inner; ++in)
          ga[(o * as.axis + begin + x) * as.inner + in] += g[(o * os.axis + x) * os.inner + in];
  });
  return out;
}

Tensor Tape::softmax(const Tensor& a, std::size_t axis) {
  if (axis >= a.rank()) {
    throw DimensionError("softmax: axis " + std::to_string(axis) + " out of range for " +
                         shape_str(a.shape()));
  }
  AxisSplit s = split_at(a.shape(), axis);
  Tensor out(a.shape());
  auto av = a.values();
  auto ov = out.values();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.axis * s.inner + in;
      double m = av[base];
      for (std::size_t x = 1; x < s.axis; ++x) m = std::max(m, av[base + x * s.inner]);
      ExactSum denom;
      for (std::size_t x = 0; x < s.axis; ++x) {
        double e = std::exp(av[base + x * s.inner] - m);
        ov[base + x * s.inner] = e;
        denom.add(e);
      }
      const double d = denom.value();
      for (std::size_t x = 0; x < s.axis; ++x) ov[base + x * s.inner] /= d;
    }
  }
  record("softmax", {a}, out, [a = a, out, s]() mutable {
    auto g = out.grad();
    auto y = out.values();
    std::vector<double>& ga = a.grad_buffer();
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t in = 0; in < s.inner; ++in) {
        const std::size_t base = o * s.axis * s.inner + in;
        double dot = 0.0;
        for (std::size_t x = 0; x < s.axis; ++x)
          dot += g[base + x * s.inner] * y[base + x * s.inner];
        for (std::size_t x = 0; x < s.axis; ++x) {
          const std::size_t idx = base + x * s.inner;
          ga[idx] += y[idx] * (g[idx] - dot);
        }
      }
    }
  });
  return out;
}

Tensor Tape::layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  if (eps < 0.0) throw ConfigError("layer_norm: eps must be nonnegative");
  const std::size_t d = x.shape().back();
  if (gamma.rank() != 1 || beta.rank() != 1 || gamma.dim(0) != d || beta.dim(0) != d) {
    throw DimensionError("layer_norm: affine params " + shape_str(gamma.shape()) + "/" +
                         shape_str(beta.shape()) + " do not match feature width " +
                         std::to_string(d));
  }
  const std::size_t rows = x.numel() / d;
  Tensor out(x.shape());
  auto xv = x.values();
  auto gv = gamma.values();
  auto bv = beta.values();
  auto ov = out.values();
  // Saved for backward: normalized rows and per-row inverse stddev.
  auto xhat = std::make_shared<std::vector<double>>(x.numel());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += row[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      double c = row[j] - mean;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = inv;
    for (std::size_t j = 0; j < d; ++j) {
      double h = (row[j] - mean) * inv;
      (*xhat)[r * d + j] = h;
      ov[r * d + j] = gv[j] * h + bv[j];
    }
  }
  record("layer_norm", {x, gamma, beta}, out,
         [x = x, gamma = gamma, beta = beta, out, xhat, inv_std, rows, d]() mutable {
           auto g = out.grad();
           auto gv2 = gamma.values();
           std::vector<double>& gx = x.grad_buffer();
           std::vector<double>& gg = gamma.grad_buffer();
           std::vector<double>& gb = beta.grad_buffer();
           for (std::size_t r = 0; r < rows; ++r) {
             const double* go = g.data() + r * d;
             const double* h = xhat->data() + r * d;
             double m1 = 0.0, m2 = 0.0;
             for (std::size_t j = 0; j < d; ++j) {
               gg[j] += go[j] * h[j];
               gb[j] += go[j];
               const double dh = go[j] * gv2[j];
               m1 += dh;
               m2 += dh * h[j];
             }
             m1 /= static_cast<double>(d);
             m2 /= static_cast<double>(d);
             const double inv = (*inv_std)[r];
             for (std::size_t j = 0; j < d; ++j) {
               const double dh = go[j] * gv2[j];
               gx[r * d + j] += inv * (dh - m1 - h[j] * m2);
             }
           }
         });
  return out;
}

Tensor Tape::gelu(const Tensor& a) {
  Tensor out(a.shape());
  auto av = a.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * gauss_cdf(av[i]);
  record("gelu", {a}, out, [a = a, out]() mutable {
    auto g = out.grad();
    auto av2 = a.values();
    std::vector<double>& ga = a.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = av2[i];
      ga[i] += g[i] * (gauss_cdf(x) + x * gauss_pdf(x));
    }
  });
  return out;
}

Tensor Tape::linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.rank() != 2 || weight.rank() != 2 || x.dim(1) != weight.dim(0)) {
    throw DimensionError("linear: incompatible shapes " + shape_str(x.shape()) + " x " +
                         shape_str(weight.shape()));
  }
  const std::size_t n = x.dim(0), in = x.dim(1), outw = weight.dim(1);
  if (bias.rank() != 1 || bias.dim(0) != outw) {
    throw DimensionError("linear: bias " + shape_str(bias.shape()) + " does not match output width " +
                         std::to_string(outw));
  }
  Tensor out(Shape{n, outw});
  auto xv = x.values();
  auto wv = weight.values();
  auto bv = bias.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < outw; ++j) ov[i * outw + j] = bv[j];
    for (std::size_t p = 0; p < in; ++p) {
      const double xip = xv[i * in + p];
      if (xip == 0.0) continue;
      for (std::size_t j = 0; j < outw; ++j) ov[i * outw + j] += xip * wv[p * outw + j];
    }
  }
  record("linear", {x, weight, bias}, out, [x = x, weight = weight, bias = bias, out, n, in, outw]() mutable {
    auto g = out.grad();
    auto xv2 = x.values();
    auto wv2 = weight.values();
    std::vector<double>& gx = x.grad_buffer();
    std::vector<double>& gw = weight.grad_buffer();
    std::vector<double>& gb = bias.grad_buffer();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t p = 0; p < in; ++p) {
        double acc = 0.0;
        for (std::size_t j = 0; j < outw; ++j) acc += g[i * outw + j] * wv2[p * outw + j];
        gx[i * in + p] += acc;
      }
    for (std::size_t p = 0; p < in; ++p)
      for (std::size_t i = 0; i < n; ++i) {
        const double xip = xv2[i * in + p];
        if (xip == 0.0) continue;
        for (std::size_t j = 0; j < outw; ++j) gw[p * outw + j] += xip * g[i * outw + j];
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < outw; ++j) gb[j] += g[i * outw + j];
  });
  return out;
}

Tensor Tape::cross_entropy(const Tensor& logits, std::span<const int> targets) {
  Tensor view = logits;
  if (logits.rank() == 1) {
    // Treat a plain logit vector as a single-row batch.
    Shape rows{1, logits.dim(0)};
    view = Tensor(rows, std::vector<double>(logits.values().begin(), logits.values().end()));
    record("reshape", {logits}, view, [logits = logits, view]() mutable {
      accumulate(logits, view.grad());
    });
  } else if (logits.rank() != 2) {
    throw DimensionError("cross_entropy: expected [batch x classes] logits, got " +
                         shape_str(logits.shape()));
  }
  const std::size_t batch = view.dim(0), classes = view.dim(1);
  if (targets.size() != batch) {
    throw DimensionError("cross_entropy: " + std::to_string(batch) + " rows but " +
                         std::to_string(targets.size()) + " targets");
  }
  for (std::size_t b = 0; b < batch; ++b) {
    if (targets[b] < 0 || static_cast<std::size_t>(targets[b]) >= classes) {
      throw LabelError("cross_entropy: target " + std::to_string(targets[b]) +
                       " out of range [0, " + std::to_string(classes) + ") at row " +
                       std::to_string(b));
    }
  }
  auto lv = view.values();
  auto probs = std::make_shared<std::vector<double>>(view.numel());
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const double* row = lv.data() + b * classes;
    double m = row[0];
    for (std::size_t k = 1; k < classes; ++k) m = std::max(m, row[k]);
    double denom = 0.0;
    for (std::size_t k = 0; k < classes; ++k) denom += std::exp(row[k] - m);
    const double lse = m + std::log(denom);
    for (std::size_t k = 0; k < classes; ++k) (*probs)[b * classes + k] = std::exp(row[k] - lse);
    total += lse - row[targets[b]];
  }
  Tensor out = Tensor::scalar(total / static_cast<double>(batch));
  std::vector<int> saved_targets(targets.begin(), targets.end());
  record("cross_entropy", {view}, out,
         [view, out, probs, saved_targets, batch, classes]() mutable {
           const double g = out.grad()[0] / static_cast<double>(batch);
           std::vector<double>& gl = view.grad_buffer();
           for (std::size_t b = 0; b < batch; ++b)
             for (std::size_t k = 0; k < classes; ++k) {
               double p = (*probs)[b * classes + k];
               if (static_cast<std::size_t>(saved_targets[b]) == k) p -= 1.0;
               gl[b * classes + k] += g * p;
             }
         });
  return out;
}

Tensor Tape::sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.values()) total += v;
  Tensor out = Tensor::scalar(total);
  record("sum", {a}, out, [a = a, out]() mutable {
    const double g = out.grad()[0];
    std::vector<double>& ga = a.grad_buffer();
    for (double& v : ga) v += g;
  });
  return out;
}

Tensor Tape::attention_values(const Tensor& attn, const Tensor& v) {
  if (attn.rank() != 2 || v.rank() != 2 || attn.dim(1) != v.dim(0)) {
    throw DimensionError("attention_values: incompatible shapes " + shape_str(attn.shape()) +
                         " x " + shape_str(v.shape()));
  }
  const std::size_t q = attn.dim(0), keys = attn.dim(1), d = v.dim(1);
  Tensor out(Shape{q, d});
  auto av = attn.values();
  auto vv = v.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      ExactSum acc;
      for (std::size_t k = 0; k < keys; ++k) acc.add(av[i * keys + k] * vv[k * d + j]);
      ov[i * d + j] = acc.value();
    }
  }
  record("attention_values", {attn, v}, out, [attn = attn, v = v, out, q, keys, d]() mutable {
    auto g = out.grad();
    auto av2 = attn.values();
    auto vv2 = v.values();
    std::vector<double>& ga = attn.grad_buffer();
    std::vector<double>& gv = v.grad_buffer();
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t k = 0; k < keys; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += g[i * d + j] * vv2[k * d + j];
        ga[i * keys + k] += acc;
      }
    for (std::size_t k = 0; k < keys; ++k)
      for (std::size_t i = 0; i < q; ++i) {
        const double a = av2[i * keys + k];
        if (a == 0.0) continue;
        for (std::size_t j = 0; j < d; ++j) gv[k * d + j] += a * g[i * d + j];
      }
  });
  return out;
}

void Tape::backward(const Tensor& loss) {
  if (!recording_) throw StateError("backward on a non-recording tape");
  if (loss.numel() != 1) {
    throw ContractError("backward: loss must be scalar, got " + shape_str(loss.shape()));
  }
  bool found = false;
  for (const Node& n : nodes_) {
    if (n.output.shares_storage(loss)) {
      found = true;
      break;
    }
  }
  if (!found) throw ContractError("backward: loss was not produced on this tape");
  // Node outputs are interior values: their gradient restarts every pass.
  // Leaves are never node outputs, so their gradients accumulate until zeroed.
  for (Node& n : nodes_) n.output.zero_grad();
  Tensor seed = loss;
  seed.grad_buffer()[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->output.has_grad()) it->backprop();
  }
}

}  // namespace vitdd
