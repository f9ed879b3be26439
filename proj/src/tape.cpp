#include "sgood/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sgood {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(std::string("tape: ") + what);
}

}  // namespace

NodeId Tape::emplace(Tensor value, std::function<void(Tape&)> back) {
  if (!value.all_finite()) throw std::runtime_error("tape: non-finite op output");
  nodes_.push_back({std::move(value), Tensor{}, std::move(back)});
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::input(Tensor value) { return emplace(std::move(value), nullptr); }

NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  const bool broadcast = !ta.same_shape(tb);
  if (broadcast) {
    require(tb.rows == 1 && tb.cols == ta.cols, "add: shapes incompatible");
  }
  Tensor out = ta;
  for (int r = 0; r < out.rows; ++r) {
    for (int c = 0; c < out.cols; ++c) out.at(r, c) += broadcast ? tb.at(0, c) : tb.at(r, c);
  }
  return emplace(std::move(out), [a, b, broadcast, self = size()](Tape& t) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_ref(a);
    Tensor& gb = t.grad_ref(b);
    for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
    if (broadcast) {
      for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < g.cols; ++c) gb.at(0, c) += g.at(r, c);
      }
    } else {
      for (std::size_t i = 0; i < g.data.size(); ++i) gb.data[i] += g.data[i];
    }
  });
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.cols == tb.rows, "matmul: inner dimensions differ");
  Tensor out(ta.rows, tb.cols);
  for (int r = 0; r < ta.rows; ++r) {
    for (int k = 0; k < ta.cols; ++k) {
      const double av = ta.at(r, k);
      if (av == 0.0) continue;
      for (int c = 0; c < tb.cols; ++c) out.at(r, c) += av * tb.at(k, c);
    }
  }
  return emplace(std::move(out), [a, b, self = size()](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& ta = t.value(a);
    const Tensor& tb = t.value(b);
    Tensor& ga = t.grad_ref(a);
    Tensor& gb = t.grad_ref(b);
    // ga += g * tb^T
    for (int r = 0; r < ta.rows; ++r) {
      for (int c = 0; c < g.cols; ++c) {
        const double gv = g.at(r, c);
        if (gv == 0.0) continue;
        for (int k = 0; k < ta.cols; ++k) ga.at(r, k) += gv * tb.at(k, c);
      }
    }
    // gb += ta^T * g
    for (int r = 0; r < ta.rows; ++r) {
      for (int k = 0; k < ta.cols; ++k) {
        const double av = ta.at(r, k);
        if (av == 0.0) continue;
        for (int c = 0; c < g.cols; ++c) gb.at(k, c) += av * g.at(r, c);
      }
    }
  });
}

NodeId Tape::mul(NodeId a, NodeId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.same_shape(tb), "mul: shape mismatch");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= tb.data[i];
  return emplace(std::move(out), [a, b, self = size()](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& ta = t.value(a);
    const Tensor& tb = t.value(b);
    Tensor& ga = t.grad_ref(a);
    Tensor& gb = t.grad_ref(b);
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      ga.data[i] += g.data[i] * tb.data[i];
      gb.data[i] += g.data[i] * ta.data[i];
    }
  });
}

NodeId Tape::relu(NodeId a) {
  Tensor out = value(a);
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  return emplace(std::move(out), [a, self = size()](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& ta = t.value(a);
    Tensor& ga = t.grad_ref(a);
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      if (ta.data[i] > 0.0) ga.data[i] += g.data[i];
    }
  });
}

NodeId Tape::exp(NodeId a) {
  Tensor out = value(a);
  for (double& v : out.data) v = std::exp(v);
  return emplace(std::move(out), [a, self = size()](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& v = t.value(self);
    Tensor& ga = t.grad_ref(a);
    for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] * v.data[i];
  });
}

NodeId Tape::log(NodeId a) {
  Tensor out = value(a);
  for (double& v : out.data) v = std::log(v);
  return emplace(std::move(out), [a, self = size()](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& ta = t.value(a);
    Tensor& ga = t.grad_ref(a);
    for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] / ta.data[i];
  });
}

NodeId Tape::scale(NodeId a, double s) {
  Tensor out = value(a);
  for (double& v : out.data) v *= s;
  return emplace(std::move(out), [a, s, self = size()](Tape& t) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_ref(a);
    for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] * s;
  });
}

NodeId Tape::scale_by(NodeId a, NodeId s) {
  const Tensor& ts = value(s);
  require(ts.rows == 1 && ts.cols == 1, "scale_by: scalar must be 1x1");
  Tensor out = value(a);
  for (double& v : out.data) v *= ts.data[0];
  return emplace(std::move(out), [a, s, self = size()](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& ta = t.value(a);
    const double sv = t.value(s).data[0];
    Tensor& ga = t.grad_ref(a);
    Tensor& gs = t.grad_ref(s);
    for (std::size_t i = 0; i < g.data.size(); ++i) {
      ga.data[i] += g.data[i] * sv;
      gs.data[0] += g.data[i] * ta.data[i];
    }
  });
}

NodeId Tape::transpose(NodeId a) {
  const Tensor& ta = value(a);
  Tensor out(ta.cols, ta.rows);
  for (int r = 0; r < ta.rows; ++r) {
    for (int c = 0; c < ta.cols; ++c) out.at(c, r) = ta.at(r, c);
  }
  return emplace(std::move(out), [a, self = size()](Tape& t) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_ref(a);
    for (int r = 0; r < g.rows; ++r) {
      for (int c = 0; c < g.cols; ++c) ga.at(c, r) += g.at(r, c);
    }
  });
}

NodeId Tape::sum_rows(NodeId a) {
  const Tensor& ta = value(a);
  Tensor out(1, ta.cols);
  for (int r = 0; r < ta.rows; ++r) {
    for (int c = 0; c < ta.cols; ++c) out.at(0, c) += ta.at(r, c);
  }
  return emplace(std::move(out), [a, self = size()](Tape& t) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_ref(a);
    for (int r = 0; r < ga.rows; ++r) {
      for (int c = 0; c < ga.cols; ++c) ga.at(r, c) += g.at(0, c);
    }
  });
}

NodeId Tape::sum_cols(NodeId a) {
  const Tensor& ta = value(a);
  Tensor out(ta.rows, 1);
  for (int r = 0; r < ta.rows; ++r) {
    for (int c = 0; c < ta.cols; ++c) out.at(r, 0) += ta.at(r, c);
  }
  return emplace(std::move(out), [a, self = size()](Tape& t) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_ref(a);
    for (int r = 0; r < ga.rows; ++r) {
      for (int c = 0; c < ga.cols; ++c) ga.at(r, c) += g.at(r, 0);
    }
  });
}

NodeId Tape::sum_all(NodeId a) { return sum_rows(sum_cols(a)); }

NodeId Tape::concat_cols(std::span<const NodeId> parts) {
  require(!parts.empty(), "concat_cols: no parts");
  const int rows = value(parts[0]).rows;
  int cols = 0;
  for (const NodeId p : parts) {
    require(value(p).rows == rows, "concat_cols: row count mismatch");
    cols += value(p).cols;
  }
  Tensor out(rows, cols);
  int off = 0;
  for (const NodeId p : parts) {
    const Tensor& tp = value(p);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < tp.cols; ++c) out.at(r, off + c) = tp.at(r, c);
    }
    off += tp.cols;
  }
  std::vector<NodeId> ids(parts.begin(), parts.end());
  return emplace(std::move(out), [ids, self = size()](Tape& t) {
    const Tensor& g = t.grad(self);
    int off = 0;
    for (const NodeId p : ids) {
      Tensor& gp = t.grad_ref(p);
      for (int r = 0; r < gp.rows; ++r) {
        for (int c = 0; c < gp.cols; ++c) gp.at(r, c) += g.at(r, off + c);
      }
      off += gp.cols;
    }
  });
}

NodeId Tape::concat_rows(std::span<const NodeId> parts) {
  require(!parts.empty(), "concat_rows: no parts");
  const int cols = value(parts[0]).cols;
  int rows = 0;
  for (const NodeId p : parts) {
    require(value(p).cols == cols, "concat_rows: column count mismatch");
    rows += value(p).rows;
  }
  Tensor out(rows, cols);
  int off = 0;
  for (const NodeId p : parts) {
    const Tensor& tp = value(p);
    for (int r = 0; r < tp.rows; ++r) {
      for (int c = 0; c < cols; ++c) out.at(off + r, c) = tp.at(r, c);
    }
    off += tp.rows;
  }
  std::vector<NodeId> ids(parts.begin(), parts.end());
  return emplace(std::move(out), [ids, self = size()](Tape& t) {
    const Tensor& g = t.grad(self);
    int off = 0;
    for (const NodeId p : ids) {
      Tensor& gp = t.grad_ref(p);
      for (int r = 0; r < gp.rows; ++r) {
        for (int c = 0; c < gp.cols; ++c) gp.at(r, c) += g.at(off + r, c);
      }
      off += gp.rows;
    }
  });
}

NodeId Tape::l2_normalize_rows(NodeId a) {
  const Tensor& ta = value(a);
  Tensor out = ta;
  std::vector<double> norms(static_cast<std::size_t>(ta.rows));
  for (int r = 0; r < ta.rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < ta.cols; ++c) s += ta.at(r, c) * ta.at(r, c);
    const double n = std::sqrt(s);
    if (n == 0.0) throw std::runtime_error("l2_normalize_rows: zero-norm row");
    norms[r] = n;
    for (int c = 0; c < ta.cols; ++c) out.at(r, c) /= n;
  }
  return emplace(std::move(out), [a, norms, self = size()](Tape& t) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    Tensor& ga = t.grad_ref(a);
    for (int r = 0; r < g.rows; ++r) {
      double dot = 0.0;
      for (int c = 0; c < g.cols; ++c) dot += g.at(r, c) * y.at(r, c);
      for (int c = 0; c < g.cols; ++c) {
        ga.at(r, c) += (g.at(r, c) - dot * y.at(r, c)) / norms[r];
      }
    }
  });
}

NodeId Tape::segment_sum(NodeId a, std::vector<int> owner, int segments) {
  const Tensor& ta = value(a);
  require(static_cast<int>(owner.size()) == ta.rows, "segment_sum: owner size mismatch");
  require(segments >= 0, "segment_sum: negative segment count");
  Tensor out(segments, ta.cols);
  for (int r = 0; r < ta.rows; ++r) {
    const int s = owner[r];
    require(s >= 0 && s < segments, "segment_sum: owner out of range");
    for (int c = 0; c < ta.cols; ++c) out.at(s, c) += ta.at(r, c);
  }
  return emplace(std::move(out), [a, owner = std::move(owner), self = size()](Tape& t) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_ref(a);
    for (int r = 0; r < ga.rows; ++r) {
      for (int c = 0; c < ga.cols; ++c) ga.at(r, c) += g.at(owner[r], c);
    }
  });
}

NodeId Tape::neighbor_sum(NodeId a, std::vector<std::pair<int, int>> directed_edges) {
  const Tensor& ta = value(a);
  Tensor out(ta.rows, ta.cols);
  for (const auto& [src, dst] : directed_edges) {
    require(src >= 0 && src < ta.rows && dst >= 0 && dst < ta.rows,
            "neighbor_sum: edge endpoint out of range");
    for (int c = 0; c < ta.cols; ++c) out.at(dst, c) += ta.at(src, c);
  }
  return emplace(std::move(out),
                 [a, edges = std::move(directed_edges), self = size()](Tape& t) {
                   const Tensor& g = t.grad(self);
                   Tensor& ga = t.grad_ref(a);
                   for (const auto& [src, dst] : edges) {
                     for (int c = 0; c < g.cols; ++c) ga.at(src, c) += g.at(dst, c);
                   }
                 });
}

NodeId Tape::softmax_cross_entropy(NodeId logits, std::vector<int> labels) {
  const Tensor& tl = value(logits);
  require(static_cast<int>(labels.size()) == tl.rows, "softmax_cross_entropy: label count");
  for (const int y : labels) {
    require(y >= 0 && y < tl.cols, "softmax_cross_entropy: label out of range");
  }
  double loss = 0.0;
  for (int r = 0; r < tl.rows; ++r) {
    double mx = tl.at(r, 0);
    for (int c = 1; c < tl.cols; ++c) mx = std::max(mx, tl.at(r, c));
    double lse = 0.0;
    for (int c = 0; c < tl.cols; ++c) lse += std::exp(tl.at(r, c) - mx);
    lse = mx + std::log(lse);
    loss += lse - tl.at(r, labels[r]);
  }
  loss /= static_cast<double>(tl.rows);
  return emplace(Tensor::scalar(loss),
                 [logits, labels = std::move(labels), self = size()](Tape& t) {
                   const double g = t.grad(self).data[0];
                   const Tensor& tl = t.value(logits);
                   Tensor& gl = t.grad_ref(logits);
                   const double inv_rows = 1.0 / static_cast<double>(tl.rows);
                   for (int r = 0; r < tl.rows; ++r) {
                     double mx = tl.at(r, 0);
                     for (int c = 1; c < tl.cols; ++c) mx = std::max(mx, tl.at(r, c));
                     double lse = 0.0;
                     for (int c = 0; c < tl.cols; ++c) lse += std::exp(tl.at(r, c) - mx);
                     for (int c = 0; c < tl.cols; ++c) {
                       const double p = std::exp(tl.at(r, c) - mx) / lse;
                       const double onehot = c == labels[r] ? 1.0 : 0.0;
                       gl.at(r, c) += g * (p - onehot) * inv_rows;
                     }
                   }
                 });
}

void Tape::backward(NodeId root) {
  require(root >= 0 && root < size(), "backward: bad root");
  const Tensor& rv = nodes_[root].value;
  require(rv.rows == 1 && rv.cols == 1, "backward: root must be scalar");
  for (auto& n : nodes_) {
    n.grad = Tensor(n.value.rows, n.value.cols);
  }
  nodes_[root].grad.data[0] = 1.0;
  for (NodeId id = root; id >= 0; --id) {
    if (nodes_[id].back) nodes_[id].back(*this);
  }
}

double grad_check(const std::function<NodeId(Tape&, std::span<const NodeId>)>& build,
                  const std::vector<Tensor>& params, double eps) {
  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<NodeId> ids;
    ids.reserve(params.size());
    for (const Tensor& p : params) ids.push_back(tape.input(p));
    const NodeId root = build(tape, ids);
    tape.backward(root);
    for (const NodeId id : ids) analytic.push_back(tape.grad(id));
  }

  const auto eval = [&](const std::vector<Tensor>& p) {
    Tape tape;
    std::vector<NodeId> ids;
    ids.reserve(p.size());
    for (const Tensor& t : p) ids.push_back(tape.input(t));
    return tape.value(build(tape, ids)).data[0];
  };

  double max_rel = 0.0;
  std::vector<Tensor> work = params;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    for (std::size_t i = 0; i < params[pi].data.size(); ++i) {
      const double orig = work[pi].data[i];
      work[pi].data[i] = orig + eps;
      const double fp = eval(work);
      work[pi].data[i] = orig - eps;
      const double fm = eval(work);
      work[pi].data[i] = orig;
      const double numeric = (fp - fm) / (2.0 * eps);
      const double a = analytic[pi].data[i];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace sgood
