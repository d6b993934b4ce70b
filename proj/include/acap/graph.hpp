#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "acap/error.hpp"
#include "acap/rng.hpp"
#include "acap/tensor.hpp"

namespace acap {

// ---------------------------------------------------------------------------
// Parameter storage
// ---------------------------------------------------------------------------

struct Param {
    std::string name;
    Tensor value;
    Tensor grad;  // same shape as value
};

// Named parameters with paired gradient buffers. Iteration follows insertion
// order, which fixes checkpoint layout and makes training bit-reproducible.
class ParamStore {
public:
    Param& add(const std::string& name, Tensor init) {
        if (index_.count(name)) {
            throw ContractError("duplicate parameter name: " + name);
        }
        auto p = std::make_unique<Param>();
        p->name = name;
        p->grad = Tensor::zeros(init.shape);
        p->value = std::move(init);
        index_[name] = order_.size();
        order_.push_back(std::move(p));
        return *order_.back();
    }

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    Param& at(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw ContractError("unknown parameter: " + name);
        return *order_[it->second];
    }

    const Param& at(const std::string& name) const {
        return const_cast<ParamStore*>(this)->at(name);
    }

    std::size_t size() const { return order_.size(); }

    Param& operator[](std::size_t i) { return *order_[i]; }
    const Param& operator[](std::size_t i) const { return *order_[i]; }

    std::size_t total_values() const {
        std::size_t n = 0;
        for (const auto& p : order_) n += p->value.numel();
        return n;
    }

    void zero_grads() {
        for (auto& p : order_) p->grad.fill(0.0);
    }

    // Deep copy of names and values; gradients start at zero.
    ParamStore clone() const {
        ParamStore out;
        for (const auto& p : order_) out.add(p->name, p->value);
        return out;
    }

private:
    std::vector<std::unique_ptr<Param>> order_;
    std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// Reverse-mode tape
// ---------------------------------------------------------------------------

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
    Tensor val;
    Tensor grad;  // allocated on first use during the backward sweep
    std::function<void(Node&)> back;
    bool needs_grad = false;
    Param* bound = nullptr;  // leaf bound to a ParamStore entry

    Tensor& g() {
        if (grad.numel() == 0) grad = Tensor::zeros(val.shape);
        return grad;
    }
    bool has_grad() const { return grad.numel() != 0; }
};

// Records operations in execution order; `backward` replays them in reverse.
// With gradients disabled (inference) nothing is recorded and intermediate
// values are freed as soon as the caller drops them.
class Tape {
public:
    explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    ~Tape() { clear(); }

    bool grad_enabled() const { return grad_enabled_; }

    NodePtr constant(Tensor t) {
        auto n = std::make_shared<Node>();
        n->val = std::move(t);
        return n;
    }

    // One node per Param per tape, so gradients from shared use accumulate.
    NodePtr leaf(Param& p) {
        auto it = leaves_.find(&p);
        if (it != leaves_.end()) return it->second;
        auto n = std::make_shared<Node>();
        n->val = p.value;
        n->needs_grad = grad_enabled_;
        n->bound = &p;
        if (grad_enabled_) order_.push_back(n);
        leaves_[&p] = n;
        return n;
    }

    NodePtr make(Tensor val, std::initializer_list<NodePtr> parents,
                 std::function<void(Node&)> back) {
        auto n = std::make_shared<Node>();
        n->val = std::move(val);
        if (grad_enabled_) {
            for (const auto& p : parents) {
                if (p->needs_grad) {
                    n->needs_grad = true;
                    break;
                }
            }
        }
        if (n->needs_grad) {
            n->back = std::move(back);
            order_.push_back(n);
        }
        return n;
    }

    // Seeds d(loss)/d(loss) = 1, sweeps the tape in reverse, then adds leaf
    // gradients into their ParamStore buffers.
    void backward(const NodePtr& loss) {
        if (!grad_enabled_) throw ContractError("backward on a gradient-free tape");
        if (loss->val.numel() != 1) {
            throw DimensionError("backward needs a scalar loss, got " + loss->val.shape_str());
        }
        loss->g()[0] += 1.0;
        for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
            Node& n = **it;
            if (n.back && n.has_grad()) n.back(n);
        }
        for (auto& [param, node] : leaves_) {
            if (!node->has_grad()) continue;
            for (std::size_t i = 0; i < param->grad.numel(); ++i) {
                param->grad[i] += node->grad[i];
            }
        }
    }

    // Pop from the back so shared_ptr release never recurses down long chains.
    void clear() {
        leaves_.clear();
        while (!order_.empty()) order_.pop_back();
    }

private:
    bool grad_enabled_;
    std::vector<NodePtr> order_;
    std::unordered_map<Param*, NodePtr> leaves_;
};

// ---------------------------------------------------------------------------
// Differentiable operations
// ---------------------------------------------------------------------------

namespace detail {

inline void accumulate(Node& parent, const Tensor& delta) {
    Tensor& g = parent.g();
    for (std::size_t i = 0; i < delta.numel(); ++i) g[i] += delta[i];
}

}  // namespace detail

// x.W + b. Accepts x as [N x I] (returns [N x O]) or as a vector [I]
// (returns [O]). W is [I x O], b is [O].
inline NodePtr affine(Tape& t, const NodePtr& x, const NodePtr& W, const NodePtr& b) {
    const Tensor& xv = x->val;
    const Tensor& Wv = W->val;
    const Tensor& bv = b->val;
    const bool vec = xv.rank() == 1;
    const std::size_t N = vec ? 1 : xv.rows();
    const std::size_t I = vec ? xv.numel() : xv.cols();
    if (Wv.rank() != 2 || Wv.rows() != I) {
        throw DimensionError("affine: x " + xv.shape_str() + " vs W " + Wv.shape_str());
    }
    const std::size_t O = Wv.cols();
    if (bv.rank() != 1 || bv.numel() != O) {
        throw DimensionError("affine: W " + Wv.shape_str() + " vs b " + bv.shape_str());
    }

    Tensor out = vec ? Tensor({O}) : Tensor({N, O});
    for (std::size_t n = 0; n < N; ++n) {
        double* orow = out.v.data() + n * O;
        for (std::size_t o = 0; o < O; ++o) orow[o] = bv[o];
        const double* xrow = xv.v.data() + n * I;
        for (std::size_t i = 0; i < I; ++i) {
            const double xi = xrow[i];
            const double* wrow = Wv.v.data() + i * O;
            for (std::size_t o = 0; o < O; ++o) orow[o] += xi * wrow[o];
        }
    }

    return t.make(std::move(out), {x, W, b}, [x, W, b, N, I, O](Node& n) {
        const Tensor& g = n.grad;
        if (x->needs_grad) {
            Tensor& gx = x->g();
            for (std::size_t r = 0; r < N; ++r) {
                const double* grow = g.v.data() + r * O;
                double* gxrow = gx.v.data() + r * I;
                for (std::size_t i = 0; i < I; ++i) {
                    const double* wrow = W->val.v.data() + i * O;
                    double acc = 0.0;
                    for (std::size_t o = 0; o < O; ++o) acc += grow[o] * wrow[o];
                    gxrow[i] += acc;
                }
            }
        }
        if (W->needs_grad) {
            Tensor& gW = W->g();
            for (std::size_t r = 0; r < N; ++r) {
                const double* xrow = x->val.v.data() + r * I;
                const double* grow = g.v.data() + r * O;
                for (std::size_t i = 0; i < I; ++i) {
                    const double xi = xrow[i];
                    double* gwrow = gW.v.data() + i * O;
                    for (std::size_t o = 0; o < O; ++o) gwrow[o] += xi * grow[o];
                }
            }
        }
        if (b->needs_grad) {
            Tensor& gb = b->g();
            for (std::size_t r = 0; r < N; ++r) {
                const double* grow = g.v.data() + r * O;
                for (std::size_t o = 0; o < O; ++o) gb[o] += grow[o];
            }
        }
    });
}

inline NodePtr add(Tape& t, const NodePtr& a, const NodePtr& b) {
    require_same_shape(a->val, b->val, "add");
    Tensor out = a->val;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b->val[i];
    return t.make(std::move(out), {a, b}, [a, b](Node& n) {
        if (a->needs_grad) detail::accumulate(*a, n.grad);
        if (b->needs_grad) detail::accumulate(*b, n.grad);
    });
}

inline NodePtr sub(Tape& t, const NodePtr& a, const NodePtr& b) {
    require_same_shape(a->val, b->val, "sub");
    Tensor out = a->val;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= b->val[i];
    return t.make(std::move(out), {a, b}, [a, b](Node& n) {
        if (a->needs_grad) detail::accumulate(*a, n.grad);
        if (b->needs_grad) {
            Tensor& g = b->g();
            for (std::size_t i = 0; i < n.grad.numel(); ++i) g[i] -= n.grad[i];
        }
    });
}

inline NodePtr mul(Tape& t, const NodePtr& a, const NodePtr& b) {
    require_same_shape(a->val, b->val, "mul");
    Tensor out = a->val;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= b->val[i];
    return t.make(std::move(out), {a, b}, [a, b](Node& n) {
        if (a->needs_grad) {
            Tensor& g = a->g();
            for (std::size_t i = 0; i < n.grad.numel(); ++i) g[i] += n.grad[i] * b->val[i];
        }
        if (b->needs_grad) {
            Tensor& g = b->g();
            for (std::size_t i = 0; i < n.grad.numel(); ++i) g[i] += n.grad[i] * a->val[i];
        }
    });
}

inline NodePtr scale(Tape& t, const NodePtr& a, double c) {
    Tensor out = a->val;
    for (double& x : out.v) x *= c;
    return t.make(std::move(out), {a}, [a, c](Node& n) {
        if (!a->needs_grad) return;
        Tensor& g = a->g();
        for (std::size_t i = 0; i < n.grad.numel(); ++i) g[i] += c * n.grad[i];
    });
}

inline NodePtr sigmoid(Tape& t, const NodePtr& a) {
    Tensor out = a->val;
    for (double& x : out.v) {
        // split on sign so neither exp overflows
        x = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    }
    return t.make(out, {a}, [a, out](Node& n) {
        if (!a->needs_grad) return;
        Tensor& g = a->g();
        for (std::size_t i = 0; i < n.grad.numel(); ++i) {
            const double y = out[i];
            g[i] += n.grad[i] * y * (1.0 - y);
        }
    });
}

inline NodePtr tanh_op(Tape& t, const NodePtr& a) {
    Tensor out = a->val;
    for (double& x : out.v) x = std::tanh(x);
    return t.make(out, {a}, [a, out](Node& n) {
        if (!a->needs_grad) return;
        Tensor& g = a->g();
        for (std::size_t i = 0; i < n.grad.numel(); ++i) {
            const double y = out[i];
            g[i] += n.grad[i] * (1.0 - y * y);
        }
    });
}

// Contiguous slice of a vector.
inline NodePtr slice(Tape& t, const NodePtr& a, std::size_t offset, std::size_t len) {
    if (a->val.rank() != 1 || offset + len > a->val.numel()) {
        throw DimensionError("slice [" + std::to_string(offset) + ", +" + std::to_string(len) +
                             ") out of " + a->val.shape_str());
    }
    Tensor out({len});
    std::copy(a->val.v.begin() + offset, a->val.v.begin() + offset + len, out.v.begin());
    return t.make(std::move(out), {a}, [a, offset, len](Node& n) {
        if (!a->needs_grad) return;
        Tensor& g = a->g();
        for (std::size_t i = 0; i < len; ++i) g[offset + i] += n.grad[i];
    });
}

inline NodePtr concat(Tape& t, const NodePtr& a, const NodePtr& b) {
    if (a->val.rank() != 1 || b->val.rank() != 1) {
        throw DimensionError("concat wants vectors, got " + a->val.shape_str() + " and " +
                             b->val.shape_str());
    }
    const std::size_t na = a->val.numel();
    const std::size_t nb = b->val.numel();
    Tensor out({na + nb});
    std::copy(a->val.v.begin(), a->val.v.end(), out.v.begin());
    std::copy(b->val.v.begin(), b->val.v.end(), out.v.begin() + na);
    return t.make(std::move(out), {a, b}, [a, b, na, nb](Node& n) {
        if (a->needs_grad) {
            Tensor& g = a->g();
            for (std::size_t i = 0; i < na; ++i) g[i] += n.grad[i];
        }
        if (b->needs_grad) {
            Tensor& g = b->g();
            for (std::size_t i = 0; i < nb; ++i) g[i] += n.grad[na + i];
        }
    });
}

// Max-subtracted softmax over a vector. Output sums to 1 within 1e-12 and is
// invariant to adding a constant to the input.
inline NodePtr softmax(Tape& t, const NodePtr& a) {
    if (a->val.rank() != 1 || a->val.numel() == 0) {
        throw DimensionError("softmax wants a non-empty vector, got " + a->val.shape_str());
    }
    Tensor out = a->val;
    const double mx = *std::max_element(out.v.begin(), out.v.end());
    double sum = 0.0;
    for (double& x : out.v) {
        x = std::exp(x - mx);
        sum += x;
    }
    for (double& x : out.v) x /= sum;
    return t.make(out, {a}, [a, out](Node& n) {
        if (!a->needs_grad) return;
        double dot = 0.0;
        for (std::size_t i = 0; i < out.numel(); ++i) dot += n.grad[i] * out[i];
        Tensor& g = a->g();
        for (std::size_t i = 0; i < out.numel(); ++i) g[i] += out[i] * (n.grad[i] - dot);
    });
}

enum class LossMode {
    // -log of the true-class probability. Default pairing for a softmax
    // classifier with one-hot targets.
    kCategorical,
    // Literal per-coordinate binary cross-entropy summed over all classes.
    kBinary,
};

inline constexpr double kProbFloor = 1e-12;

namespace detail {
inline double clamp_prob(double p) {
    return std::min(std::max(p, kProbFloor), 1.0 - kProbFloor);
}
}  // namespace detail

// phi-weighted cross-entropy of a probability vector against a class index.
// Probabilities are clamped to [1e-12, 1 - 1e-12] before any log; a clamped
// coordinate passes zero gradient.
inline NodePtr weighted_cross_entropy(Tape& t, const NodePtr& yhat, std::size_t y_index,
                                      double phi, LossMode mode = LossMode::kCategorical) {
    const Tensor& p = yhat->val;
    if (p.rank() != 1 || p.numel() == 0) {
        throw DimensionError("cross-entropy wants a probability vector, got " + p.shape_str());
    }
    if (y_index >= p.numel()) {
        throw ContractError("target index " + std::to_string(y_index) + " out of range for " +
                            p.shape_str());
    }
    if (!(phi > 0.0)) throw ContractError("loss weight must be positive");
    double sum = 0.0;
    for (double x : p.v) sum += x;
    if (std::abs(sum - 1.0) > 1e-6) {
        throw ContractError("cross-entropy input sums to " + std::to_string(sum) +
                            ", not a probability vector");
    }

    double loss = 0.0;
    if (mode == LossMode::kCategorical) {
        loss = -phi * std::log(detail::clamp_prob(p[y_index]));
    } else {
        for (std::size_t d = 0; d < p.numel(); ++d) {
            const double pc = detail::clamp_prob(p[d]);
            loss -= phi * (d == y_index ? std::log(pc) : std::log(1.0 - pc));
        }
    }

    return t.make(Tensor({1}, {loss}), {yhat}, [yhat, y_index, phi, mode](Node& n) {
        if (!yhat->needs_grad) return;
        const double gs = n.grad[0];
        const Tensor& p = yhat->val;
        Tensor& g = yhat->g();
        if (mode == LossMode::kCategorical) {
            const double raw = p[y_index];
            if (raw > kProbFloor && raw < 1.0 - kProbFloor) {
                g[y_index] += gs * (-phi / raw);
            }
        } else {
            for (std::size_t d = 0; d < p.numel(); ++d) {
                const double raw = p[d];
                if (raw <= kProbFloor || raw >= 1.0 - kProbFloor) continue;
                g[d] += gs * (d == y_index ? -phi / raw : phi / (1.0 - raw));
            }
        }
    });
}

// Inverted dropout coefficients: 0 with probability p, else 1/(1-p).
inline Tensor dropout_coeffs(const std::vector<std::size_t>& shape, double p, SplitMix64& rng) {
    if (!(p >= 0.0 && p < 1.0)) {
        throw ConfigError("dropout probability must be in [0, 1), got " + std::to_string(p));
    }
    Tensor c(shape);
    const double keep_scale = 1.0 / (1.0 - p);
    for (double& x : c.v) x = rng.next_double() < p ? 0.0 : keep_scale;
    return c;
}

// Tensor-level inverted dropout; identity in inference mode.
inline Tensor dropout(const Tensor& x, double p, SplitMix64& rng, bool training) {
    if (!(p >= 0.0 && p < 1.0)) {
        throw ConfigError("dropout probability must be in [0, 1), got " + std::to_string(p));
    }
    if (!training || p == 0.0) return x;
    Tensor c = dropout_coeffs(x.shape, p, rng);
    Tensor out = x;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= c[i];
    return out;
}

// Tape-level dropout. The mask depends only on the RNG stream, never on the
// values, so a fixed seed keeps the op differentiable and reproducible.
inline NodePtr dropout(Tape& t, const NodePtr& x, double p, SplitMix64& rng, bool training) {
    if (!(p >= 0.0 && p < 1.0)) {
        throw ConfigError("dropout probability must be in [0, 1), got " + std::to_string(p));
    }
    if (!training || p == 0.0) return x;
    Tensor c = dropout_coeffs(x->val.shape, p, rng);
    Tensor out = x->val;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= c[i];
    return t.make(std::move(out), {x}, [x, c](Node& n) {
        if (!x->needs_grad) return;
        Tensor& g = x->g();
        for (std::size_t i = 0; i < n.grad.numel(); ++i) g[i] += n.grad[i] * c[i];
    });
}

// Mean of scalar nodes.
inline NodePtr mean(Tape& t, const std::vector<NodePtr>& scalars) {
    if (scalars.empty()) throw ContractError("mean of zero scalars");
    NodePtr total = scalars[0];
    for (std::size_t i = 1; i < scalars.size(); ++i) total = add(t, total, scalars[i]);
    return scale(t, total, 1.0 / static_cast<double>(scalars.size()));
}

}  // namespace acap
