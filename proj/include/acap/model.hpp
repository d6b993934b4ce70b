#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "acap/graph.hpp"
#include "acap/rng.hpp"
#include "acap/tensor.hpp"
#include "acap/text.hpp"

namespace acap {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ModelConfig {
    std::size_t L = 3;          // encoder bi-directional layers
    std::size_t Xi = 256;       // per-direction encoder hidden size
    std::size_t Psi = 256;      // decoder hidden size
    std::size_t M = 1;          // temporal sub-sampling factor
    std::size_t F = 64;         // input features per frame
    std::size_t D = 0;          // vocabulary size (from the data)
    double dropout_p = 0.25;
    std::size_t S_max = 22;     // decode step cap

    std::size_t delta() const { return 2 * Xi; }  // concatenated bi-dir width

    void validate() const {
        if (L < 2) throw ConfigError("encoder needs at least 2 layers");
        if (M < 1) throw ConfigError("sub-sampling factor must be >= 1");
        if (Xi == 0 || Psi == 0 || F == 0 || D == 0 || S_max == 0) {
            throw ConfigError("all model sizes must be >= 1");
        }
        if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
            throw ConfigError("dropout probability must lie in [0, 1)");
        }
    }

    bool operator==(const ModelConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Parameters. Each GRU direction owns four tensors with gates packed in
// r|z|n order: w_ih [I x 3H], w_hh [H x 3H], b_ih [3H], b_hh [3H].
// ---------------------------------------------------------------------------

struct ParamSpec {
    std::string name;
    std::vector<std::size_t> shape;
    double init_bound;  // uniform(-bound, bound)
};

namespace detail {

inline void push_gru_specs(std::vector<ParamSpec>& out, const std::string& prefix,
                           std::size_t input, std::size_t hidden) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    out.push_back({prefix + ".w_ih", {input, 3 * hidden}, bound});
    out.push_back({prefix + ".w_hh", {hidden, 3 * hidden}, bound});
    out.push_back({prefix + ".b_ih", {3 * hidden}, bound});
    out.push_back({prefix + ".b_hh", {3 * hidden}, bound});
}

}  // namespace detail

inline std::vector<ParamSpec> parameter_shapes(const ModelConfig& cfg) {
    cfg.validate();
    std::vector<ParamSpec> specs;
    for (std::size_t l = 1; l <= cfg.L; ++l) {
        const std::size_t input = l == 1 ? cfg.F : cfg.delta();
        const std::string base = "encoder.l" + std::to_string(l);
        detail::push_gru_specs(specs, base + ".fwd", input, cfg.Xi);
        detail::push_gru_specs(specs, base + ".bwd", input, cfg.Xi);
    }
    detail::push_gru_specs(specs, "decoder", cfg.delta(), cfg.Psi);
    const double cls_bound = 1.0 / std::sqrt(static_cast<double>(cfg.Psi));
    specs.push_back({"classifier.w", {cfg.Psi, cfg.D}, cls_bound});
    specs.push_back({"classifier.b", {cfg.D}, cls_bound});
    return specs;
}

// Total parameter element count. Independent of M: sub-sampling is
// parameter-free.
inline std::size_t param_count(const ModelConfig& cfg) {
    std::size_t n = 0;
    for (const ParamSpec& s : parameter_shapes(cfg)) n += Tensor::count(s.shape);
    return n;
}

struct Model {
    ModelConfig cfg;
    ParamStore params;

    static Model init(const ModelConfig& cfg, std::uint64_t seed) {
        Model m;
        m.cfg = cfg;
        SplitMix64 rng(seed);
        for (const ParamSpec& s : parameter_shapes(cfg)) {
            Tensor t(s.shape);
            for (double& x : t.v) x = rng.uniform(-s.init_bound, s.init_bound);
            m.params.add(s.name, std::move(t));
        }
        return m;
    }

    static Model zeros(const ModelConfig& cfg) {
        Model m;
        m.cfg = cfg;
        for (const ParamSpec& s : parameter_shapes(cfg)) m.params.add(s.name, Tensor(s.shape));
        return m;
    }

    Model clone() const {
        Model m;
        m.cfg = cfg;
        m.params = params.clone();
        return m;
    }
};

// ---------------------------------------------------------------------------
// Recurrent cell and encoder
// ---------------------------------------------------------------------------

struct GruNodes {
    NodePtr w_ih, w_hh, b_ih, b_hh;
    std::size_t hidden;
};

inline GruNodes bind_gru(Tape& t, ParamStore& store, const std::string& prefix) {
    GruNodes g;
    g.w_ih = t.leaf(store.at(prefix + ".w_ih"));
    g.w_hh = t.leaf(store.at(prefix + ".w_hh"));
    g.b_ih = t.leaf(store.at(prefix + ".b_ih"));
    g.b_hh = t.leaf(store.at(prefix + ".b_hh"));
    g.hidden = g.w_hh->val.rows();
    return g;
}

// One gated-recurrent-unit update. Reset and update gates from the logistic
// sigmoid, candidate from tanh with the reset gate applied to the hidden-side
// pre-activation, output the convex blend z*h + (1-z)*n.
inline NodePtr gru_step(Tape& t, const GruNodes& p, const NodePtr& x, const NodePtr& h_prev) {
    const std::size_t H = p.hidden;
    const NodePtr gi = affine(t, x, p.w_ih, p.b_ih);
    const NodePtr gh = affine(t, h_prev, p.w_hh, p.b_hh);
    const NodePtr r = sigmoid(t, add(t, slice(t, gi, 0, H), slice(t, gh, 0, H)));
    const NodePtr z = sigmoid(t, add(t, slice(t, gi, H, H), slice(t, gh, H, H)));
    const NodePtr n = tanh_op(t, add(t, slice(t, gi, 2 * H, H), mul(t, r, slice(t, gh, 2 * H, H))));
    const NodePtr keep = mul(t, z, h_prev);
    const NodePtr ones = t.constant(Tensor::full({H}, 1.0));
    const NodePtr take = mul(t, sub(t, ones, z), n);
    return add(t, keep, take);
}

inline std::vector<NodePtr> run_gru(Tape& t, const GruNodes& p, const std::vector<NodePtr>& xs,
                                    bool reversed) {
    std::vector<NodePtr> out(xs.size());
    NodePtr h = t.constant(Tensor::zeros({p.hidden}));
    if (reversed) {
        for (std::size_t i = xs.size(); i-- > 0;) {
            h = gru_step(t, p, xs[i], h);
            out[i] = h;
        }
    } else {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            h = gru_step(t, p, xs[i], h);
            out[i] = h;
        }
    }
    return out;
}

// Forward and time-reversed passes from zero states, concatenated per step.
inline std::vector<NodePtr> bidir_layer(Tape& t, const GruNodes& fwd, const GruNodes& bwd,
                                        const std::vector<NodePtr>& xs) {
    if (xs.empty()) throw SequenceTooShortError("bi-directional layer on an empty sequence");
    const std::vector<NodePtr> f = run_gru(t, fwd, xs, false);
    const std::vector<NodePtr> b = run_gru(t, bwd, xs, true);
    std::vector<NodePtr> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = concat(t, f[i], b[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Temporal sub-sampling: keep rows 1, M+1, 2M+1, ... (1-based), i.e. exactly
// floor(T/M) rows.
// ---------------------------------------------------------------------------

inline std::size_t subsampled_length(std::size_t T, std::size_t M) {
    if (M < 1) throw ConfigError("sub-sampling factor must be >= 1");
    const std::size_t kept = T / M;
    if (kept == 0) {
        throw SequenceTooShortError("sequence of " + std::to_string(T) +
                                    " steps cannot be sub-sampled by factor " + std::to_string(M));
    }
    return kept;
}

template <typename Seq>
Seq subsample_rows(const Seq& seq, std::size_t M) {
    const std::size_t kept = subsampled_length(seq.size(), M);
    Seq out;
    out.reserve(kept);
    for (std::size_t i = 0; i < kept; ++i) out.push_back(seq[i * M]);
    return out;
}

inline Tensor subsample(const Tensor& H, std::size_t M) {
    if (H.rank() != 2) throw DimensionError("subsample wants a T x W matrix, got " + H.shape_str());
    const std::size_t kept = subsampled_length(H.rows(), M);
    const std::size_t W = H.cols();
    Tensor out({kept, W});
    for (std::size_t i = 0; i < kept; ++i) {
        const double* src = H.v.data() + (i * M) * W;
        std::copy(src, src + W, out.v.data() + i * W);
    }
    return out;
}

// Final encoder length after L-1 sub-sampling stages.
inline std::size_t encoder_final_length(std::size_t T, std::size_t M, std::size_t L) {
    std::size_t len = T;
    for (std::size_t l = 2; l <= L; ++l) len = subsampled_length(len, M);
    return len;
}

// ---------------------------------------------------------------------------
// Encoder / decoder
// ---------------------------------------------------------------------------

struct EncodeResult {
    NodePtr z;                 // context vector, width 2*Xi
    std::size_t final_length;  // T_L
};

// Layer 1 runs on the raw features (no residual: width F != 2*Xi). Each later
// layer sees the sub-sampled previous output, dropout-regularized when
// training, and adds that sub-sampled sequence back on top of its own output.
// The context vector is the last step of the final layer.
inline EncodeResult encode(Tape& t, Model& model, const Tensor& X, bool training = false,
                           SplitMix64* dropout_rng = nullptr) {
    const ModelConfig& cfg = model.cfg;
    if (X.rank() != 2 || X.cols() != cfg.F) {
        throw DimensionError("encoder input must be T x " + std::to_string(cfg.F) + ", got " +
                             X.shape_str());
    }
    if (training && cfg.dropout_p > 0.0 && dropout_rng == nullptr) {
        throw ContractError("training-mode encode needs a dropout RNG");
    }

    std::vector<NodePtr> seq;
    seq.reserve(X.rows());
    for (std::size_t r = 0; r < X.rows(); ++r) {
        Tensor row({cfg.F});
        std::copy(X.v.begin() + r * cfg.F, X.v.begin() + (r + 1) * cfg.F, row.v.begin());
        seq.push_back(t.constant(std::move(row)));
    }

    {
        const GruNodes fwd = bind_gru(t, model.params, "encoder.l1.fwd");
        const GruNodes bwd = bind_gru(t, model.params, "encoder.l1.bwd");
        seq = bidir_layer(t, fwd, bwd, seq);
    }

    for (std::size_t l = 2; l <= cfg.L; ++l) {
        const std::vector<NodePtr> kept = subsample_rows(seq, cfg.M);
        std::vector<NodePtr> layer_in = kept;
        if (training && cfg.dropout_p > 0.0) {
            for (NodePtr& row : layer_in) {
                row = dropout(t, row, cfg.dropout_p, *dropout_rng, true);
            }
        }
        const std::string base = "encoder.l" + std::to_string(l);
        const GruNodes fwd = bind_gru(t, model.params, base + ".fwd");
        const GruNodes bwd = bind_gru(t, model.params, base + ".bwd");
        std::vector<NodePtr> layer_out = bidir_layer(t, fwd, bwd, layer_in);
        for (std::size_t i = 0; i < layer_out.size(); ++i) {
            layer_out[i] = add(t, layer_out[i], kept[i]);  // residual
        }
        seq = std::move(layer_out);
    }

    return {seq.back(), seq.size()};
}

struct DecodeStep {
    NodePtr y;  // word distribution over D
    NodePtr u;  // next decoder state
};

// The decoder consumes the context vector at every step; it never sees the
// previously emitted word.
inline DecodeStep decode_step(Tape& t, Model& model, const NodePtr& z, const NodePtr& u_prev) {
    const GruNodes dec = bind_gru(t, model.params, "decoder");
    const NodePtr u = gru_step(t, dec, z, u_prev);
    const NodePtr w = t.leaf(model.params.at("classifier.w"));
    const NodePtr b = t.leaf(model.params.at("classifier.b"));
    const NodePtr y = softmax(t, affine(t, u, w, b));
    return {y, u};
}

inline NodePtr decoder_initial_state(Tape& t, const ModelConfig& cfg) {
    return t.constant(Tensor::zeros({cfg.Psi}));
}

// Argmax decoding (ties -> lowest index), stopping after eos or after S_max
// steps; a forced eos terminates capped sequences.
inline std::vector<std::size_t> greedy_decode(Tape& t, Model& model, const NodePtr& z,
                                              std::size_t eos_index) {
    std::vector<std::size_t> out;
    NodePtr u = decoder_initial_state(t, model.cfg);
    for (std::size_t s = 0; s < model.cfg.S_max; ++s) {
        const DecodeStep step = decode_step(t, model, z, u);
        u = step.u;
        const Tensor& y = step.y->val;
        std::size_t best = 0;
        for (std::size_t d = 1; d < y.numel(); ++d) {
            if (y[d] > y[best]) best = d;
        }
        out.push_back(best);
        if (best == eos_index) return out;
    }
    out.push_back(eos_index);
    return out;
}

// Encode-then-decode for one clip on a gradient-free tape.
inline std::vector<std::size_t> caption_features(Model& model, const Tensor& X,
                                                 std::size_t eos_index) {
    Tape t(false);
    const EncodeResult enc = encode(t, model, X, false, nullptr);
    return greedy_decode(t, model, enc.z, eos_index);
}

// Mean over target positions of the frequency-weighted cross-entropy. By
// default every position of Y contributes, padded eos tail included; a
// nonzero position_limit restricts the mean to the leading positions.
inline NodePtr forward_loss(Tape& t, Model& model, const Tensor& X,
                            const std::vector<std::size_t>& targets, const WeightTable& weights,
                            bool training = false, SplitMix64* dropout_rng = nullptr,
                            LossMode mode = LossMode::kCategorical,
                            std::size_t position_limit = 0) {
    if (targets.empty()) throw ContractError("forward_loss needs a non-empty target sequence");
    const std::size_t S =
        position_limit == 0 ? targets.size() : std::min(position_limit, targets.size());
    const EncodeResult enc = encode(t, model, X, training, dropout_rng);
    NodePtr u = decoder_initial_state(t, model.cfg);
    std::vector<NodePtr> losses;
    losses.reserve(S);
    for (std::size_t s = 0; s < S; ++s) {
        const DecodeStep step = decode_step(t, model, enc.z, u);
        u = step.u;
        losses.push_back(weighted_cross_entropy(t, step.y, targets[s], weights[targets[s]], mode));
    }
    return mean(t, losses);
}

// ---------------------------------------------------------------------------
// Checkpoints: "SSCP", version u16, config block, then each parameter as
// name length/name/rank/extents (u32) and values (f64). Little-endian.
// ---------------------------------------------------------------------------

inline constexpr std::uint16_t kCheckpointVersion = 1;

namespace detail {

inline void write_u16(std::ostream& os, std::uint16_t x) {
    const unsigned char b[2] = {static_cast<unsigned char>(x & 0xFF),
                                static_cast<unsigned char>(x >> 8)};
    os.write(reinterpret_cast<const char*>(b), 2);
}

inline void write_u32(std::ostream& os, std::uint32_t x) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((x >> (8 * i)) & 0xFF);
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_f64(std::ostream& os, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint16_t read_u16(std::istream& is) {
    unsigned char b[2];
    is.read(reinterpret_cast<char*>(b), 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return x;
}

inline double read_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const Model& model) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FileNotFoundError("cannot write checkpoint: " + path);
    os.write("SSCP", 4);
    detail::write_u16(os, kCheckpointVersion);
    const ModelConfig& c = model.cfg;
    detail::write_u32(os, static_cast<std::uint32_t>(c.L));
    detail::write_u32(os, static_cast<std::uint32_t>(c.Xi));
    detail::write_u32(os, static_cast<std::uint32_t>(c.Psi));
    detail::write_u32(os, static_cast<std::uint32_t>(c.M));
    detail::write_u32(os, static_cast<std::uint32_t>(c.F));
    detail::write_u32(os, static_cast<std::uint32_t>(c.D));
    detail::write_u32(os, static_cast<std::uint32_t>(c.S_max));
    detail::write_f64(os, c.dropout_p);
    detail::write_u32(os, static_cast<std::uint32_t>(model.params.size()));
    for (std::size_t i = 0; i < model.params.size(); ++i) {
        const Param& p = model.params[i];
        detail::write_u32(os, static_cast<std::uint32_t>(p.name.size()));
        os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        detail::write_u32(os, static_cast<std::uint32_t>(p.value.rank()));
        for (std::size_t e : p.value.shape) detail::write_u32(os, static_cast<std::uint32_t>(e));
        for (double x : p.value.v) detail::write_f64(os, x);
    }
    if (!os) throw FormatError("short write on checkpoint: " + path);
}

inline Model load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FileNotFoundError("cannot open checkpoint: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "SSCP", 4) != 0) {
        throw FormatError("bad checkpoint magic: " + path);
    }
    const std::uint16_t version = detail::read_u16(is);
    if (version != kCheckpointVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version));
    }
    ModelConfig cfg;
    cfg.L = detail::read_u32(is);
    cfg.Xi = detail::read_u32(is);
    cfg.Psi = detail::read_u32(is);
    cfg.M = detail::read_u32(is);
    cfg.F = detail::read_u32(is);
    cfg.D = detail::read_u32(is);
    cfg.S_max = detail::read_u32(is);
    cfg.dropout_p = detail::read_f64(is);
    if (!is) throw FormatError("truncated checkpoint header: " + path);
    cfg.validate();

    const std::vector<ParamSpec> expected = parameter_shapes(cfg);
    const std::uint32_t n = detail::read_u32(is);
    if (n != expected.size()) {
        throw FormatError("checkpoint parameter count " + std::to_string(n) +
                          " does not match config (" + std::to_string(expected.size()) + ")");
    }

    Model model;
    model.cfg = cfg;
    for (const ParamSpec& spec : expected) {
        const std::uint32_t name_len = detail::read_u32(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        if (name != spec.name) {
            throw FormatError("checkpoint parameter \"" + name + "\" where \"" + spec.name +
                              "\" was expected");
        }
        const std::uint32_t rank = detail::read_u32(is);
        std::vector<std::size_t> shape(rank);
        for (std::uint32_t r = 0; r < rank; ++r) shape[r] = detail::read_u32(is);
        if (shape != spec.shape) {
            throw FormatError("checkpoint parameter \"" + name + "\" has the wrong shape");
        }
        Tensor t(shape);
        for (double& x : t.v) x = detail::read_f64(is);
        if (!is) throw FormatError("truncated checkpoint tensor: " + name);
        model.params.add(name, std::move(t));
    }
    return model;
}

}  // namespace acap
