#pragma once

// A small synthetic corpus that a desk-scale model can memorize quickly:
// eight clips with disjoint spectral signatures and two-word captions.
// Shared between the unit suite and the acceptance gate.

#include <string>
#include <vector>

#include "acap/batch.hpp"
#include "acap/model.hpp"
#include "acap/rng.hpp"
#include "acap/tensor.hpp"
#include "acap/text.hpp"

namespace fixtures {

inline const std::vector<std::string>& overfit_names() {
    static const std::vector<std::string> names = {"alpha", "bravo", "delta", "echo",
                                                   "golf",  "hotel", "kilo",  "lima"};
    return names;
}

inline std::string overfit_caption(std::size_t k) { return overfit_names()[k] + " sound"; }

// Clip k: energy concentrated in band k with a deterministic ripple so rows
// are not constant, plus a separate length per clip.
inline acap::Tensor overfit_features(std::size_t k) {
    const std::size_t T = 18 + k;
    const std::size_t F = 8;
    acap::Tensor X({T, F});
    acap::SplitMix64 rng(1000 + k);
    for (std::size_t r = 0; r < T; ++r) {
        for (std::size_t f = 0; f < F; ++f) {
            double v = f == k ? 1.0 : -0.2;
            v += 0.1 * static_cast<double>((r + f) % 3);
            v += rng.uniform(-0.02, 0.02);
            X.at(r, f) = v;
        }
    }
    return X;
}

struct OverfitData {
    std::vector<acap::TrainExample> examples;
    acap::Vocabulary vocab;
    acap::WeightTable weights;
};

inline OverfitData overfit_data() {
    OverfitData d;
    std::vector<std::string> captions;
    for (std::size_t k = 0; k < 8; ++k) captions.push_back(overfit_caption(k));
    d.vocab = acap::build_vocab(captions);
    d.weights = acap::token_weights(d.vocab, 0.5);
    for (std::size_t k = 0; k < 8; ++k) {
        acap::TrainExample ex;
        ex.file_name = overfit_names()[k] + ".wav";
        ex.features = overfit_features(k);
        ex.targets = acap::encode_caption(acap::normalize_caption(captions[k]), d.vocab);
        d.examples.push_back(std::move(ex));
    }
    return d;
}

inline acap::ModelConfig overfit_model_config(std::size_t vocab_size) {
    acap::ModelConfig cfg;
    cfg.L = 2;
    cfg.Xi = 16;
    cfg.Psi = 16;
    cfg.M = 2;
    cfg.F = 8;
    cfg.D = vocab_size;
    cfg.dropout_p = 0.0;
    cfg.S_max = 6;
    return cfg;
}

}  // namespace fixtures
