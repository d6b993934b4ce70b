// Minimal end-to-end library walk-through on synthetic data: synthesize a
// clip, extract log mel features, train a tiny captioner for a few epochs,
// and decode its caption.

#include <cmath>
#include <cstdio>
#include <vector>

#include "acap/io.hpp"
#include "acap/mel.hpp"
#include "acap/train.hpp"
#include "acap/wav.hpp"

int main() {
    using namespace acap;

    AudioClip clip;
    clip.sample_rate = 16000;
    clip.samples.resize(16000);
    for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        clip.samples[i] = 0.4 * std::sin(2.0 * 3.14159265358979 * 440.0 * i / 16000.0);
    }

    FeatureExtractionConfig fcfg;
    fcfg.window_length = 256;
    fcfg.hop_length = 128;
    fcfg.num_mels = 8;
    const FeatureSequence feats = log_mel(clip, fcfg, "sine.wav");
    std::printf("features: %zu frames x %zu bands\n", feats.frames(), feats.bands());

    const Vocabulary vocab = build_vocab({"a steady tone hums"});
    const WeightTable weights = token_weights(vocab);

    ModelConfig mcfg;
    mcfg.L = 2;
    mcfg.Xi = 12;
    mcfg.Psi = 12;
    mcfg.M = 4;
    mcfg.F = fcfg.num_mels;
    mcfg.D = vocab.size();
    mcfg.dropout_p = 0.0;
    std::printf("parameters: %zu\n", param_count(mcfg));

    std::vector<TrainExample> examples{{
        "sine.wav",
        feats.data,
        encode_caption(normalize_caption("a steady tone hums"), vocab),
    }};

    TrainConfig tcfg;
    tcfg.batch_size = 1;
    tcfg.learning_rate = 5e-3;
    tcfg.dropout_p = 0.0;
    tcfg.max_epochs = 150;
    tcfg.patience_epochs = 50;
    const TrainResult result =
        train(Model::init(mcfg, 7), examples, weights, vocab.eos_index, tcfg);
    std::printf("trained %zu epochs, best rounded loss %.3f\n", result.records.size(),
                result.records.empty() ? 0.0 : result.records[result.best_epoch - 1].rounded_loss);

    Model best = result.best.clone();
    std::vector<std::size_t> decoded = caption_features(best, feats.data, vocab.eos_index);
    if (!decoded.empty() && decoded.back() == vocab.eos_index) decoded.pop_back();
    std::printf("caption:");
    for (const std::string& tok : decode_tokens(decoded, vocab)) std::printf(" %s", tok.c_str());
    std::printf("\n");
    return 0;
}
