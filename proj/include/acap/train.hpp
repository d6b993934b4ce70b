#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "acap/adam.hpp"
#include "acap/batch.hpp"
#include "acap/model.hpp"
#include "acap/rounding.hpp"

namespace acap {

struct TrainConfig {
    std::size_t batch_size = 16;
    double learning_rate = 1e-4;
    std::size_t patience_epochs = 100;
    int loss_round_digits = 3;
    double beta_clamp = 0.5;
    double dropout_p = 0.25;
    std::uint64_t rng_seed = 0;
    std::size_t max_epochs = 10000;
    LossMode loss_mode = LossMode::kCategorical;
    bool mask_padded_targets = false;  // default: padded eos positions carry loss too

    void validate() const {
        if (batch_size < 1) throw ConfigError("batch size must be >= 1");
        if (patience_epochs < 1) throw ConfigError("patience must be >= 1");
        if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
        if (max_epochs < 1) throw ConfigError("max epochs must be >= 1");
        if (loss_round_digits < 0 || loss_round_digits > 9) {
            throw ConfigError("loss rounding digits must lie in [0, 9]");
        }
        if (!(beta_clamp > 0.0 && beta_clamp <= 1.0)) {
            throw ConfigError("weight clamp must lie in (0, 1]");
        }
    }
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double raw_loss = 0.0;
    double rounded_loss = 0.0;
    double seconds = 0.0;
};

// Improvement means a strictly lower rounded loss. Patience counts epochs
// since the best; training stops once that count exceeds the allowance, so a
// run with patience P ends exactly P+1 epochs after its best.
class EarlyStopper {
public:
    explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

    bool observe(double rounded_loss, std::size_t epoch) {
        if (rounded_loss < best_) {
            best_ = rounded_loss;
            best_epoch_ = epoch;
            stale_ = 0;
            return true;
        }
        ++stale_;
        return false;
    }

    bool should_stop() const { return stale_ > patience_; }
    double best() const { return best_; }
    std::size_t best_epoch() const { return best_epoch_; }
    std::size_t stale() const { return stale_; }

private:
    std::size_t patience_;
    double best_ = std::numeric_limits<double>::infinity();
    std::size_t best_epoch_ = 0;
    std::size_t stale_ = 0;
};

enum class TrainStatus { kEarlyStopped, kMaxEpochs, kDiverged };

struct TrainResult {
    TrainStatus status = TrainStatus::kMaxEpochs;
    Model best;  // parameters from the best-rounded-loss epoch
    Model last;  // parameters after the final completed update
    std::vector<EpochRecord> records;
    std::size_t best_epoch = 0;
    std::string message;
};

// One optimization run. Shuffling reseeds per epoch as seed + epoch; the
// dropout stream forks off the same value so masks never alias the shuffle
// draws. The raw epoch loss is the example-weighted mean over all items.
// Divergence (non-finite loss or gradient) aborts with the parameters as of
// the last finite update still intact.
inline TrainResult train(const Model& initial, const std::vector<TrainExample>& examples,
                         const WeightTable& weights, std::size_t eos_index,
                         const TrainConfig& tcfg,
                         const std::function<void(const EpochRecord&)>& on_epoch = {}) {
    tcfg.validate();
    initial.cfg.validate();
    if (examples.empty()) throw EmptyDataError("cannot train on an empty example list");
    if (weights.phi.size() != initial.cfg.D) {
        throw DimensionError("weight table covers " + std::to_string(weights.phi.size()) +
                             " tokens, model expects " + std::to_string(initial.cfg.D));
    }
    if (eos_index >= initial.cfg.D) throw ContractError("eos index outside the vocabulary");

    Model model = initial.clone();
    AdamConfig acfg;
    acfg.lr = tcfg.learning_rate;
    AdamState adam(model.params, acfg);

    TrainResult res;
    res.best = model.clone();
    res.last = model.clone();
    EarlyStopper stopper(tcfg.patience_epochs);

    for (std::size_t epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const std::uint64_t epoch_seed = tcfg.rng_seed + epoch;
        SplitMix64 dropout_rng = SplitMix64(epoch_seed).fork(1);

        double loss_sum = 0.0;
        std::size_t item_count = 0;
        bool finite = true;

        const std::vector<Batch> batches =
            make_batches(examples, tcfg.batch_size, epoch_seed, eos_index);
        for (const Batch& batch : batches) {
            Tape tape(true);
            std::vector<NodePtr> item_losses;
            item_losses.reserve(batch.size());
            for (std::size_t b = 0; b < batch.size(); ++b) {
                const Tensor X = batch.item_features(b);
                const std::size_t limit =
                    tcfg.mask_padded_targets ? batch.target_lengths[b] : 0;
                item_losses.push_back(forward_loss(tape, model, X, batch.targets[b], weights,
                                                   true, &dropout_rng, tcfg.loss_mode, limit));
            }
            const NodePtr batch_loss = mean(tape, item_losses);
            const double lval = batch_loss->val[0];
            if (!std::isfinite(lval)) {
                res.status = TrainStatus::kDiverged;
                res.message = "loss became non-finite in epoch " + std::to_string(epoch);
                finite = false;
                break;
            }
            tape.backward(batch_loss);
            try {
                adam.step(model.params);
            } catch (const DivergenceError& e) {
                res.status = TrainStatus::kDiverged;
                res.message = std::string(e.what()) + " in epoch " + std::to_string(epoch);
                finite = false;
                break;
            }
            loss_sum += lval * static_cast<double>(batch.size());
            item_count += batch.size();
        }
        if (!finite) break;

        EpochRecord rec;
        rec.epoch = epoch;
        rec.raw_loss = loss_sum / static_cast<double>(item_count);
        rec.rounded_loss = round_to_digits(rec.raw_loss, tcfg.loss_round_digits);
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.records.push_back(rec);
        if (on_epoch) on_epoch(rec);

        if (stopper.observe(rec.rounded_loss, epoch)) {
            res.best = model.clone();
            res.best_epoch = epoch;
        }
        if (stopper.should_stop()) {
            res.status = TrainStatus::kEarlyStopped;
            break;
        }
        if (epoch == tcfg.max_epochs) res.status = TrainStatus::kMaxEpochs;
    }

    res.last = model.clone();
    if (res.best_epoch == 0) {
        res.best = model.clone();  // nothing ever improved on the initial record
    }
    return res;
}

// ---------------------------------------------------------------------------
// Inference over a split
// ---------------------------------------------------------------------------

struct EvalClip {
    std::string file_name;
    Tensor features;  // T x F
};

struct SplitPredictions {
    // file_name -> decoded tokens with the trailing eos stripped
    std::vector<std::pair<std::string, std::vector<std::size_t>>> predictions;
    std::vector<std::string> warnings;
};

// One dropout-free greedy decode per clip. Clips too short to survive the
// encoder's sub-sampling are skipped with a warning instead of failing the
// whole split.
inline SplitPredictions evaluate_split(Model& model, const std::vector<EvalClip>& clips,
                                       std::size_t eos_index) {
    SplitPredictions out;
    for (const EvalClip& clip : clips) {
        try {
            encoder_final_length(clip.features.rows(), model.cfg.M, model.cfg.L);
        } catch (const SequenceTooShortError&) {
            out.warnings.push_back("skipping \"" + clip.file_name + "\": " +
                                   std::to_string(clip.features.rows()) +
                                   " frames do not survive sub-sampling by " +
                                   std::to_string(model.cfg.M));
            continue;
        }
        std::vector<std::size_t> tokens = caption_features(model, clip.features, eos_index);
        if (!tokens.empty() && tokens.back() == eos_index) tokens.pop_back();
        out.predictions.emplace_back(clip.file_name, std::move(tokens));
    }
    return out;
}

inline void write_epochs_csv(const std::string& path, const std::vector<EpochRecord>& records) {
    std::ofstream os(path);
    if (!os) throw FileNotFoundError("cannot write " + path);
    os << "epoch,raw_loss,rounded_loss,seconds\n";
    char line[160];
    for (const EpochRecord& r : records) {
        std::snprintf(line, sizeof line, "%zu,%.17g,%.6g,%.3f\n", r.epoch, r.raw_loss,
                      r.rounded_loss, r.seconds);
        os << line;
    }
    if (!os) throw FormatError("short write on " + path);
}

}  // namespace acap
