#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "acap/error.hpp"
#include "acap/rng.hpp"
#include "acap/tensor.hpp"

namespace acap {

// One (clip, caption) pair ready for the optimizer. A clip with several
// reference captions appears once per caption, sharing the feature matrix.
struct TrainExample {
    std::string file_name;
    Tensor features;                   // T x F
    std::vector<std::size_t> targets;  // token indices, eos last
};

// Items padded to a common shape. Feature padding rows are all-zero and sit
// at the FRONT; target padding repeats eos at the BACK.
struct Batch {
    Tensor features;                                // B x T_max x F
    std::vector<std::size_t> feature_valid_from;    // first non-pad row per item
    std::vector<std::vector<std::size_t>> targets;  // each padded to the batch max S
    std::vector<std::size_t> target_lengths;        // original S per item
    std::vector<std::size_t> example_index;         // position in the source list

    std::size_t size() const { return feature_valid_from.size(); }
    std::size_t max_frames() const { return features.shape[1]; }

    Tensor item_features(std::size_t b) const {
        const std::size_t T = features.shape[1];
        const std::size_t F = features.shape[2];
        Tensor out({T, F});
        const double* src = features.v.data() + b * T * F;
        std::copy(src, src + T * F, out.v.data());
        return out;
    }
};

inline std::vector<Batch> make_batches(const std::vector<TrainExample>& examples,
                                       std::size_t batch_size, std::uint64_t seed,
                                       std::size_t eos_index) {
    if (examples.empty()) throw EmptyDataError("cannot batch an empty example list");
    if (batch_size == 0) throw ConfigError("batch size must be >= 1");
    for (const TrainExample& ex : examples) {
        if (ex.features.rank() != 2 || ex.features.rows() == 0) {
            throw ContractError("example \"" + ex.file_name + "\" has no feature rows");
        }
        if (ex.targets.empty()) {
            throw ContractError("example \"" + ex.file_name + "\" has no target tokens");
        }
    }
    const std::size_t F = examples.front().features.cols();

    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    SplitMix64 rng(seed);
    shuffle(order, rng);

    std::vector<Batch> batches;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t B = std::min(batch_size, order.size() - start);
        std::size_t T_max = 0;
        std::size_t S_max = 0;
        for (std::size_t b = 0; b < B; ++b) {
            const TrainExample& ex = examples[order[start + b]];
            if (ex.features.cols() != F) {
                throw DimensionError("example \"" + ex.file_name + "\" has " +
                                     std::to_string(ex.features.cols()) +
                                     " feature bands where " + std::to_string(F) +
                                     " were expected");
            }
            T_max = std::max(T_max, ex.features.rows());
            S_max = std::max(S_max, ex.targets.size());
        }

        Batch batch;
        batch.features = Tensor({B, T_max, F});
        for (std::size_t b = 0; b < B; ++b) {
            const TrainExample& ex = examples[order[start + b]];
            const std::size_t T = ex.features.rows();
            const std::size_t pad = T_max - T;
            std::copy(ex.features.v.begin(), ex.features.v.end(),
                      batch.features.v.begin() + (b * T_max + pad) * F);
            batch.feature_valid_from.push_back(pad);

            std::vector<std::size_t> padded = ex.targets;
            padded.resize(S_max, eos_index);
            batch.targets.push_back(std::move(padded));
            batch.target_lengths.push_back(ex.targets.size());
            batch.example_index.push_back(order[start + b]);
        }
        batches.push_back(std::move(batch));
    }
    return batches;
}

}  // namespace acap
