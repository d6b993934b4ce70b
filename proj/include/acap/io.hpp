#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "acap/csv.hpp"
#include "acap/mel.hpp"
#include "acap/metrics.hpp"
#include "acap/model.hpp"
#include "acap/text.hpp"
#include "acap/train.hpp"

namespace acap {

using json = nlohmann::json;

namespace detail {

inline json parse_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FileNotFoundError("cannot open " + path);
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

inline void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                                const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown key \"" + key + "\" in " + where);
        }
    }
}

template <typename T>
void maybe_get(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) {
        try {
            out = obj.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(std::string("bad value for \"") + key + "\"");
        }
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Vocabulary file: {"tokens": [{"token": ..., "frequency": ...}, ...],
// "beta": ...}. Array order is index order and must stay lexicographic.
// ---------------------------------------------------------------------------

inline void write_vocab_json(const std::string& path, const Vocabulary& vocab, double beta) {
    json tokens = json::array();
    for (std::size_t i = 0; i < vocab.tokens.size(); ++i) {
        tokens.push_back({{"token", vocab.tokens[i]}, {"frequency", vocab.frequency[i]}});
    }
    const json doc = {{"tokens", tokens}, {"beta", beta}};
    std::ofstream os(path);
    if (!os) throw FileNotFoundError("cannot write " + path);
    os << doc.dump(2) << '\n';
    if (!os) throw FormatError("short write on " + path);
}

struct VocabFile {
    Vocabulary vocab;
    double beta = 0.5;
};

inline VocabFile read_vocab_json(const std::string& path) {
    const json doc = detail::parse_json_file(path);
    detail::reject_unknown_keys(doc, {"tokens", "beta"}, path);
    if (!doc.contains("tokens") || !doc.at("tokens").is_array() || doc.at("tokens").empty()) {
        throw FormatError(path + ": missing or empty \"tokens\" array");
    }
    VocabFile out;
    detail::maybe_get(doc, "beta", out.beta);
    for (const json& entry : doc.at("tokens")) {
        detail::reject_unknown_keys(entry, {"token", "frequency"}, path + " token entry");
        std::string token;
        std::size_t freq = 0;
        detail::maybe_get(entry, "token", token);
        detail::maybe_get(entry, "frequency", freq);
        if (token.empty() || freq == 0) {
            throw FormatError(path + ": token entries need a token and a positive frequency");
        }
        if (!out.vocab.tokens.empty() && token <= out.vocab.tokens.back()) {
            throw FormatError(path + ": tokens must be strictly increasing (\"" + token +
                              "\" after \"" + out.vocab.tokens.back() + "\")");
        }
        out.vocab.index_of[token] = out.vocab.tokens.size();
        out.vocab.tokens.push_back(token);
        out.vocab.frequency.push_back(freq);
    }
    const auto it = out.vocab.index_of.find(kEosToken);
    if (it == out.vocab.index_of.end()) {
        throw FormatError(path + ": vocabulary lacks the " + std::string(kEosToken) + " token");
    }
    out.vocab.eos_index = it->second;
    return out;
}

// ---------------------------------------------------------------------------
// Run configuration. JSON sections mirror the structs; unknown keys are
// rejected so typos cannot silently fall back to defaults. The model's F
// always tracks the feature band count, and D comes from the vocabulary, so
// neither is configurable here.
// ---------------------------------------------------------------------------

struct RunPaths {
    std::string audio_dir;
    std::string captions_csv;
    std::string features_dir;
    std::string output_dir;
};

struct RunConfig {
    FeatureExtractionConfig features;
    ModelConfig model;
    TrainConfig training;
    RunPaths paths;

    // Mirror the fields that other sections own.
    void resolve() {
        model.F = features.num_mels;
        model.dropout_p = training.dropout_p;
    }
};

inline const char* loss_mode_name(LossMode mode) {
    return mode == LossMode::kCategorical ? "categorical" : "binary";
}

inline LossMode loss_mode_from_name(const std::string& name) {
    if (name == "categorical") return LossMode::kCategorical;
    if (name == "binary") return LossMode::kBinary;
    throw ConfigError("loss_mode must be \"categorical\" or \"binary\", got \"" + name + "\"");
}

inline json run_config_to_json(const RunConfig& rc) {
    return {
        {"features",
         {{"window_length", rc.features.window_length},
          {"hop_length", rc.features.hop_length},
          {"num_mels", rc.features.num_mels},
          {"centered", rc.features.centered},
          {"log_floor", rc.features.log_floor},
          {"mel_fmin", rc.features.mel_fmin},
          {"mel_fmax", rc.features.mel_fmax}}},
        {"model",
         {{"layers", rc.model.L},
          {"encoder_hidden", rc.model.Xi},
          {"decoder_hidden", rc.model.Psi},
          {"subsample_factor", rc.model.M},
          {"max_decode_steps", rc.model.S_max}}},
        {"training",
         {{"batch_size", rc.training.batch_size},
          {"learning_rate", rc.training.learning_rate},
          {"patience_epochs", rc.training.patience_epochs},
          {"loss_round_digits", rc.training.loss_round_digits},
          {"weight_clamp", rc.training.beta_clamp},
          {"dropout", rc.training.dropout_p},
          {"rng_seed", rc.training.rng_seed},
          {"max_epochs", rc.training.max_epochs},
          {"loss_mode", loss_mode_name(rc.training.loss_mode)},
          {"mask_padded_targets", rc.training.mask_padded_targets}}},
        {"paths",
         {{"audio_dir", rc.paths.audio_dir},
          {"captions_csv", rc.paths.captions_csv},
          {"features_dir", rc.paths.features_dir},
          {"output_dir", rc.paths.output_dir}}},
    };
}

// Overlay `doc` onto `base`: absent keys keep their current values.
inline RunConfig run_config_from_json(const json& doc, RunConfig base = {}) {
    detail::reject_unknown_keys(doc, {"features", "model", "training", "paths"}, "config");
    if (doc.contains("features")) {
        const json& f = doc.at("features");
        detail::reject_unknown_keys(f,
                                    {"window_length", "hop_length", "num_mels", "centered",
                                     "log_floor", "mel_fmin", "mel_fmax"},
                                    "config.features");
        detail::maybe_get(f, "window_length", base.features.window_length);
        detail::maybe_get(f, "hop_length", base.features.hop_length);
        detail::maybe_get(f, "num_mels", base.features.num_mels);
        detail::maybe_get(f, "centered", base.features.centered);
        detail::maybe_get(f, "log_floor", base.features.log_floor);
        detail::maybe_get(f, "mel_fmin", base.features.mel_fmin);
        detail::maybe_get(f, "mel_fmax", base.features.mel_fmax);
    }
    if (doc.contains("model")) {
        const json& m = doc.at("model");
        detail::reject_unknown_keys(
            m, {"layers", "encoder_hidden", "decoder_hidden", "subsample_factor",
                "max_decode_steps"},
            "config.model");
        detail::maybe_get(m, "layers", base.model.L);
        detail::maybe_get(m, "encoder_hidden", base.model.Xi);
        detail::maybe_get(m, "decoder_hidden", base.model.Psi);
        detail::maybe_get(m, "subsample_factor", base.model.M);
        detail::maybe_get(m, "max_decode_steps", base.model.S_max);
    }
    if (doc.contains("training")) {
        const json& t = doc.at("training");
        detail::reject_unknown_keys(
            t,
            {"batch_size", "learning_rate", "patience_epochs", "loss_round_digits",
             "weight_clamp", "dropout", "rng_seed", "max_epochs", "loss_mode",
             "mask_padded_targets"},
            "config.training");
        detail::maybe_get(t, "batch_size", base.training.batch_size);
        detail::maybe_get(t, "learning_rate", base.training.learning_rate);
        detail::maybe_get(t, "patience_epochs", base.training.patience_epochs);
        detail::maybe_get(t, "loss_round_digits", base.training.loss_round_digits);
        detail::maybe_get(t, "weight_clamp", base.training.beta_clamp);
        detail::maybe_get(t, "dropout", base.training.dropout_p);
        detail::maybe_get(t, "rng_seed", base.training.rng_seed);
        detail::maybe_get(t, "max_epochs", base.training.max_epochs);
        if (t.contains("loss_mode")) {
            std::string name;
            detail::maybe_get(t, "loss_mode", name);
            base.training.loss_mode = loss_mode_from_name(name);
        }
        detail::maybe_get(t, "mask_padded_targets", base.training.mask_padded_targets);
    }
    if (doc.contains("paths")) {
        const json& p = doc.at("paths");
        detail::reject_unknown_keys(p, {"audio_dir", "captions_csv", "features_dir", "output_dir"},
                                    "config.paths");
        detail::maybe_get(p, "audio_dir", base.paths.audio_dir);
        detail::maybe_get(p, "captions_csv", base.paths.captions_csv);
        detail::maybe_get(p, "features_dir", base.paths.features_dir);
        detail::maybe_get(p, "output_dir", base.paths.output_dir);
    }
    base.resolve();
    return base;
}

inline RunConfig read_run_config(const std::string& path, RunConfig base = {}) {
    return run_config_from_json(detail::parse_json_file(path), std::move(base));
}

inline void write_run_config(const std::string& path, const RunConfig& rc) {
    std::ofstream os(path);
    if (!os) throw FileNotFoundError("cannot write " + path);
    os << run_config_to_json(rc).dump(2) << '\n';
    if (!os) throw FormatError("short write on " + path);
}

// ---------------------------------------------------------------------------
// External metric sidecar: {"meteor": number?, "spice": number?}
// ---------------------------------------------------------------------------

struct Sidecar {
    std::optional<double> meteor;
    std::optional<double> spice;
};

inline Sidecar read_sidecar(const std::string& path) {
    const json doc = detail::parse_json_file(path);
    detail::reject_unknown_keys(doc, {"meteor", "spice"}, path);
    Sidecar out;
    if (doc.contains("meteor") && !doc.at("meteor").is_null()) {
        double v = 0.0;
        detail::maybe_get(doc, "meteor", v);
        out.meteor = v;
    }
    if (doc.contains("spice") && !doc.at("spice").is_null()) {
        double v = 0.0;
        detail::maybe_get(doc, "spice", v);
        out.spice = v;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metric reports
// ---------------------------------------------------------------------------

inline json metrics_report_json(const MetricsReport& r) {
    json doc = {{"bleu_1", r.bleu_1}, {"bleu_2", r.bleu_2}, {"bleu_3", r.bleu_3},
                {"bleu_4", r.bleu_4}, {"rouge_l", r.rouge_l}, {"cider", r.cider}};
    if (r.meteor) doc["meteor"] = *r.meteor;
    if (r.spice) doc["spice"] = *r.spice;
    if (r.spider) doc["spider"] = *r.spider;
    return doc;
}

inline void write_report_files(const std::string& json_path, const std::string& text_path,
                               const MetricsReport& r) {
    {
        std::ofstream os(json_path);
        if (!os) throw FileNotFoundError("cannot write " + json_path);
        os << metrics_report_json(r).dump(2) << '\n';
    }
    {
        std::ofstream os(text_path);
        if (!os) throw FileNotFoundError("cannot write " + text_path);
        os << format_metrics_text(r);
    }
}

// ---------------------------------------------------------------------------
// Predictions CSV: "file_name,caption_predicted"
// ---------------------------------------------------------------------------

inline void write_predictions_csv(const std::string& path,
                                  const std::vector<std::pair<std::string, std::string>>& rows) {
    std::ofstream os(path);
    if (!os) throw FileNotFoundError("cannot write " + path);
    os << "file_name,caption_predicted\n";
    for (const auto& [file_name, caption] : rows) {
        os << csv_escape(file_name) << ',' << csv_escape(caption) << '\n';
    }
    if (!os) throw FormatError("short write on " + path);
}

inline std::vector<std::pair<std::string, std::string>> read_predictions_csv(
    const std::string& path) {
    const std::vector<std::vector<std::string>> rows = read_csv(path);
    if (rows.empty() || rows.front().size() < 2 || rows.front()[0] != "file_name") {
        throw FormatError(path + ": expected a header starting with file_name");
    }
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() < 2) throw FormatError(path + ": row " + std::to_string(i) + " is short");
        out.emplace_back(rows[i][0], rows[i][1]);
    }
    return out;
}

}  // namespace acap
