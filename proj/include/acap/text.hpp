#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "acap/csv.hpp"
#include "acap/error.hpp"

namespace acap {

inline constexpr const char* kEosToken = "<eos>";

// ASCII lower-casing plus ASCII punctuation removal, then whitespace split,
// then the end-of-sequence token. Matches the dataset companion tooling;
// non-ASCII bytes pass through untouched.
inline std::vector<std::string> normalize_caption(const std::string& raw) {
    std::string cleaned;
    cleaned.reserve(raw.size());
    for (unsigned char c : raw) {
        if (c < 128 && std::ispunct(c)) continue;
        cleaned += static_cast<char>(c < 128 ? std::tolower(c) : c);
    }
    std::vector<std::string> tokens;
    std::string word;
    for (char c : cleaned + " ") {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!word.empty()) {
                tokens.push_back(word);
                word.clear();
            }
        } else {
            word += c;
        }
    }
    if (tokens.empty()) throw InvalidCaptionError("caption is empty after normalization");
    tokens.push_back(kEosToken);
    return tokens;
}

struct Vocabulary {
    std::vector<std::string> tokens;                       // index order
    std::unordered_map<std::string, std::size_t> index_of;
    std::vector<std::uint64_t> frequency;                  // index order
    std::size_t eos_index = 0;

    std::size_t size() const { return tokens.size(); }
};

// Tokens sorted lexicographically then indexed; frequencies counted over all
// normalized captions including the appended eos (so freq(eos) = number of
// captions). Order-independent with respect to caption file ordering.
inline Vocabulary build_vocab(const std::vector<std::string>& captions) {
    if (captions.empty()) throw ContractError("cannot build a vocabulary from zero captions");
    std::map<std::string, std::uint64_t> counts;
    for (const std::string& raw : captions) {
        for (const std::string& tok : normalize_caption(raw)) ++counts[tok];
    }
    Vocabulary vocab;
    vocab.tokens.reserve(counts.size());
    vocab.frequency.reserve(counts.size());
    for (const auto& [tok, freq] : counts) {
        vocab.index_of[tok] = vocab.tokens.size();
        vocab.tokens.push_back(tok);
        vocab.frequency.push_back(freq);
    }
    vocab.eos_index = vocab.index_of.at(kEosToken);
    return vocab;
}

inline std::vector<std::size_t> encode_caption(const std::vector<std::string>& tokens,
                                               const Vocabulary& vocab) {
    std::vector<std::size_t> indices;
    indices.reserve(tokens.size());
    for (const std::string& tok : tokens) {
        auto it = vocab.index_of.find(tok);
        if (it == vocab.index_of.end()) {
            throw UnknownTokenError("token not in vocabulary: \"" + tok + "\"");
        }
        indices.push_back(it->second);
    }
    if (indices.empty() || indices.back() != vocab.eos_index) {
        throw ContractError("encoded caption must end with the eos token");
    }
    return indices;
}

inline std::vector<std::string> decode_tokens(const std::vector<std::size_t>& indices,
                                              const Vocabulary& vocab) {
    std::vector<std::string> tokens;
    tokens.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= vocab.size()) throw ContractError("token index out of range");
        tokens.push_back(vocab.tokens[i]);
    }
    return tokens;
}

// Inverse-frequency loss weights, clamped from below: the rarest token gets
// exactly 1, a token of frequency f gets max(beta, min_freq / f).
struct WeightTable {
    std::vector<double> phi;  // by token index
    double beta = 0.5;

    double operator[](std::size_t index) const { return phi[index]; }
};

inline WeightTable token_weights(const Vocabulary& vocab, double beta = 0.5) {
    if (!(beta > 0.0 && beta <= 1.0)) {
        throw ConfigError("weight clamp beta must lie in (0, 1], got " + std::to_string(beta));
    }
    std::uint64_t min_freq = UINT64_MAX;
    for (std::uint64_t f : vocab.frequency) min_freq = std::min(min_freq, f);
    WeightTable table;
    table.beta = beta;
    table.phi.reserve(vocab.size());
    for (std::uint64_t f : vocab.frequency) {
        table.phi.push_back(std::max(beta, static_cast<double>(min_freq) / f));
    }
    return table;
}

inline WeightTable uniform_weights(std::size_t vocab_size) {
    WeightTable table;
    table.beta = 1.0;
    table.phi.assign(vocab_size, 1.0);
    return table;
}

// ---------------------------------------------------------------------------
// Caption CSV: header "file_name,caption_1,...,caption_5" (any caption count
// >= 1 is accepted).
// ---------------------------------------------------------------------------

struct CaptionRecord {
    std::string file_name;
    std::vector<std::string> captions;
};

inline std::vector<CaptionRecord> read_caption_csv(const std::string& path) {
    const auto rows = read_csv(path);
    if (rows.empty()) throw FormatError("caption CSV is empty: " + path);
    const auto& header = rows[0];
    if (header.empty() || header[0] != "file_name") {
        throw FormatError("caption CSV must start with a file_name column: " + path);
    }
    std::vector<CaptionRecord> records;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() < 2) {
            throw FormatError("caption CSV row " + std::to_string(r + 1) +
                              " has no captions: " + path);
        }
        CaptionRecord rec;
        rec.file_name = rows[r][0];
        rec.captions.assign(rows[r].begin() + 1, rows[r].end());
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw FormatError("caption CSV has no data rows: " + path);
    return records;
}

}  // namespace acap
