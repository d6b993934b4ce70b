#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "acap/error.hpp"
#include "acap/rounding.hpp"

namespace acap {

using TokenList = std::vector<std::string>;

struct EvaluationItem {
    std::string item_id;
    TokenList candidate;                 // may be empty: it scores zero, it does not throw
    std::vector<TokenList> references;   // at least one, each non-empty
};

inline void validate_items(const std::vector<EvaluationItem>& items) {
    if (items.empty()) throw EmptyDataError("no evaluation items");
    for (const EvaluationItem& it : items) {
        if (it.references.empty()) {
            throw ContractError("item \"" + it.item_id + "\" has no references");
        }
        for (const TokenList& r : it.references) {
            if (r.empty()) throw ContractError("item \"" + it.item_id + "\" has an empty reference");
        }
    }
}

namespace detail {

using NgramCounts = std::map<TokenList, std::size_t>;

inline NgramCounts ngram_counts(const TokenList& tokens, std::size_t n) {
    NgramCounts counts;
    if (tokens.size() >= n) {
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            counts[TokenList(tokens.begin() + i, tokens.begin() + i + n)] += 1;
        }
    }
    return counts;
}

inline std::size_t lcs_length(const TokenList& a, const TokenList& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace detail

// ---------------------------------------------------------------------------
// BLEU_n: corpus-level clipped n-gram precision, geometric mean over orders
// 1..n, brevity penalty from summed candidate and closest-reference lengths.
// No smoothing: a zero precision at any order zeroes the score.
// ---------------------------------------------------------------------------
inline double bleu(const std::vector<EvaluationItem>& items, std::size_t n) {
    if (n < 1 || n > 4) throw ConfigError("BLEU order must lie in [1, 4]");
    validate_items(items);

    std::vector<double> clipped(n, 0.0), total(n, 0.0);
    double c_sum = 0.0, r_sum = 0.0;
    for (const EvaluationItem& it : items) {
        const std::size_t c_len = it.candidate.size();
        c_sum += static_cast<double>(c_len);

        std::size_t best_ref = it.references.front().size();
        for (const TokenList& r : it.references) {
            const auto diff = [c_len](std::size_t len) {
                return len > c_len ? len - c_len : c_len - len;
            };
            if (diff(r.size()) < diff(best_ref) ||
                (diff(r.size()) == diff(best_ref) && r.size() < best_ref)) {
                best_ref = r.size();
            }
        }
        r_sum += static_cast<double>(best_ref);

        for (std::size_t k = 1; k <= n; ++k) {
            const detail::NgramCounts cand = detail::ngram_counts(it.candidate, k);
            detail::NgramCounts max_ref;
            for (const TokenList& r : it.references) {
                for (const auto& [gram, count] : detail::ngram_counts(r, k)) {
                    max_ref[gram] = std::max(max_ref[gram], count);
                }
            }
            for (const auto& [gram, count] : cand) {
                auto it_ref = max_ref.find(gram);
                const std::size_t cap = it_ref == max_ref.end() ? 0 : it_ref->second;
                clipped[k - 1] += static_cast<double>(std::min(count, cap));
            }
            if (c_len >= k) total[k - 1] += static_cast<double>(c_len - k + 1);
        }
    }

    if (c_sum == 0.0) return 0.0;
    double log_p = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (clipped[k] == 0.0 || total[k] == 0.0) return 0.0;
        log_p += std::log(clipped[k] / total[k]);
    }
    const double bp = c_sum >= r_sum ? 1.0 : std::exp(1.0 - r_sum / c_sum);
    return bp * std::exp(log_p / static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// ROUGE_L: per item, the best F-measure over references with recall favored
// (beta = 1.2); corpus score is the mean over items.
// ---------------------------------------------------------------------------
inline constexpr double kRougeBeta = 1.2;

inline double rouge_l(const std::vector<EvaluationItem>& items) {
    validate_items(items);
    const double b2 = kRougeBeta * kRougeBeta;
    double sum = 0.0;
    for (const EvaluationItem& it : items) {
        double best = 0.0;
        if (!it.candidate.empty()) {
            for (const TokenList& ref : it.references) {
                const double lcs = static_cast<double>(detail::lcs_length(it.candidate, ref));
                if (lcs == 0.0) continue;
                const double p = lcs / static_cast<double>(it.candidate.size());
                const double r = lcs / static_cast<double>(ref.size());
                best = std::max(best, (1.0 + b2) * p * r / (r + b2 * p));
            }
        }
        sum += best;
    }
    return sum / static_cast<double>(items.size());
}

// ---------------------------------------------------------------------------
// CIDEr-D: TF-IDF n-gram vectors for n = 1..4 with document frequencies over
// reference sets, candidate counts clipped to the reference's in the
// numerator, cosine normalization by the unclipped vectors, and a Gaussian
// penalty on the token-length difference (sigma = 6). Scores are scaled by
// 10 and averaged over n, references, and items.
// ---------------------------------------------------------------------------
inline constexpr double kCiderSigma = 6.0;

namespace detail {

struct TfidfVec {
    std::array<std::map<TokenList, double>, 4> vec;
    std::array<double, 4> norm{};
    double length = 0.0;
};

inline TfidfVec tfidf(const TokenList& tokens,
                      const std::array<std::map<TokenList, double>, 4>& df, double log_n) {
    TfidfVec out;
    out.length = static_cast<double>(tokens.size());
    for (std::size_t n = 0; n < 4; ++n) {
        for (const auto& [gram, count] : ngram_counts(tokens, n + 1)) {
            auto it = df[n].find(gram);
            const double d = it == df[n].end() ? 0.0 : it->second;
            const double idf = log_n - std::log(std::max(1.0, d));
            const double w = static_cast<double>(count) * idf;
            out.vec[n][gram] = w;
            out.norm[n] += w * w;
        }
        out.norm[n] = std::sqrt(out.norm[n]);
    }
    return out;
}

}  // namespace detail

inline double cider_d(const std::vector<EvaluationItem>& items) {
    validate_items(items);
    if (items.size() < 2) {
        throw EmptyDataError("CIDEr needs at least 2 items to form document frequencies");
    }

    std::array<std::map<TokenList, double>, 4> df;
    for (const EvaluationItem& it : items) {
        std::array<std::map<TokenList, bool>, 4> seen;
        for (const TokenList& ref : it.references) {
            for (std::size_t n = 0; n < 4; ++n) {
                for (const auto& [gram, count] : detail::ngram_counts(ref, n + 1)) {
                    seen[n][gram] = true;
                }
            }
        }
        for (std::size_t n = 0; n < 4; ++n) {
            for (const auto& [gram, flag] : seen[n]) df[n][gram] += 1.0;
        }
    }
    const double log_n = std::log(static_cast<double>(items.size()));

    double corpus = 0.0;
    for (const EvaluationItem& it : items) {
        const detail::TfidfVec cand = detail::tfidf(it.candidate, df, log_n);
        std::array<double, 4> score{};
        for (const TokenList& ref_tokens : it.references) {
            const detail::TfidfVec ref = detail::tfidf(ref_tokens, df, log_n);
            const double delta = cand.length - ref.length;
            const double penalty =
                std::exp(-(delta * delta) / (2.0 * kCiderSigma * kCiderSigma));
            for (std::size_t n = 0; n < 4; ++n) {
                double dot = 0.0;
                for (const auto& [gram, w] : cand.vec[n]) {
                    auto rit = ref.vec[n].find(gram);
                    if (rit != ref.vec[n].end()) dot += std::min(w, rit->second) * rit->second;
                }
                if (cand.norm[n] != 0.0 && ref.norm[n] != 0.0) {
                    dot /= cand.norm[n] * ref.norm[n];
                } else {
                    dot = 0.0;
                }
                score[n] += dot * penalty;
            }
        }
        double item_score = 0.0;
        for (std::size_t n = 0; n < 4; ++n) {
            item_score += score[n] / static_cast<double>(it.references.size());
        }
        corpus += item_score / 4.0 * 10.0;
    }
    return corpus / static_cast<double>(items.size());
}

inline double spider(double cider_value, double spice_value) {
    if (cider_value < 0.0 || spice_value < 0.0) {
        throw ContractError("SPIDEr inputs must be non-negative");
    }
    return (cider_value + spice_value) / 2.0;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct MetricsReport {
    double bleu_1 = 0.0, bleu_2 = 0.0, bleu_3 = 0.0, bleu_4 = 0.0;
    double rouge_l = 0.0;
    double cider = 0.0;
    std::optional<double> meteor;  // external, ingested from a sidecar
    std::optional<double> spice;   // external, ingested from a sidecar
    std::optional<double> spider;  // present only alongside spice
};

inline MetricsReport compute_metrics(const std::vector<EvaluationItem>& items,
                                     std::optional<double> meteor = std::nullopt,
                                     std::optional<double> spice = std::nullopt) {
    MetricsReport r;
    r.bleu_1 = bleu(items, 1);
    r.bleu_2 = bleu(items, 2);
    r.bleu_3 = bleu(items, 3);
    r.bleu_4 = bleu(items, 4);
    r.rouge_l = rouge_l(items);
    r.cider = cider_d(items);
    r.meteor = meteor;
    r.spice = spice;
    if (spice) r.spider = spider(r.cider, *spice);
    return r;
}

// Text table with one row per metric, three decimals, external metrics shown
// as "-" when absent.
inline std::string format_metrics_text(const MetricsReport& r) {
    const auto row = [](const char* label, const std::optional<double>& v) {
        char buf[64];
        if (v) {
            std::snprintf(buf, sizeof buf, "%-8s %.3f\n", label, round_to_digits(*v, 3));
        } else {
            std::snprintf(buf, sizeof buf, "%-8s -\n", label);
        }
        return std::string(buf);
    };
    std::string out;
    out += row("BLEU_1", r.bleu_1);
    out += row("BLEU_2", r.bleu_2);
    out += row("BLEU_3", r.bleu_3);
    out += row("BLEU_4", r.bleu_4);
    out += row("ROUGE_L", r.rouge_l);
    out += row("METEOR", r.meteor);
    out += row("CIDEr", r.cider);
    out += row("SPICE", r.spice);
    out += row("SPIDEr", r.spider);
    return out;
}

}  // namespace acap
