#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bocr {

// Levenshtein distance with unit costs, two-row dynamic programme.
template <typename T>
std::size_t min_edit_distance(std::span<const T> a, std::span<const T> b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// Character mode: distance over Unicode scalars of two UTF-8 strings.
std::size_t char_edit_distance(std::string_view hyp, std::string_view ref);
// Word mode: distance over whitespace-delimited tokens.
std::size_t word_edit_distance(std::string_view hyp, std::string_view ref);

std::vector<std::string> split_words(std::string_view text);

struct LineScore {
    std::string id;
    std::size_t char_med = 0;
    std::size_t ref_chars = 0;
    std::size_t word_med = 0;
    std::size_t ref_words = 0;
};

struct EvalReport {
    std::size_t total_chars = 0;
    std::size_t char_med_sum = 0;
    std::size_t total_words = 0;
    std::size_t word_med_sum = 0;
    double ca_percent = 0.0;
    double wa_percent = 0.0;
    std::vector<LineScore> per_line;
};

struct ScoredPair {
    std::string id;
    std::string hypothesis;
    std::string reference;
};

// CA = (1 - sum char MED / total ref chars) * 100, WA likewise over words.
// Not clamped: very long hypotheses can drive either below zero.
// Throws UndefinedMetric when the references hold no characters or no words.
EvalReport score_corpus(const std::vector<ScoredPair> &pairs);

// `id,char_med,ref_chars,word_med,ref_words` per line plus a TOTAL row.
std::string eval_csv(const EvalReport &report);
std::string eval_summary(const EvalReport &report);

} // namespace bocr
