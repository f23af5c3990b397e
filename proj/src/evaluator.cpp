#include "bocr/evaluator.hpp"

#include <cstdio>

#include "bocr/error.hpp"
#include "bocr/utf8.hpp"

namespace bocr {

std::size_t char_edit_distance(std::string_view hyp, std::string_view ref) {
    const std::u32string h = utf8::decode(hyp), r = utf8::decode(ref);
    return min_edit_distance<char32_t>(h, r);
}

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::string cur;
    for (char32_t cp : utf8::decode(text)) {
        const bool space = cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' ||
                           cp == U'\v' || cp == U'\f' || cp == 0x00A0 || cp == 0x3000 ||
                           (cp >= 0x2000 && cp <= 0x200A);
        if (space) {
            if (!cur.empty()) words.push_back(std::move(cur)), cur.clear();
        } else {
            utf8::append(cur, cp);
        }
    }
    if (!cur.empty()) words.push_back(std::move(cur));
    return words;
}

std::size_t word_edit_distance(std::string_view hyp, std::string_view ref) {
    const auto h = split_words(hyp), r = split_words(ref);
    return min_edit_distance<std::string>(h, r);
}

EvalReport score_corpus(const std::vector<ScoredPair> &pairs) {
    EvalReport report;
    for (const ScoredPair &p : pairs) {
        LineScore s;
        s.id = p.id;
        const std::u32string hyp = utf8::decode(p.hypothesis), ref = utf8::decode(p.reference);
        s.char_med = min_edit_distance<char32_t>(hyp, ref);
        s.ref_chars = ref.size();
        const auto hw = split_words(p.hypothesis), rw = split_words(p.reference);
        s.word_med = min_edit_distance<std::string>(hw, rw);
        s.ref_words = rw.size();
        report.total_chars += s.ref_chars;
        report.char_med_sum += s.char_med;
        report.total_words += s.ref_words;
        report.word_med_sum += s.word_med;
        report.per_line.push_back(std::move(s));
    }
    if (report.total_chars == 0) throw UndefinedMetric("character accuracy needs reference characters");
    if (report.total_words == 0) throw UndefinedMetric("word accuracy needs reference words");
    report.ca_percent = (1.0 - static_cast<double>(report.char_med_sum) /
                                   static_cast<double>(report.total_chars)) * 100.0;
    report.wa_percent = (1.0 - static_cast<double>(report.word_med_sum) /
                                   static_cast<double>(report.total_words)) * 100.0;
    return report;
}

std::string eval_csv(const EvalReport &report) {
    std::string out = "id,char_med,ref_chars,word_med,ref_words\n";
    auto row = [&](const std::string &id, std::size_t cm, std::size_t rc, std::size_t wm,
                   std::size_t rw) {
        out += id + ',' + std::to_string(cm) + ',' + std::to_string(rc) + ',' + std::to_string(wm) +
               ',' + std::to_string(rw) + '\n';
    };
    for (const LineScore &s : report.per_line) row(s.id, s.char_med, s.ref_chars, s.word_med, s.ref_words);
    row("TOTAL", report.char_med_sum, report.total_chars, report.word_med_sum, report.total_words);
    return out;
}

std::string eval_summary(const EvalReport &report) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "lines:               %zu\n"
                  "reference chars:     %zu\n"
                  "char edit distance:  %zu\n"
                  "character accuracy:  %.2f%%\n"
                  "reference words:     %zu\n"
                  "word edit distance:  %zu\n"
                  "word accuracy:       %.2f%%\n",
                  report.per_line.size(), report.total_chars, report.char_med_sum, report.ca_percent,
                  report.total_words, report.word_med_sum, report.wa_percent);
    return buf;
}

} // namespace bocr
