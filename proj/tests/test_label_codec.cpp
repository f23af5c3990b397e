#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "bocr/error.hpp"
#include "bocr/label_codec.hpp"
#include "bocr/numeric.hpp"
#include "bocr/utf8.hpp"

using namespace bocr;

namespace {

constexpr char32_t kKa = 0x0995, kTa = 0x09A4, kNa = 0x09A8, kRa = 0x09B0, kHalant = 0x09CD;

std::string u8(std::u32string_view s) { return utf8::encode(s); }

std::vector<char32_t> consonants(const LabelAlphabet &a) {
    std::vector<char32_t> out;
    for (char32_t cp : a.symbols())
        if (cp >= 0x0995 && cp <= 0x09B9) out.push_back(cp);
    return out;
}

} // namespace

TEST(Alphabet, DefaultHas165SymbolsAndBlankLast) {
    const LabelAlphabet a = default_alphabet();
    EXPECT_EQ(a.symbol_count(), 165u);
    EXPECT_EQ(a.num_classes(), 166u);
    EXPECT_EQ(a.blank_index(), 165);
    EXPECT_EQ(a.name(), "bengali-english");
    EXPECT_EQ(a.version(), 1);
}

TEST(Alphabet, DefaultCoversTheDocumentedGroups) {
    const LabelAlphabet a = default_alphabet();
    for (char32_t cp : {kKa, kHalant, char32_t{0x0964}, char32_t{0x09E6}, char32_t{' '}}) EXPECT_TRUE(a.contains(cp));
    for (char32_t c = 'A'; c <= 'Z'; ++c) EXPECT_TRUE(a.contains(c));
    for (char32_t c = 'a'; c <= 'z'; ++c) EXPECT_TRUE(a.contains(c));
    for (char32_t c = '0'; c <= '9'; ++c) EXPECT_TRUE(a.contains(c));
}

TEST(Alphabet, DuplicateRejected) {
    EXPECT_THROW(load_alphabet("U+0995\nU+0996\nU+0995\n", true), ManifestError);
    EXPECT_THROW(load_alphabet("a\nU+0061\n", true), ManifestError);
}

TEST(Alphabet, CountEnforcedUnlessRelaxed) {
    EXPECT_THROW(load_alphabet(synthetic_alphabet_manifest()), ManifestError);
    const LabelAlphabet s = load_alphabet(synthetic_alphabet_manifest(), true);
    EXPECT_EQ(s.symbol_count(), 20u);
    EXPECT_EQ(s.num_classes(), 21u);
    EXPECT_EQ(s.blank_index(), 20);
    EXPECT_EQ(s, synthetic_alphabet());
}

TEST(Alphabet, EmptyRejectedEvenWhenRelaxed) {
    EXPECT_THROW(load_alphabet("# nothing here\n\n", true), ManifestError);
}

TEST(Alphabet, ManifestSyntax) {
    const LabelAlphabet a = load_alphabet("# name: demo\n# version: 3\n\nU+0995  # ka\nb\n  u+0020\n\xE0\xA6\x96\n", true);
    EXPECT_EQ(a.name(), "demo");
    EXPECT_EQ(a.version(), 3);
    EXPECT_EQ(a.symbols(), (std::vector<char32_t>{kKa, U'b', U' ', 0x0996}));
    EXPECT_EQ(a.index_of(U'b'), 1);
    EXPECT_EQ(a.index_of(U'z'), -1);
}

TEST(Alphabet, MalformedEntriesRejected) {
    EXPECT_THROW(load_alphabet("ab\n", true), ManifestError);
    EXPECT_THROW(load_alphabet("U+XYZ\n", true), ManifestError);
    EXPECT_THROW(load_alphabet("U+D800\n", true), ManifestError);
    EXPECT_THROW(load_alphabet("U+110000\n", true), ManifestError);
    EXPECT_THROW(load_alphabet("\xFF\n", true), ManifestError);
    EXPECT_THROW(load_alphabet("# version: x\na\n", true), ManifestError);
}

TEST(Alphabet, ReloadKeepsIndices) {
    for (const LabelAlphabet &a : {default_alphabet(), synthetic_alphabet()}) {
        const LabelAlphabet b = load_alphabet(save_alphabet(a), true);
        EXPECT_EQ(a, b);
        for (std::size_t i = 0; i < a.symbol_count(); ++i)
            EXPECT_EQ(b.index_of(a.symbols()[i]), static_cast<int>(i));
        EXPECT_EQ(save_alphabet(b), save_alphabet(a));
    }
}

TEST(Alphabet, ShippedFileMatchesBuiltIn) {
    const std::string dir = BOCR_DATA_DIR;
    EXPECT_EQ(load_alphabet_file(dir + "/alphabets/bengali_english_v1.txt"), default_alphabet());
    EXPECT_EQ(load_alphabet_file(dir + "/alphabets/synthetic_21.txt", true), synthetic_alphabet());
    EXPECT_THROW(load_alphabet_file(dir + "/alphabets/missing.txt"), IoError);
}

TEST(Codec, SingleConsonant) {
    const LabelAlphabet a = default_alphabet();
    EXPECT_EQ(encode_text(a, u8(U"ক")), LabelSeq{a.index_of(kKa)});
}

TEST(Codec, ConjunctIsThreeLabels) {
    const LabelAlphabet a = default_alphabet();
    const std::string kta = u8(std::u32string{kKa, kHalant, kTa});
    EXPECT_EQ(encode_text(a, kta), (LabelSeq{a.index_of(kKa), a.index_of(kHalant), a.index_of(kTa)}));
}

TEST(Codec, EnglishCase) {
    const LabelAlphabet a = default_alphabet();
    const LabelSeq l = encode_text(a, "Ab");
    EXPECT_EQ(l, (LabelSeq{a.index_of(U'A'), a.index_of(U'b')}));
    EXPECT_NE(a.index_of(U'A'), a.index_of(U'a'));
}

TEST(Codec, UnsupportedSymbolNamesCodepointAndOffset) {
    const LabelAlphabet a = default_alphabet();
    try {
        encode_text(a, u8(U"কx€"));
        FAIL() << "expected UnsupportedSymbol";
    } catch (const UnsupportedSymbol &e) {
        EXPECT_EQ(e.codepoint(), char32_t{0x20AC});
        EXPECT_EQ(e.offset(), 4u);
        EXPECT_NE(std::string(e.what()).find("U+20AC"), std::string::npos);
    }
}

TEST(Codec, InvalidUtf8Rejected) {
    EXPECT_THROW(encode_text(default_alphabet(), "a\xC3"), InvalidInput);
    EXPECT_THROW(encode_text(default_alphabet(), "\xED\xA0\x80"), InvalidInput);
    EXPECT_THROW(encode_text(default_alphabet(), "\xC0\xAF"), InvalidInput);
}

TEST(Codec, DecodeEmpty) { EXPECT_EQ(decode_labels(default_alphabet(), LabelSeq{}), ""); }

TEST(Codec, ThreeConsonantConjunct) {
    const LabelAlphabet a = default_alphabet();
    const std::u32string cps{kNa, kHalant, kTa, kHalant, kRa};
    const LabelSeq l{a.index_of(kNa), a.index_of(kHalant), a.index_of(kTa), a.index_of(kHalant),
                     a.index_of(kRa)};
    EXPECT_EQ(decode_labels(a, l), u8(cps));
    EXPECT_EQ(utf8::decode(decode_labels(a, l)).size(), 5u);
}

TEST(Codec, DecodeRejectsBlankAndOutOfRange) {
    const LabelAlphabet a = default_alphabet();
    EXPECT_THROW(decode_labels(a, LabelSeq{0, a.blank_index()}), InvalidInput);
    EXPECT_THROW(decode_labels(a, LabelSeq{-1}), InvalidInput);
    EXPECT_THROW(decode_labels(a, LabelSeq{500}), InvalidInput);
}

TEST(Codec, NoUnicodeNormalization) {
    // Precomposed U+09CB and its decomposition U+09C7 U+09BE stay distinct.
    const LabelAlphabet a = default_alphabet();
    const LabelSeq pre = encode_text(a, u8(U"\u09CB"));
    const LabelSeq split = encode_text(a, u8(U"\u09C7\u09BE"));
    EXPECT_EQ(pre.size(), 1u);
    EXPECT_EQ(split.size(), 2u);
    EXPECT_EQ(decode_labels(a, split), u8(U"\u09C7\u09BE"));
}

TEST(Codec, RandomRoundTripWithConjuncts) {
    const LabelAlphabet a = default_alphabet();
    const auto cons = consonants(a);
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
        std::u32string s;
        // Length stays <= 100 once a cluster of up to 7 codepoints is added.
        const std::size_t len = rng.below(trial < 100 ? 94 : 101);
        while (s.size() < len) s += a.symbols()[rng.below(a.symbol_count())];
        if (trial < 100) {
            // Two to four consonants joined by halants.
            const std::size_t n = 2 + rng.below(3);
            std::u32string cluster;
            for (std::size_t k = 0; k < n; ++k) {
                if (k) cluster += kHalant;
                cluster += cons[rng.below(cons.size())];
            }
            s.insert(rng.below(s.size() + 1), cluster);
        }
        const std::string text = u8(s);
        const LabelSeq labels = encode_text(a, text);
        ASSERT_EQ(labels.size(), s.size());
        for (int l : labels) ASSERT_NE(l, a.blank_index());
        ASSERT_EQ(decode_labels(a, labels), text) << "trial " << trial;
    }
}
