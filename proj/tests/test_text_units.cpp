#include "gazegen/text_units.hpp"

#include "gazegen/error.hpp"
#include "gazegen/lm.hpp"

#include <doctest.h>

#include <numeric>
#include <random>

using namespace gazegen;

TEST_CASE("segment_words basic segmentation") {
    auto words = segment_words("The cat sat.");
    REQUIRE(words.size() == 3);
    CHECK(words[0].surface == "The");
    CHECK(words[2].surface == "sat.");
    for (const auto& w : words)
        CHECK(w.sentence_index == 0);
    CHECK(words[0].char_begin == 0);
    CHECK(words[0].char_end == 3);
    CHECK(words[2].char_begin == 8);
    CHECK(words[2].char_end == 12);
}

TEST_CASE("segment_words sentence boundaries") {
    auto words = segment_words("Hi! Go.");
    REQUIRE(words.size() == 2);
    CHECK(words[0].sentence_index == 0);
    CHECK(words[1].sentence_index == 1);

    // '.' inside a number is not a boundary.
    auto nums = segment_words("pi is 3.14 roughly. done");
    CHECK(nums[2].surface == "3.14");
    CHECK(nums[3].sentence_index == 0);
    CHECK(nums[4].sentence_index == 1);
}

TEST_CASE("segment_words empty and whitespace-only text") {
    CHECK(segment_words("").empty());
    CHECK(segment_words("  \t\n ").empty());
}

TEST_CASE("segment_words char spans are strictly increasing and non-overlapping") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> len(1, 6);
    std::uniform_int_distribution<int> gap(1, 3);
    std::uniform_int_distribution<int> ch('a', 'z');
    for (int iter = 0; iter < 50; ++iter) {
        std::string text;
        for (int w = 0; w < 20; ++w) {
            for (int i = 0; i < len(rng); ++i)
                text.push_back(static_cast<char>(ch(rng)));
            for (int i = 0; i < gap(rng); ++i)
                text.push_back(' ');
        }
        auto words = segment_words(text);
        for (std::size_t i = 0; i < words.size(); ++i) {
            CHECK_FALSE(words[i].surface.empty());
            CHECK(words[i].index == i);
            if (i > 0)
                CHECK(words[i].char_begin >= words[i - 1].char_end);
            CHECK(text.substr(words[i].char_begin, words[i].char_end - words[i].char_begin) ==
                  words[i].surface);
        }
    }
}

TEST_CASE("align_tokens_to_words containment") {
    auto words = segment_words("reading");
    std::vector<std::string> tokens{"read", "ing"};
    auto a = align_tokens_to_words(tokens, words);
    REQUIRE(a.token_to_word.size() == 2);
    CHECK(a.token_to_word[0] == 0);
    CHECK(a.token_to_word[1] == 0);
    CHECK(a.word_to_tokens[0] == std::vector<std::size_t>{0, 1});
}

TEST_CASE("align_tokens_to_words across words") {
    auto words = segment_words("The cat");
    std::vector<std::string> tokens{"The", " cat"};
    auto a = align_tokens_to_words(tokens, words);
    CHECK(a.token_to_word[0] == 0);
    CHECK(a.token_to_word[1] == 1);
}

TEST_CASE("align_tokens_to_words rejects mismatched reconstruction") {
    auto words = segment_words("The cat");
    std::vector<std::string> tokens{"The", " dog"};
    CHECK_THROWS_AS(align_tokens_to_words(tokens, words), InputError);
    std::vector<std::string> short_tokens{"The"};
    CHECK_THROWS_AS(align_tokens_to_words(short_tokens, words), InputError);
}

TEST_CASE("alignment totality for the built-in tokenizer") {
    // Any tokenization the subword tokenizer produces over segmented words
    // must align fully.
    const std::string corpus =
        "the quick brown fox jumps over the lazy dog while the rain falls "
        "quietly on the old stone bridge and the river keeps moving";
    auto tok = SubwordTokenizer::train(corpus, 30);
    std::mt19937 rng(11);
    std::vector<std::string> lexicon{"the", "quick", "brown", "fox",    "jumps",
                                     "over", "lazy",  "dog",  "bridge", "unseenish"};
    std::uniform_int_distribution<std::size_t> pick(0, lexicon.size() - 1);
    for (int iter = 0; iter < 40; ++iter) {
        std::string text;
        for (int w = 0; w < 12; ++w) {
            if (!text.empty())
                text += ' ';
            text += lexicon[pick(rng)];
        }
        auto words = segment_words(text);
        auto pieces = tok.tokenize(text);
        auto a = align_tokens_to_words(pieces, words);
        CHECK(a.token_to_word.size() == pieces.size());
        std::size_t total = 0;
        for (const auto& t : a.word_to_tokens) {
            CHECK_FALSE(t.empty());
            total += t.size();
        }
        CHECK(total == pieces.size());
        // Tokens of one word are contiguous.
        for (std::size_t i = 1; i < a.token_to_word.size(); ++i)
            CHECK(a.token_to_word[i] >= a.token_to_word[i - 1]);
    }
}

TEST_CASE("distribute_word_value uniform split") {
    CHECK(distribute_word_value(300.0, 3) == std::vector<double>{100.0, 100.0, 100.0});
    CHECK(distribute_word_value(250.0, 1) == std::vector<double>{250.0});
    CHECK(distribute_word_value(1.0, 4) == std::vector<double>{0.25, 0.25, 0.25, 0.25});
    CHECK_THROWS_AS(distribute_word_value(1.0, 0), InputError);
}

TEST_CASE("distribute_word_value round-trips within 1e-9") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> value(0.0, 1000.0);
    std::uniform_int_distribution<std::size_t> n(1, 17);
    for (int iter = 0; iter < 200; ++iter) {
        double v = value(rng);
        auto parts = distribute_word_value(v, n(rng));
        double sum = std::accumulate(parts.begin(), parts.end(), 0.0);
        CHECK(std::abs(sum - v) <= 1e-9);
    }
}

TEST_CASE("clean_word_form strips edges, keeps internal marks") {
    CHECK(clean_word_form("Hello,") == "hello");
    CHECK(clean_word_form("\"don't\"") == "don't");
    CHECK(clean_word_form("well-known.") == "well-known");
    CHECK(clean_word_form("--") == "");
}
