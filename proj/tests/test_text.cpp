#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "acap/csv.hpp"
#include "acap/text.hpp"
#include "support.hpp"

using namespace acap;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("caption normalization") {
    REQUIRE(normalize_caption("A dog barks.") ==
            std::vector<std::string>{"a", "dog", "barks", "<eos>"});
    REQUIRE(normalize_caption("Birds, birds!") ==
            std::vector<std::string>{"birds", "birds", "<eos>"});
    REQUIRE(normalize_caption("  Rain   falls ") ==
            std::vector<std::string>{"rain", "falls", "<eos>"});
    REQUIRE(normalize_caption("DON'T-STOP") == std::vector<std::string>{"dontstop", "<eos>"});
    REQUIRE(normalize_caption("tab\tand\nnewline") ==
            std::vector<std::string>{"tab", "and", "newline", "<eos>"});

    REQUIRE_THROWS_AS(normalize_caption(""), InvalidCaptionError);
    REQUIRE_THROWS_AS(normalize_caption("  ...  !?"), InvalidCaptionError);
}

TEST_CASE("vocabulary construction") {
    const Vocabulary v = build_vocab({"a dog", "a cat"});
    REQUIRE(v.size() == 4);
    REQUIRE(v.tokens == std::vector<std::string>{"<eos>", "a", "cat", "dog"});
    REQUIRE(v.eos_index == 0);
    REQUIRE(v.frequency[v.index_of.at("a")] == 2);
    REQUIRE(v.frequency[v.index_of.at("cat")] == 1);
    REQUIRE(v.frequency[v.eos_index] == 2);  // one eos per caption

    // duplicates double the counts
    const Vocabulary dup = build_vocab({"a dog", "a cat", "a dog", "a cat"});
    REQUIRE(dup.size() == 4);
    REQUIRE(dup.frequency[dup.index_of.at("a")] == 4);
    REQUIRE(dup.frequency[dup.eos_index] == 4);

    // caption order cannot matter
    const Vocabulary fwd = build_vocab({"night wind", "soft rain", "a door"});
    const Vocabulary rev = build_vocab({"a door", "soft rain", "night wind"});
    REQUIRE(fwd.tokens == rev.tokens);
    REQUIRE(fwd.frequency == rev.frequency);

    REQUIRE_THROWS_AS(build_vocab({}), ContractError);
}

TEST_CASE("caption encoding and decoding") {
    const Vocabulary v = build_vocab({"a dog", "a cat"});  // <eos> a cat dog

    REQUIRE(encode_caption({"a", "dog", "<eos>"}, v) == std::vector<std::size_t>{1, 3, 0});
    REQUIRE(encode_caption({"<eos>"}, v) == std::vector<std::size_t>{0});

    REQUIRE_THROWS_AS(encode_caption({"zebra", "<eos>"}, v), UnknownTokenError);
    REQUIRE_THROWS_WITH(encode_caption({"zebra", "<eos>"}, v), ContainsSubstring("zebra"));
    // missing terminator
    REQUIRE_THROWS_AS(encode_caption({"a", "dog"}, v), ContractError);

    const std::vector<std::string> tokens = normalize_caption("A cat! A dog!");
    REQUIRE(decode_tokens(encode_caption(tokens, v), v) == tokens);
    REQUIRE_THROWS_AS(decode_tokens({99}, v), ContractError);
}

TEST_CASE("inverse-frequency weights with a clamp") {
    Vocabulary v;
    v.tokens = {"<eos>", "rare", "mid", "common"};
    v.frequency = {4000, 5, 8, 5000};
    for (std::size_t i = 0; i < v.tokens.size(); ++i) v.index_of[v.tokens[i]] = i;
    v.eos_index = 0;

    const WeightTable w = token_weights(v, 0.5);
    REQUIRE(w[1] == 1.0);          // rarest token
    REQUIRE(w[2] == 0.625);        // 4 / 8, above the clamp
    REQUIRE(w[0] == 0.5);          // 4 / 4000 clamped up to beta
    REQUIRE(w[3] == 0.5);
    REQUIRE(w.beta == 0.5);

    REQUIRE_THROWS_AS(token_weights(v, 0.0), ConfigError);
    REQUIRE_THROWS_AS(token_weights(v, -0.5), ConfigError);
    REQUIRE_THROWS_AS(token_weights(v, 1.5), ConfigError);
    REQUIRE_NOTHROW(token_weights(v, 1.0));

    // property: beta <= phi <= 1, and the rarest always hits 1
    SplitMix64 rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        Vocabulary rv;
        const std::size_t n = 2 + rng.next_below(20);
        std::uint64_t min_f = UINT64_MAX;
        for (std::size_t i = 0; i < n; ++i) {
            rv.tokens.push_back("t" + std::to_string(i));
            rv.frequency.push_back(1 + rng.next_below(10000));
            min_f = std::min(min_f, rv.frequency.back());
        }
        const double beta = rng.uniform(0.05, 1.0);
        const WeightTable rw = token_weights(rv, beta);
        double top = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(rw[i] >= beta);
            REQUIRE(rw[i] <= 1.0);
            top = std::max(top, rw[i]);
            if (rv.frequency[i] == min_f) REQUIRE(rw[i] == 1.0);
        }
        REQUIRE(top == 1.0);
    }

    const WeightTable u = uniform_weights(3);
    REQUIRE(u.phi == std::vector<double>{1.0, 1.0, 1.0});
}

TEST_CASE("csv primitives") {
    REQUIRE(split_csv_line("a,b,c") == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(split_csv_line("a,\"b, with comma\",c") ==
            std::vector<std::string>{"a", "b, with comma", "c"});
    REQUIRE(split_csv_line("\"say \"\"hi\"\"\",x") ==
            std::vector<std::string>{"say \"hi\"", "x"});
    REQUIRE(split_csv_line("") == std::vector<std::string>{""});
    REQUIRE(split_csv_line(",") == std::vector<std::string>{"", ""});

    REQUIRE(csv_escape("plain") == "plain");
    REQUIRE(csv_escape("with, comma") == "\"with, comma\"");
    REQUIRE(csv_escape("with \"quote\"") == "\"with \"\"quote\"\"\"");
    REQUIRE(split_csv_line(csv_escape("a,b\"c") + "," + csv_escape("d")) ==
            std::vector<std::string>{"a,b\"c", "d"});
}

TEST_CASE("caption csv reading") {
    testsup::TempDir dir("captions");

    testsup::write_file(dir.file("good.csv"),
                        "file_name,caption_1,caption_2\n"
                        "a.wav,A dog barks.,\"Loud, repeated barking\"\n"
                        "b.wav,rain falls\n");
    const auto records = read_caption_csv(dir.file("good.csv"));
    REQUIRE(records.size() == 2);
    REQUIRE(records[0].file_name == "a.wav");
    REQUIRE(records[0].captions ==
            std::vector<std::string>{"A dog barks.", "Loud, repeated barking"});
    REQUIRE(records[1].captions == std::vector<std::string>{"rain falls"});

    testsup::write_file(dir.file("header.csv"), "clip,caption\na.wav,x\n");
    REQUIRE_THROWS_AS(read_caption_csv(dir.file("header.csv")), FormatError);

    testsup::write_file(dir.file("short.csv"), "file_name,caption_1\nonly-a-name\n");
    REQUIRE_THROWS_WITH(read_caption_csv(dir.file("short.csv")),
                        ContainsSubstring("no captions"));

    testsup::write_file(dir.file("empty.csv"), "");
    REQUIRE_THROWS_AS(read_caption_csv(dir.file("empty.csv")), FormatError);

    testsup::write_file(dir.file("headeronly.csv"), "file_name,caption_1\n");
    REQUIRE_THROWS_AS(read_caption_csv(dir.file("headeronly.csv")), FormatError);

    REQUIRE_THROWS_AS(read_caption_csv(dir.file("missing.csv")), FileNotFoundError);
}
