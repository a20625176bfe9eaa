#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <functional>
#include <sstream>
#include <string>

#include "rmc/corpus.hpp"
#include "rmc/rng.hpp"

using namespace rmc;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected rmc::Error");
    return ErrorCode::Io;
}

const char* kThree =
    R"({"id":"q","title":"Query Paper","abstract":"about graphs","references":["Paper B"],"year":2021,"venue":"ICLR","role":"submission"})"
    "\n"
    R"({"id":"a","title":"Paper A","abstract":"","references":[],"year":2019,"venue":null,"role":"recommended"})"
    "\n"
    R"({"id":"b","title":"Paper B!","abstract":"x","references":[],"year":2017,"venue":null,"role":null})"
    "\n";

Corpus three() {
    std::istringstream in(kThree);
    return read_corpus(in);
}

}  // namespace

TEST_CASE("read_corpus keeps one record per line in file order", "[corpus]") {
    const auto c = three();
    REQUIRE(c.size() == 3);
    CHECK(c.records()[0].id == "q");
    CHECK(c.records()[2].id == "b");
    CHECK(c.at("q").references == std::vector<std::string>{"Paper B"});
    CHECK(c.at("q").year == 2021);
    CHECK(c.at("q").venue == "ICLR");
    CHECK(c.at("q").role == Role::Submission);
    CHECK_FALSE(c.at("b").role.has_value());
    CHECK_FALSE(c.at("a").venue.has_value());
}

TEST_CASE("only id and title are required", "[corpus]") {
    std::istringstream in(R"({"id":"x","title":"T"})" "\n\n");
    const auto c = read_corpus(in);
    REQUIRE(c.size() == 1);
    CHECK(c.at("x").abstract.empty());
    CHECK(c.at("x").references.empty());
    CHECK_FALSE(c.at("x").year.has_value());
}

TEST_CASE("corpus loading errors", "[corpus][errors]") {
    const auto load = [](const std::string& text) {
        std::istringstream in(text);
        (void)read_corpus(in);
    };
    CHECK(code_of([&] { load(R"({"id":"p1","title":"A"})" "\n" R"({"id":"p1","title":"B"})" "\n"); }) ==
          ErrorCode::DuplicateId);
    CHECK(code_of([&] { load(R"({"id":"p1"})" "\n"); }) == ErrorCode::MalformedRecord);
    CHECK(code_of([&] { load(R"({"id":"p1","title":""})" "\n"); }) == ErrorCode::MalformedRecord);
    CHECK(code_of([&] { load("{not json\n"); }) == ErrorCode::MalformedRecord);
    CHECK(code_of([&] { load(R"({"id":"p1","title":"A","year":-3})" "\n"); }) == ErrorCode::MalformedRecord);
    CHECK(code_of([&] { load(R"({"id":"p1","title":"A","year":"2020"})" "\n"); }) == ErrorCode::MalformedRecord);
    CHECK(code_of([&] { load(R"({"id":"p1","title":"A","role":"reviewer"})" "\n"); }) == ErrorCode::MalformedRecord);
    CHECK(code_of([&] { load(R"({"id":"p1","title":"A","references":"x"})" "\n"); }) == ErrorCode::MalformedRecord);

    try {
        load(R"({"id":"ok","title":"A"})" "\n" R"({"id":"p2"})" "\n");
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.detail().find("line 2") != std::string::npos);
    }
}

TEST_CASE("corpus write/read round trip is identical", "[corpus][roundtrip]") {
    const auto c = three();
    std::ostringstream first;
    write_corpus(c, first);
    std::istringstream back(first.str());
    const auto c2 = read_corpus(back);
    CHECK(c2 == c);
    std::ostringstream second;
    write_corpus(c2, second);
    CHECK(second.str() == first.str());
}

TEST_CASE("random corpora round trip", "[corpus][roundtrip][property]") {
    Rng rng(11);
    const auto word = [&] {
        static const char* pool[] = {"graph", "Ünïcode", "tab\there", "quote\"d", "back\\slash", "ω", "net"};
        return std::string(pool[rng.uniform_index(7)]);
    };
    for (int trial = 0; trial < 20; ++trial) {
        Corpus c;
        const auto n = 1 + rng.uniform_index(30);
        for (std::uint64_t i = 0; i < n; ++i) {
            PaperRecord r;
            r.id = "p" + std::to_string(i);
            r.title = word() + " " + word();
            if (rng.uniform01() < 0.7) r.abstract = word();
            for (std::uint64_t k = rng.uniform_index(4); k > 0; --k) r.references.push_back(word());
            if (rng.uniform01() < 0.5) r.year = 1990 + static_cast<int>(rng.uniform_index(35));
            if (rng.uniform01() < 0.3) r.venue = word();
            if (rng.uniform01() < 0.5) r.role = static_cast<Role>(rng.uniform_index(3));
            c.add(std::move(r));
        }
        std::ostringstream out;
        write_corpus(c, out);
        std::istringstream in(out.str());
        CHECK(read_corpus(in) == c);
    }
}

TEST_CASE("labels load and validate references", "[corpus][labels]") {
    const auto c = three();
    const auto load = [&](const std::string& text) {
        std::istringstream in(text);
        return read_labels(in, c);
    };
    const auto ls = load(R"({"submission_id":"q","recommended":["a","b"],"split":"train"})" "\n");
    REQUIRE(ls.size() == 1);
    CHECK(ls.entries()[0].gold_ids == std::vector<std::string>{"a", "b"});
    CHECK(ls.in_split(Split::Train).size() == 1);
    CHECK(ls.in_split(Split::Test).empty());

    CHECK(code_of([&] { load(R"({"submission_id":"q","recommended":["zzz"],"split":"train"})" "\n"); }) ==
          ErrorCode::UnknownPaper);
    CHECK(code_of([&] { load(R"({"submission_id":"nope","recommended":["a"],"split":"train"})" "\n"); }) ==
          ErrorCode::UnknownPaper);
    CHECK(code_of([&] { load(R"({"submission_id":"q","recommended":["a","q"],"split":"test"})" "\n"); }) ==
          ErrorCode::SelfGold);
    CHECK(code_of([&] { load(R"({"submission_id":"q","recommended":["a"],"split":"dev"})" "\n"); }) ==
          ErrorCode::BadSplit);
    CHECK(code_of([&] { load(R"({"submission_id":"q","recommended":[],"split":"val"})" "\n"); }) ==
          ErrorCode::MalformedRecord);
    CHECK(code_of([&] {
              load(R"({"submission_id":"q","recommended":["a"],"split":"val"})" "\n"
                   R"({"submission_id":"q","recommended":["b"],"split":"test"})" "\n");
          }) == ErrorCode::DuplicateId);
}

TEST_CASE("labels round trip", "[corpus][labels][roundtrip]") {
    const auto c = three();
    std::istringstream in(R"({"submission_id":"q","recommended":["a","b"],"split":"val"})" "\n"
                          R"({"submission_id":"a","recommended":["b"],"split":"test"})" "\n");
    const auto ls = read_labels(in, c);
    std::ostringstream out;
    write_labels(ls, out);
    std::istringstream back(out.str());
    CHECK(read_labels(back, c).entries() == ls.entries());
}

TEST_CASE("candidate_pool examples", "[corpus][pool]") {
    const auto c = three();
    CHECK(candidate_pool(c, "q", Scope::Extended, false) == CandidateSet{"a", "b"});
    // q cites "Paper B"; the stored title "Paper B!" normalizes to the same string
    CHECK(candidate_pool(c, "q", Scope::Extended, true) == CandidateSet{"a"});
    CHECK(code_of([&] { (void)candidate_pool(c, "missing", Scope::Core, false); }) == ErrorCode::UnknownPaper);
}

TEST_CASE("core scope drops extended candidates", "[corpus][pool]") {
    Corpus c;
    c.add({"q", "Q", "", {}, {}, {}, Role::Submission});
    c.add({"r", "R", "", {}, {}, {}, Role::Recommended});
    c.add({"x", "X", "", {}, {}, {}, Role::Extended});
    c.add({"u", "U", "", {}, {}, {}, std::nullopt});
    CHECK(candidate_pool(c, "q", Scope::Core, false) == CandidateSet{"r", "u"});
    CHECK(candidate_pool(c, "q", Scope::Extended, false) == CandidateSet{"r", "x", "u"});
}

TEST_CASE("candidate_pool never returns the query and always holds the golds", "[corpus][pool][property]") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        Corpus c;
        const auto n = 2 + rng.uniform_index(40);
        for (std::uint64_t i = 0; i < n; ++i) {
            PaperRecord r;
            r.id = "p" + std::to_string(i);
            r.title = "t" + std::to_string(rng.uniform_index(5));  // frequent title clashes
            for (int k = 0; k < 3; ++k) r.references.push_back("t" + std::to_string(rng.uniform_index(5)));
            if (rng.uniform01() < 0.3) r.role = Role::Extended;
            c.add(std::move(r));
        }
        for (const auto& rec : c.records()) {
            for (const auto scope : {Scope::Core, Scope::Extended}) {
                for (const bool ex : {false, true}) {
                    const auto pool = candidate_pool(c, rec.id, scope, ex);
                    CHECK(std::find(pool.begin(), pool.end(), rec.id) == pool.end());
                }
            }
            // any non-query paper may be a gold; every one is in the unfiltered extended pool
            const auto pool = candidate_pool(c, rec.id, Scope::Extended, false);
            CHECK(pool.size() == c.size() - 1);
        }
    }
}

TEST_CASE("filter_by_year_gap", "[corpus][years]") {
    Corpus c;
    c.add({"a", "A", "", {}, 2019, {}, {}});
    c.add({"b", "B", "", {}, 2017, {}, {}});
    c.add({"n", "N", "", {}, std::nullopt, {}, {}});
    CHECK(filter_by_year_gap(c, 2021, 3) == std::vector<std::string>{"a"});

    Corpus same;
    same.add({"a", "A", "", {}, 2020, {}, {}});
    same.add({"b", "B", "", {}, 2020, {}, {}});
    CHECK(filter_by_year_gap(same, 2020, 0).size() == 2);
    CHECK(filter_by_year_gap(Corpus{}, 2020, 3).empty());
    CHECK(code_of([&] { (void)filter_by_year_gap(c, 2020, -1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("role and split names", "[corpus]") {
    CHECK(parse_role("extended") == Role::Extended);
    CHECK_FALSE(parse_role("other").has_value());
    CHECK(parse_split("val") == Split::Val);
    CHECK(to_string(Split::Test) == "test");
    CHECK(parse_scope("core") == Scope::Core);
    CHECK(code_of([] { (void)parse_scope("all"); }) == ErrorCode::InvalidArgument);
}
