#include "soliclone/normalizer.hpp"

#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <regex>

using namespace soliclone;
using Lines = std::vector<std::string>;

namespace {

std::vector<Fragment> all_fixture_fragments() {
    std::vector<Fragment> out;
    for (const char* sub : {"corpus", "families", "seeded", "models", "normalizer", "low_similarity"}) {
        const auto corpus = load_corpus(fixtures::dir(sub));
        ExtractionStats stats;
        for (const auto& u : corpus.units) {
            auto part = extract_fragments(u, FragmentWindow{1, 2500, true}, stats);
            out.insert(out.end(), part.begin(), part.end());
        }
    }
    return out;
}

Fragment only_fragment(const std::string& file) {
    const auto frags = extract_fragments(fixtures::parse(file), 10, 2500);
    EXPECT_EQ(frags.size(), 1u) << file;
    return frags.at(0);
}

} // namespace

TEST(CloneTypes, NamesAndAlias) {
    for (auto t : kAllCloneTypes) EXPECT_EQ(parse_clone_type(to_string(t)), t);
    EXPECT_EQ(parse_clone_type("t3-2"), CloneType::T3_1);
    EXPECT_FALSE(parse_clone_type("t4").has_value());
    EXPECT_FALSE(NormalizationMode::for_type(CloneType::T1).filter_enabled);
    EXPECT_EQ(NormalizationMode::for_type(CloneType::T3_1).rename, RenameMode::Blind);
    EXPECT_EQ(NormalizationMode::for_type(CloneType::T3_2c).rename, RenameMode::Consistent);
}

TEST(PrettyPrint, StripsCommentsAndWhitespace) {
    EXPECT_EQ(pretty_print(Lines{"x=1; // set", "", "y  =2 ;"}), (Lines{"x = 1 ;", "y = 2 ;"}));
    EXPECT_EQ(pretty_print(Lines{"/*a*/ a++;"}), (Lines{"a ++ ;"}));
}

TEST(PrettyPrint, OneStatementPerLineBracesAlone) {
    EXPECT_EQ(pretty_print(Lines{"function f() public { a = 1; b = 2; }"}),
              (Lines{"function f ( ) public", "{", "a = 1 ;", "b = 2 ;", "}"}));
    EXPECT_EQ(pretty_print(Lines{"for (uint i = 0; i < n; i++) {", "  s += i;", "}"}),
              (Lines{"for ( uint i = 0 ; i < n ; i ++ )", "{", "s += i ;", "}"}));
    EXPECT_EQ(pretty_print(Lines{"x = a", "    + b;"}), (Lines{"x = a + b ;"}));
}

TEST(PrettyPrint, LineBreaksEndLinesUnlessTheStatementGoesOn) {
    EXPECT_EQ(pretty_print(Lines{"function f(uint a,", "    uint b)", "    public", "    returns (uint)", "{"}),
              (Lines{"function f ( uint a , uint b ) public returns ( uint )", "{"}));
    EXPECT_EQ(pretty_print(Lines{"x = token", "    .balanceOf(a);"}), (Lines{"x = token . balanceOf ( a ) ;"}));
    EXPECT_EQ(pretty_print(Lines{"x =", "    y;"}), (Lines{"x = y ;"}));
    // filtered output has no braces left to separate a header from its body
    EXPECT_EQ(pretty_print(Lines{"function f ( ) returns ( uint )", "return X ;"}),
              (Lines{"function f ( ) returns ( uint )", "return X ;"}));
    EXPECT_EQ(pretty_print(Lines{"p = P({a: 1,", "    b: 2});"}), (Lines{"p = P ( { a : 1 , b : 2 } ) ;"}));
    EXPECT_EQ(pretty_print(Lines{"if ( a )", "b = 1 ;", "else", "b = 2 ;"}),
              (Lines{"if ( a )", "b = 1 ;", "else", "b = 2 ;"}));
}

TEST(PrettyPrint, PropagatesLexErrors) { EXPECT_THROW(pretty_print(Lines{"a = \"unterminated;"}), LexError); }

TEST(PrettyPrint, CommentOnlyDifferencesVanish) {
    const auto plain = only_fragment("normalizer/transfer_plain.sol");
    const auto noisy = only_fragment("normalizer/transfer_commented.sol");
    ASSERT_NE(plain.lines, noisy.lines);
    EXPECT_EQ(pretty_print(plain), pretty_print(noisy));
}

TEST(FilterLines, StatedRules) {
    EXPECT_EQ(filter_lines(Lines{"{", "a = 1 ;", "}"}), (Lines{"a = 1 ;"}));
    EXPECT_EQ(filter_lines(Lines{"emit Transfer ( a , b , c ) ;", "x = 1 ;"}), (Lines{"x = 1 ;"}));
    EXPECT_EQ(filter_lines(Lines{"function f ( ) public view returns ( uint )"}), (Lines{"function f ( ) returns ( uint )"}));
}

TEST(FilterLines, FifteenLineFixture) {
    // Hand-applied: 4 brace-only lines and 1 emit go, 10 lines remain.
    const Lines pretty = {
        "function transfer ( address to , uint256 amount ) public returns ( bool )",
        "{",
        "require ( to != address ( 0 ) , \"zero\" ) ;",
        "uint256 senderBalance = _balances [ msg . sender ] ;",
        "require ( senderBalance >= amount , \"balance\" ) ;",
        "unchecked",
        "{",
        "_balances [ msg . sender ] = senderBalance - amount ;",
        "}",
        "_balances [ to ] += amount ;",
        "emit Transfer ( msg . sender , to , amount ) ;",
        "totalMoved += amount ;",
        "lastMover = msg . sender ;",
        "return true ;",
        "}",
    };
    ASSERT_EQ(pretty.size(), 15u);
    const auto out = filter_lines(pretty);
    EXPECT_EQ(out.size(), 10u);
    EXPECT_EQ(out.front(), "function transfer ( address to , uint256 amount ) returns ( bool )");
    EXPECT_EQ(out.back(), "return true ;");
}

TEST(BlindRename, StatedExamples) {
    EXPECT_EQ(blind_rename(Lines{"a = b + c ;"}), (Lines{"X = X + X ;"}));
    EXPECT_EQ(blind_rename(Lines{"require ( msg . sender == owner ) ;"}), (Lines{"require ( msg . sender == X ) ;"}));
    EXPECT_EQ(blind_rename(Lines{"x = 42 ;"}), (Lines{"X = L ;"}));
    EXPECT_EQ(blind_rename(Lines{"s = \"hi\" ;", "t = 0x10 ;", "u = true ;"}),
              (Lines{"X = L ;", "X = L ;", "X = true ;"}));
}

TEST(BlindRename, CustomTokenList) {
    const auto keep = PreservedTokens::parse("# only these\nowner\n");
    EXPECT_EQ(blind_rename(Lines{"owner = msg . sender ;"}, keep), (Lines{"owner = X . sender ;"}));
}

TEST(ConsistentRename, StatedExamples) {
    EXPECT_EQ(consistent_rename(Lines{"a = b + a ;"}), (Lines{"X1 = X2 + X1 ;"}));
    EXPECT_EQ(consistent_rename(Lines{"a = a ;"}), (Lines{"X1 = X1 ;"}));
    EXPECT_EQ(consistent_rename(Lines{"balances [ msg . sender ] = balances [ msg . sender ] - amount ;"}),
              (Lines{"X1 [ msg . sender ] = X1 [ msg . sender ] - X2 ;"}));
}

TEST(ConsistentRename, NumberingSpansLines) {
    EXPECT_EQ(consistent_rename(Lines{"a = b ;", "c = a ;"}), (Lines{"X1 = X2 ;", "X3 = X1 ;"}));
}

TEST(Normalize, ModeCompositions) {
    Fragment f;
    f.id = "f.sol:1-1";
    f.lines = {"a = b + a; // c"};
    EXPECT_EQ(normalize(f, NormalizationMode::for_type(CloneType::T1)).norm_lines, pretty_print(f));
    EXPECT_EQ(normalize(f, NormalizationMode::for_type(CloneType::T2c)).norm_lines, (Lines{"X1 = X2 + X1 ;"}));
    EXPECT_EQ(normalize(f, NormalizationMode::for_type(CloneType::T2)).norm_lines, (Lines{"X = X + X ;"}));
    EXPECT_EQ(normalize(f, NormalizationMode::for_type(CloneType::T3_2c)).source, f.id);
}

TEST(Normalize, RejectsInconsistentMode) {
    Fragment f;
    f.lines = {"a = 1;"};
    NormalizationMode bad{CloneType::T1, true, RenameMode::Blind};
    EXPECT_THROW(normalize(f, bad), std::invalid_argument);
}

TEST(Normalize, SwappedRolesSplitT2cNotT2) {
    Fragment f1, f2;
    f1.lines = {"function mix(uint a, uint b) internal {", "    a = a + b;", "    b = a - b;", "}"};
    f2.lines = {"function mix(uint a, uint b) internal {", "    b = b + a;", "    a = b - a;", "}"};
    const auto t2 = NormalizationMode::for_type(CloneType::T2);
    const auto t2c = NormalizationMode::for_type(CloneType::T2c);
    const auto n1 = normalize(f1, t2c).norm_lines;
    EXPECT_NE(n1, normalize(f2, t2c).norm_lines);
    EXPECT_EQ(normalize(f1, t2).norm_lines, normalize(f2, t2).norm_lines);
    EXPECT_EQ(n1, (Lines{"function X1 ( uint X2 , uint X3 )", "X2 = X2 + X3 ;", "X3 = X2 - X3 ;"}));
    const auto blind = normalize(f1, t2).norm_lines;
    for (const auto& line : blind) EXPECT_EQ(line.find("X1"), std::string::npos);
}

TEST(Normalize, MemberNamesSurvive) {
    EXPECT_EQ(normalize_lines(Lines{"token.transferFrom(a, b, 5);"}, NormalizationMode::for_type(CloneType::T2)),
              (Lines{"X . transferFrom ( X , X , L ) ;"}));
}

TEST(Properties, IdempotentOnEveryFixtureFragment) {
    const auto frags = all_fixture_fragments();
    ASSERT_GT(frags.size(), 50u);
    for (auto t : kAllCloneTypes) {
        const auto mode = NormalizationMode::for_type(t);
        for (const auto& f : frags) {
            const auto once = normalize(f, mode).norm_lines;
            Fragment again = f;
            again.lines = once;
            EXPECT_EQ(normalize(again, mode).norm_lines, once) << f.id << " " << to_string(t);
        }
    }
}

TEST(Properties, ConsistentNumberingIsDense) {
    const std::regex numbered("^X([1-9][0-9]*)$");
    for (const auto& f : all_fixture_fragments()) {
        const auto cons = normalize(f, NormalizationMode::for_type(CloneType::T2c)).norm_lines;
        const auto toks = tokenize(detail::join_lines(cons));
        int highest = 0;
        for (std::size_t i = 0; i < toks.size(); ++i) {
            std::smatch m;
            if (toks[i].kind != TokenKind::Identifier || (i > 0 && toks[i - 1].text == ".")) continue;
            if (!std::regex_match(toks[i].text, m, numbered)) continue;
            const int n = std::stoi(m[1]);
            // a new number must be exactly one past the highest seen so far
            EXPECT_LE(n, highest + 1) << f.id;
            highest = std::max(highest, n);
        }
    }
}

TEST(Properties, BlindOutputHasOnlyPlaceholderIdentifiers) {
    // Outside member access, every surviving identifier is X, L or a preserved token.
    const auto& keep = PreservedTokens::defaults();
    for (const auto& f : all_fixture_fragments()) {
        const auto blind = normalize(f, NormalizationMode::for_type(CloneType::T3_1)).norm_lines;
        const auto toks = tokenize(detail::join_lines(blind));
        for (std::size_t i = 0; i < toks.size(); ++i) {
            if (toks[i].kind != TokenKind::Identifier || (i > 0 && toks[i - 1].text == ".")) continue;
            EXPECT_TRUE(toks[i].text == "X" || toks[i].text == "L" || keep.contains(toks[i].text))
                << f.id << ": " << toks[i].text;
        }
    }
}

TEST(Properties, CommentInsensitivityOnSeededClones) {
    const auto corpus = load_corpus(fixtures::dir("seeded"));
    std::vector<Lines> t1;
    for (const auto& u : corpus.units)
        for (const auto& f : extract_fragments(u, 10, 2500))
            if (f.function == "distribute") t1.push_back(normalize(f, NormalizationMode::for_type(CloneType::T1)).norm_lines);
    ASSERT_EQ(t1.size(), 4u);
    for (const auto& n : t1) EXPECT_EQ(n, t1.front());
}
