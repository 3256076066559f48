#pragma once

#include "soliclone/lexer.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace soliclone {

// ---------------------------------------------------------------------------
// Source model
// ---------------------------------------------------------------------------

/// Splits text on '\n'. A trailing newline does not open an extra line and
/// empty text has no lines. Carriage returns are kept as part of the line.
inline std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        const auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(start));
            break;
        }
        lines.emplace_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

struct SourceFile {
    std::string path;
    std::string text;
    int line_count = 0;

    static SourceFile from_text(std::string path, std::string text) {
        SourceFile f{std::move(path), std::move(text), 0};
        f.line_count = static_cast<int>(split_lines(f.text).size());
        return f;
    }

    friend bool operator==(const SourceFile&, const SourceFile&) = default;
};

struct LineSpan {
    int start = 0; // inclusive, 1-based
    int end = 0;   // inclusive
    int length() const { return end - start + 1; }
    friend bool operator==(const LineSpan&, const LineSpan&) = default;
};

enum class DeclKind { Contract, Library, Interface };
enum class Visibility { Public, External, Internal, Private, Unspecified };
enum class Mutability { Pure, View, Payable, NonPayable };
enum class FunctionKind { Function, Constructor, Fallback, Receive, Modifier, FreeFunction };

inline std::string_view to_string(DeclKind k) {
    switch (k) {
    case DeclKind::Contract: return "contract";
    case DeclKind::Library: return "library";
    case DeclKind::Interface: return "interface";
    }
    return "contract";
}

inline std::string_view to_string(Visibility v) {
    switch (v) {
    case Visibility::Public: return "public";
    case Visibility::External: return "external";
    case Visibility::Internal: return "internal";
    case Visibility::Private: return "private";
    case Visibility::Unspecified: return "unspecified";
    }
    return "unspecified";
}

inline std::string_view to_string(Mutability m) {
    switch (m) {
    case Mutability::Pure: return "pure";
    case Mutability::View: return "view";
    case Mutability::Payable: return "payable";
    case Mutability::NonPayable: return "nonpayable";
    }
    return "nonpayable";
}

inline std::string_view to_string(FunctionKind k) {
    switch (k) {
    case FunctionKind::Function: return "function";
    case FunctionKind::Constructor: return "constructor";
    case FunctionKind::Fallback: return "fallback";
    case FunctionKind::Receive: return "receive";
    case FunctionKind::Modifier: return "modifier";
    case FunctionKind::FreeFunction: return "free_function";
    }
    return "function";
}

struct Param {
    std::string name; // may be empty
    std::string type;
    friend bool operator==(const Param&, const Param&) = default;
};

struct StateVar {
    std::string name;
    std::string type;
    Visibility visibility = Visibility::Unspecified;
    friend bool operator==(const StateVar&, const StateVar&) = default;
};

struct EventDecl {
    std::string name;
    std::vector<std::string> param_types;
    friend bool operator==(const EventDecl&, const EventDecl&) = default;
};

struct UsingDecl {
    std::string library;
    std::string target; // "*" for wildcard
    friend bool operator==(const UsingDecl&, const UsingDecl&) = default;
};

/// A function-like member. `span` covers the whole definition, from the line
/// holding the introducing keyword to the line holding the closing brace, so
/// that fragments carry the signature as well as the body.
struct FunctionDecl {
    std::string name; // empty for constructor, fallback and receive
    FunctionKind kind = FunctionKind::Function;
    std::vector<Param> params;
    std::vector<Param> returns;
    Visibility visibility = Visibility::Unspecified;
    Mutability mutability = Mutability::NonPayable;
    std::optional<LineSpan> span;
    std::vector<std::string> body_lines;

    bool has_body() const { return span.has_value(); }

    /// Name used in reports: synthetic "<constructor>", "<fallback>", "<receive>".
    std::string display_name() const {
        switch (kind) {
        case FunctionKind::Constructor: return "<constructor>";
        case FunctionKind::Fallback: return "<fallback>";
        case FunctionKind::Receive: return "<receive>";
        default: return name;
        }
    }

    friend bool operator==(const FunctionDecl&, const FunctionDecl&) = default;
};

struct ContractDecl {
    std::string name;
    DeclKind kind = DeclKind::Contract;
    bool is_abstract = false;
    std::vector<std::string> bases;
    std::vector<StateVar> state_vars;
    std::vector<FunctionDecl> functions;
    std::vector<EventDecl> events;
    std::vector<FunctionDecl> modifiers;
    std::vector<UsingDecl> usings;
    LineSpan span;

    friend bool operator==(const ContractDecl&, const ContractDecl&) = default;
};

inline constexpr std::string_view kFileScopeName = "<file>";

struct ParsedUnit {
    SourceFile source;
    std::vector<std::string> pragma_versions;
    std::vector<ContractDecl> declarations;
    /// Free functions, file-level events, constants and the like. Never counted
    /// as a declaration; named "<file>".
    ContractDecl file_scope = [] {
        ContractDecl d;
        d.name = std::string(kFileScopeName);
        return d;
    }();
    /// Struct, enum and user-defined value type names declared anywhere in the file.
    std::set<std::string> user_types;

    const ContractDecl* find(std::string_view contract) const {
        if (contract == kFileScopeName) return &file_scope;
        for (const auto& d : declarations)
            if (d.name == contract) return &d;
        return nullptr;
    }

    friend bool operator==(const ParsedUnit&, const ParsedUnit&) = default;
};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class SourceErrorKind { UnbalancedBraces, BinaryOrEmptyInput, UnterminatedComment, UnterminatedString, Unreadable };

inline std::string_view to_string(SourceErrorKind k) {
    switch (k) {
    case SourceErrorKind::UnbalancedBraces: return "UnbalancedBraces";
    case SourceErrorKind::BinaryOrEmptyInput: return "BinaryOrEmptyInput";
    case SourceErrorKind::UnterminatedComment: return "UnterminatedComment";
    case SourceErrorKind::UnterminatedString: return "UnterminatedString";
    case SourceErrorKind::Unreadable: return "Unreadable";
    }
    return "Unreadable";
}

class SourceError : public std::runtime_error {
public:
    SourceError(SourceErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    SourceErrorKind kind() const noexcept { return kind_; }

private:
    SourceErrorKind kind_;
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

inline bool is_valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        if (c == 0) return false;
        std::size_t extra = 0;
        if (c < 0x80) extra = 0;
        else if ((c & 0xE0) == 0xC0) extra = 1;
        else if ((c & 0xF0) == 0xE0) extra = 2;
        else if ((c & 0xF8) == 0xF0) extra = 3;
        else return false;
        if (extra > 0 && i + extra >= s.size()) return false;
        for (std::size_t k = 1; k <= extra; ++k) {
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
        }
        i += extra + 1;
    }
    return true;
}

inline bool is_word(const Token& t) { return t.kind == TokenKind::Identifier || t.kind == TokenKind::Number; }

/// Joins type tokens into display text: "mapping(address => uint256)",
/// "address payable", "uint256[]".
inline std::string join_type(const std::vector<Token>& toks, std::size_t begin, std::size_t end) {
    std::string out;
    for (std::size_t i = begin; i < end; ++i) {
        const Token& t = toks[i];
        if (i > begin) {
            const Token& prev = toks[i - 1];
            if ((is_word(prev) && is_word(t)) || t.text == "=>" || prev.text == "=>") out += ' ';
        }
        out += t.text;
    }
    return out;
}

inline bool is_data_location(std::string_view w) {
    return w == "memory" || w == "storage" || w == "calldata";
}

inline std::optional<Visibility> visibility_of(std::string_view w) {
    if (w == "public") return Visibility::Public;
    if (w == "external") return Visibility::External;
    if (w == "internal") return Visibility::Internal;
    if (w == "private") return Visibility::Private;
    return std::nullopt;
}

class Parser {
public:
    Parser(const SourceFile& file, std::vector<Token> toks)
        : lines_(split_lines(file.text)), toks_(std::move(toks)) {}

    void parse_into(ParsedUnit& unit) {
        unit_ = &unit;
        while (pos_ < toks_.size()) {
            const std::string& w = toks_[pos_].text;
            if (w == "pragma") {
                parse_pragma(unit);
            } else if (w == "import") {
                skip_statement();
            } else if (w == "abstract" && peek_is(1, "contract")) {
                ++pos_;
                parse_contract(unit, true);
            } else if ((w == "contract" || w == "library" || w == "interface") && peek_kind(1, TokenKind::Identifier)) {
                parse_contract(unit, false);
            } else {
                const std::size_t before = pos_;
                parse_member(unit.file_scope, /*file_level=*/true);
                if (pos_ == before) ++pos_;
            }
        }
    }

private:
    bool at(std::string_view w) const { return pos_ < toks_.size() && toks_[pos_].text == w; }
    bool peek_is(std::size_t k, std::string_view w) const {
        return pos_ + k < toks_.size() && toks_[pos_ + k].text == w;
    }
    bool peek_kind(std::size_t k, TokenKind kind) const {
        return pos_ + k < toks_.size() && toks_[pos_ + k].kind == kind;
    }

    // Index of the token matching the opener at `open` ('(' '[' '{').
    std::size_t matching(std::size_t open) const {
        const std::string& o = toks_[open].text;
        const std::string c = o == "(" ? ")" : o == "[" ? "]" : "}";
        int depth = 0;
        for (std::size_t i = open; i < toks_.size(); ++i) {
            if (toks_[i].kind != TokenKind::Punct) continue;
            if (toks_[i].text == o) ++depth;
            else if (toks_[i].text == c && --depth == 0) return i;
        }
        return toks_.size();
    }

    // Advances past the next ';' at nesting depth zero, or stops before an
    // unmatched '}' so the enclosing body can close. With `block_ends`, a
    // balanced '{...}' at depth zero also ends the statement (struct, enum).
    void skip_statement(bool block_ends = true) {
        int depth = 0;
        while (pos_ < toks_.size()) {
            const Token& t = toks_[pos_];
            if (t.kind == TokenKind::Punct) {
                if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
                else if (t.text == ")" || t.text == "]" || t.text == "}") {
                    if (depth == 0) return;
                    --depth;
                    if (block_ends && depth == 0 && t.text == "}") {
                        // A block at depth zero ends a construct such as a struct.
                        ++pos_;
                        if (at(";")) ++pos_;
                        return;
                    }
                } else if (t.text == ";" && depth == 0) {
                    ++pos_;
                    return;
                }
            }
            ++pos_;
        }
    }

    std::vector<std::string> lines_between(int first, int last) const {
        std::vector<std::string> out;
        for (int l = first; l <= last && l <= static_cast<int>(lines_.size()); ++l) out.push_back(lines_[l - 1]);
        return out;
    }

    void parse_pragma(ParsedUnit& unit) {
        const std::size_t start = pos_;
        skip_statement();
        if (start + 1 < toks_.size() && toks_[start + 1].text == "solidity" && start + 2 < pos_) {
            const Token& first = toks_[start + 2];
            const Token& semi = toks_[pos_ - 1];
            if (semi.text == ";" && semi.offset > first.offset) {
                std::string raw;
                // Re-read the raw text: version numbers do not survive tokenization.
                for (std::size_t i = start + 2; i + 1 < pos_; ++i) {
                    if (i > start + 2 && toks_[i].offset > toks_[i - 1].offset + toks_[i - 1].text.size()) raw += ' ';
                    raw += toks_[i].text;
                }
                unit.pragma_versions.push_back(raw);
            }
        }
    }

    std::vector<std::string> parse_bases(std::size_t begin, std::size_t end) const {
        std::vector<std::string> bases;
        std::size_t i = begin;
        while (i < end) {
            std::string name;
            while (i < end && toks_[i].text != "," && toks_[i].text != "(") name += toks_[i++].text;
            if (i < end && toks_[i].text == "(") i = matching(i) + 1;
            while (i < end && toks_[i].text != ",") ++i;
            ++i;
            if (!name.empty() && std::find(bases.begin(), bases.end(), name) == bases.end()) bases.push_back(name);
        }
        return bases;
    }

    void parse_contract(ParsedUnit& unit, bool is_abstract) {
        ContractDecl decl;
        const Token& kw = toks_[pos_];
        decl.kind = kw.text == "library" ? DeclKind::Library
                    : kw.text == "interface" ? DeclKind::Interface
                                             : DeclKind::Contract;
        decl.is_abstract = is_abstract;
        decl.span.start = kw.line;
        decl.name = toks_[pos_ + 1].text;
        pos_ += 2;
        std::size_t brace = pos_;
        while (brace < toks_.size() && toks_[brace].text != "{") ++brace;
        if (pos_ < brace && at("is")) decl.bases = parse_bases(pos_ + 1, brace);
        if (brace >= toks_.size()) {
            pos_ = toks_.size();
            return;
        }
        const std::size_t close = matching(brace);
        pos_ = brace + 1;
        while (pos_ < close) {
            const std::size_t before = pos_;
            parse_member(decl, false);
            if (pos_ == before) ++pos_;
        }
        decl.span.end = close < toks_.size() ? toks_[close].line : static_cast<int>(lines_.size());
        pos_ = close + 1;
        if (decl.kind == DeclKind::Interface) {
            for (auto& f : decl.functions) {
                f.span.reset();
                f.body_lines.clear();
            }
        }
        unit.declarations.push_back(std::move(decl));
    }

    std::vector<Param> parse_params(std::size_t open, std::size_t close) const {
        std::vector<Param> params;
        std::size_t i = open + 1;
        while (i < close) {
            std::vector<Token> part;
            int depth = 0;
            while (i < close) {
                const Token& t = toks_[i];
                if (t.text == "(" || t.text == "[") ++depth;
                if (t.text == ")" || t.text == "]") --depth;
                if (t.text == "," && depth == 0) break;
                if (!(t.kind == TokenKind::Identifier && (is_data_location(t.text) || t.text == "indexed")))
                    part.push_back(t);
                ++i;
            }
            ++i;
            if (part.empty()) continue;
            Param p;
            const Token& last = part.back();
            const bool named = part.size() >= 2 && last.kind == TokenKind::Identifier && last.text != "payable" &&
                               part[part.size() - 2].text != ".";
            std::size_t type_end = part.size();
            if (named) {
                p.name = last.text;
                type_end = part.size() - 1;
            }
            p.type = join_type(part, 0, type_end);
            params.push_back(std::move(p));
        }
        return params;
    }

    // Parses modifiers/visibility/returns up to the body, then the body.
    void parse_function_tail(FunctionDecl& fn, int header_line) {
        while (pos_ < toks_.size() && !at("{") && !at(";") && !at("}")) {
            const Token& t = toks_[pos_];
            if (auto v = visibility_of(t.text)) {
                fn.visibility = *v;
            } else if (t.text == "pure") {
                fn.mutability = Mutability::Pure;
            } else if (t.text == "view" || t.text == "constant") {
                fn.mutability = Mutability::View;
            } else if (t.text == "payable") {
                fn.mutability = Mutability::Payable;
            } else if (t.text == "returns" && peek_is(1, "(")) {
                const std::size_t close = matching(pos_ + 1);
                fn.returns = parse_params(pos_ + 1, close);
                pos_ = close + 1;
                continue;
            } else if (t.text == "(") {
                pos_ = matching(pos_) + 1;
                continue;
            }
            ++pos_;
        }
        if (at("{")) {
            const std::size_t close = matching(pos_);
            const int end_line = close < toks_.size() ? toks_[close].line : static_cast<int>(lines_.size());
            fn.span = LineSpan{header_line, end_line};
            fn.body_lines = lines_between(header_line, end_line);
            pos_ = close + 1;
        } else if (at(";")) {
            ++pos_;
        }
    }

    FunctionDecl parse_function_like(FunctionKind kind) {
        FunctionDecl fn;
        fn.kind = kind;
        const int header_line = toks_[pos_].line;
        ++pos_; // keyword
        if (kind == FunctionKind::Function || kind == FunctionKind::Modifier || kind == FunctionKind::FreeFunction) {
            if (peek_kind(0, TokenKind::Identifier)) {
                fn.name = toks_[pos_].text;
                ++pos_;
            } else if (kind != FunctionKind::Modifier) {
                fn.kind = FunctionKind::Fallback; // pre-0.6 unnamed fallback
            }
        }
        if (at("(")) {
            const std::size_t close = matching(pos_);
            fn.params = parse_params(pos_, close);
            pos_ = close + 1;
        }
        parse_function_tail(fn, header_line);
        return fn;
    }

    void parse_member(ContractDecl& decl, bool file_level) {
        if (pos_ >= toks_.size()) return;
        const Token& t = toks_[pos_];
        const std::string& w = t.text;
        if (t.kind == TokenKind::Punct) {
            if (w == "{") pos_ = matching(pos_) + 1;
            else if (w == ";") ++pos_;
            return;
        }
        if (w == "function") {
            decl.functions.push_back(parse_function_like(file_level ? FunctionKind::FreeFunction : FunctionKind::Function));
        } else if ((w == "constructor" || w == "fallback" || w == "receive") && peek_is(1, "(")) {
            const auto kind = w == "constructor" ? FunctionKind::Constructor
                              : w == "fallback"  ? FunctionKind::Fallback
                                                 : FunctionKind::Receive;
            decl.functions.push_back(parse_function_like(kind));
        } else if (w == "modifier" && peek_kind(1, TokenKind::Identifier)) {
            decl.modifiers.push_back(parse_function_like(FunctionKind::Modifier));
        } else if (w == "event" && peek_kind(1, TokenKind::Identifier)) {
            EventDecl ev;
            ev.name = toks_[pos_ + 1].text;
            pos_ += 2;
            if (at("(")) {
                const std::size_t close = matching(pos_);
                for (auto& p : parse_params(pos_, close)) ev.param_types.push_back(p.type);
                pos_ = close + 1;
            }
            skip_statement();
            decl.events.push_back(std::move(ev));
        } else if (w == "using") {
            const std::size_t start = pos_ + 1;
            skip_statement(false);
            std::size_t end = pos_;
            if (end > start && toks_[end - 1].text == ";") --end;
            std::size_t for_pos = start;
            while (for_pos < end && toks_[for_pos].text != "for") ++for_pos;
            UsingDecl u;
            u.library = join_type(toks_, start, for_pos);
            std::size_t target_end = end;
            if (target_end > for_pos + 1 && toks_[target_end - 1].text == "global") --target_end;
            if (for_pos < end) u.target = join_type(toks_, for_pos + 1, target_end);
            decl.usings.push_back(std::move(u));
        } else if ((w == "struct" || w == "enum") && peek_kind(1, TokenKind::Identifier)) {
            unit_->user_types.insert(toks_[pos_ + 1].text);
            skip_statement();
        } else if (w == "type" && peek_kind(1, TokenKind::Identifier) && peek_is(2, "is")) {
            unit_->user_types.insert(toks_[pos_ + 1].text);
            skip_statement();
        } else if (w == "error" && peek_kind(1, TokenKind::Identifier)) {
            skip_statement();
        } else {
            parse_state_var(decl);
        }
    }

    void parse_state_var(ContractDecl& decl) {
        const std::size_t start = pos_;
        skip_statement();
        std::size_t end = pos_;
        if (end > start && toks_[end - 1].text == ";") --end;
        else return; // not a declaration statement
        // Left-hand side: everything before a top-level '='.
        std::vector<Token> lhs;
        int depth = 0;
        for (std::size_t i = start; i < end; ++i) {
            const Token& t = toks_[i];
            if (t.text == "(" || t.text == "[") ++depth;
            if (t.text == ")" || t.text == "]") --depth;
            if (t.text == "=" && depth == 0) break;
            lhs.push_back(t);
        }
        StateVar var;
        std::vector<Token> type_toks;
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            const Token& t = lhs[i];
            if (auto v = visibility_of(t.text)) {
                var.visibility = *v;
            } else if (t.text == "constant" || t.text == "immutable" || t.text == "transient") {
            } else if (t.text == "override") {
                if (i + 1 < lhs.size() && lhs[i + 1].text == "(") {
                    int d = 0;
                    for (++i; i < lhs.size(); ++i) {
                        if (lhs[i].text == "(") ++d;
                        if (lhs[i].text == ")" && --d == 0) break;
                    }
                }
            } else {
                type_toks.push_back(t);
            }
        }
        if (type_toks.size() < 2 || type_toks.back().kind != TokenKind::Identifier) return;
        var.name = type_toks.back().text;
        var.type = join_type(type_toks, 0, type_toks.size() - 1);
        decl.state_vars.push_back(std::move(var));
    }

    std::vector<std::string> lines_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    ParsedUnit* unit_ = nullptr;
};

} // namespace detail

/// Parses one source file into its top-level declarations.
///
/// Tolerant: constructs the parser does not recognise are skipped statement by
/// statement and never abort the file. Throws SourceError for binary input
/// (NUL bytes or invalid UTF-8), unbalanced braces, and unterminated comments
/// or strings. Empty text yields an empty unit.
inline ParsedUnit parse_source(const SourceFile& file) {
    if (!detail::is_valid_utf8(file.text))
        throw SourceError(SourceErrorKind::BinaryOrEmptyInput, file.path + ": binary or non-UTF-8 input");

    std::vector<Token> toks;
    try {
        toks = tokenize(file.text);
    } catch (const LexError& e) {
        const auto kind = e.kind() == LexErrorKind::UnterminatedComment ? SourceErrorKind::UnterminatedComment
                                                                         : SourceErrorKind::UnterminatedString;
        throw SourceError(kind, file.path + ": " + e.what());
    }

    int depth = 0;
    for (const auto& t : toks) {
        if (t.kind != TokenKind::Punct) continue;
        if (t.text == "{") ++depth;
        if (t.text == "}" && --depth < 0)
            throw SourceError(SourceErrorKind::UnbalancedBraces,
                              file.path + ": unmatched '}' at line " + std::to_string(t.line));
    }
    if (depth != 0) throw SourceError(SourceErrorKind::UnbalancedBraces, file.path + ": unclosed '{' at end of file");

    ParsedUnit unit;
    unit.source = file;
    detail::Parser parser(file, std::move(toks));
    parser.parse_into(unit);
    return unit;
}

// ---------------------------------------------------------------------------
// Fragments
// ---------------------------------------------------------------------------

struct Fragment {
    std::string id; // "<file>:<start>-<end>", suffixed "#n" on collision
    std::string file;
    std::string contract;
    std::string function; // display name, e.g. "transfer" or "<constructor>"
    FunctionKind kind = FunctionKind::Function;
    LineSpan span;
    std::vector<std::string> lines;

    int line_count() const { return static_cast<int>(lines.size()); }
    friend bool operator==(const Fragment&, const Fragment&) = default;
};

struct FragmentWindow {
    int min_lines = 10;
    int max_lines = 2500;
    bool include_modifiers = false;
};

struct ExtractionStats {
    std::size_t extracted = 0;
    std::size_t below_min = 0;
    std::size_t above_max = 0;
    std::size_t without_body = 0;

    ExtractionStats& operator+=(const ExtractionStats& o) {
        extracted += o.extracted;
        below_min += o.below_min;
        above_max += o.above_max;
        without_body += o.without_body;
        return *this;
    }
};

/// One fragment per function-like member with a body whose line count lies in
/// the window, ordered by start line. Interface declarations never have bodies.
inline std::vector<Fragment> extract_fragments(const ParsedUnit& unit, const FragmentWindow& window,
                                               ExtractionStats& stats) {
    if (window.min_lines > window.max_lines) throw std::invalid_argument("min_lines > max_lines");
    std::vector<Fragment> out;
    auto visit = [&](const ContractDecl& decl, const std::vector<FunctionDecl>& fns) {
        for (const auto& fn : fns) {
            if (!fn.has_body()) {
                ++stats.without_body;
                continue;
            }
            const int len = fn.span->length();
            if (len < window.min_lines) {
                ++stats.below_min;
                continue;
            }
            if (len > window.max_lines) {
                ++stats.above_max;
                continue;
            }
            Fragment f;
            f.file = unit.source.path;
            f.contract = decl.name;
            f.function = fn.display_name();
            f.kind = fn.kind;
            f.span = *fn.span;
            f.lines = fn.body_lines;
            out.push_back(std::move(f));
            ++stats.extracted;
        }
    };
    for (const auto& decl : unit.declarations) {
        visit(decl, decl.functions);
        if (window.include_modifiers) visit(decl, decl.modifiers);
    }
    visit(unit.file_scope, unit.file_scope.functions);
    if (window.include_modifiers) visit(unit.file_scope, unit.file_scope.modifiers);

    std::stable_sort(out.begin(), out.end(), [](const Fragment& a, const Fragment& b) {
        return std::tie(a.span.start, a.span.end) < std::tie(b.span.start, b.span.end);
    });
    std::map<std::string, int> seen;
    for (auto& f : out) {
        std::string id = f.file + ":" + std::to_string(f.span.start) + "-" + std::to_string(f.span.end);
        const int n = ++seen[id];
        if (n > 1) id += "#" + std::to_string(n);
        f.id = std::move(id);
    }
    return out;
}

inline std::vector<Fragment> extract_fragments(const ParsedUnit& unit, int min_lines, int max_lines) {
    ExtractionStats stats;
    return extract_fragments(unit, FragmentWindow{min_lines, max_lines, false}, stats);
}

// ---------------------------------------------------------------------------
// Demographics
// ---------------------------------------------------------------------------

struct DemographicsReport {
    std::size_t total_files = 0;
    std::size_t contracts = 0;
    std::size_t libraries = 0;
    std::size_t interfaces = 0;
    std::size_t events = 0;
    std::size_t modifiers = 0;

    DemographicsReport& operator+=(const DemographicsReport& o) {
        total_files += o.total_files;
        contracts += o.contracts;
        libraries += o.libraries;
        interfaces += o.interfaces;
        events += o.events;
        modifiers += o.modifiers;
        return *this;
    }
    friend DemographicsReport operator+(DemographicsReport a, const DemographicsReport& b) { return a += b; }
    friend bool operator==(const DemographicsReport&, const DemographicsReport&) = default;
};

inline DemographicsReport corpus_demographics(const std::vector<ParsedUnit>& units) {
    DemographicsReport r;
    r.total_files = units.size();
    for (const auto& u : units) {
        for (const auto& d : u.declarations) {
            switch (d.kind) {
            case DeclKind::Contract: ++r.contracts; break;
            case DeclKind::Library: ++r.libraries; break;
            case DeclKind::Interface: ++r.interfaces; break;
            }
            r.events += d.events.size();
            r.modifiers += d.modifiers.size();
        }
        r.events += u.file_scope.events.size();
        r.modifiers += u.file_scope.modifiers.size();
    }
    return r;
}

// ---------------------------------------------------------------------------
// Corpus discovery
// ---------------------------------------------------------------------------

struct SkippedFile {
    std::string path;
    SourceErrorKind kind;
    std::string message;
};

struct Corpus {
    std::vector<ParsedUnit> units; // sorted by path
    std::vector<SkippedFile> skipped;

    const ParsedUnit* find(std::string_view path) const {
        auto it = std::lower_bound(units.begin(), units.end(), path,
                                   [](const ParsedUnit& u, std::string_view p) { return u.source.path < p; });
        return it != units.end() && it->source.path == path ? &*it : nullptr;
    }
};

class CorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses a list of in-memory sources; files that fail are recorded, not thrown.
inline Corpus parse_corpus(std::vector<SourceFile> files) {
    std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    Corpus corpus;
    for (auto& f : files) {
        try {
            corpus.units.push_back(parse_source(f));
        } catch (const SourceError& e) {
            corpus.skipped.push_back({f.path, e.kind(), e.what()});
        }
    }
    return corpus;
}

/// Recursively loads every ".sol" file under `root`. Paths are stored relative
/// to the root with '/' separators. Throws CorpusError if the root is not a
/// readable directory.
inline Corpus load_corpus(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw CorpusError("corpus root is not a readable directory: " + root.string());
    std::vector<SourceFile> files;
    std::vector<SkippedFile> unreadable;
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
    if (ec) throw CorpusError("cannot read corpus root " + root.string() + ": " + ec.message());
    for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) break;
        if (!it->is_regular_file(ec) || it->path().extension() != ".sol") continue;
        const std::string rel = fs::relative(it->path(), root, ec).generic_string();
        std::ifstream in(it->path(), std::ios::binary);
        if (!in) {
            unreadable.push_back({rel, SourceErrorKind::Unreadable, rel + ": cannot open"});
            continue;
        }
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        files.push_back(SourceFile::from_text(rel, std::move(text)));
    }
    Corpus corpus = parse_corpus(std::move(files));
    corpus.skipped.insert(corpus.skipped.end(), unreadable.begin(), unreadable.end());
    std::sort(corpus.skipped.begin(), corpus.skipped.end(),
              [](const auto& a, const auto& b) { return a.path < b.path; });
    return corpus;
}

// ---------------------------------------------------------------------------
// Signatures
// ---------------------------------------------------------------------------

/// Canonical ABI-like parameter type: aliases resolved (uint -> uint256,
/// byte -> bytes1, ...), data locations and "payable" dropped, no spaces.
/// Lowercased unless `keep_case`.
inline std::string canonical_type(std::string_view type_text, bool keep_case = false) {
    std::vector<Token> toks;
    try {
        toks = tokenize(type_text);
    } catch (const LexError&) {
        return std::string(type_text);
    }
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        std::string w = toks[i].text;
        if (toks[i].kind == TokenKind::Identifier) {
            if (detail::is_data_location(w)) continue;
            if (w == "payable" && i > 0 && toks[i - 1].text == "address") continue;
            if (w == "uint") w = "uint256";
            else if (w == "int") w = "int256";
            else if (w == "byte") w = "bytes1";
            else if (w == "fixed") w = "fixed128x18";
            else if (w == "ufixed") w = "ufixed128x18";
        }
        out += w;
    }
    if (!keep_case)
        std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

/// e.g. "transfer(address,uint256)", "<constructor>(address)".
inline std::string canonical_signature(const FunctionDecl& fn) {
    std::string name = fn.display_name();
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    std::string out = name + "(";
    for (std::size_t i = 0; i < fn.params.size(); ++i) {
        if (i) out += ',';
        out += canonical_type(fn.params[i].type);
    }
    return out + ")";
}

/// Same shape as canonical_signature but keeps the declared spelling; used for display.
inline std::string display_signature(const FunctionDecl& fn) {
    std::string out = fn.display_name() + "(";
    for (std::size_t i = 0; i < fn.params.size(); ++i) {
        if (i) out += ',';
        out += canonical_type(fn.params[i].type, true);
    }
    return out + ")";
}

} // namespace soliclone
