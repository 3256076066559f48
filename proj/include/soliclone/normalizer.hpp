#pragma once

#include "soliclone/default_data.hpp"
#include "soliclone/frontend.hpp"
#include "soliclone/lexer.hpp"

#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace soliclone {

enum class CloneType { T1, T2, T2c, T3_1, T3_2c };
enum class RenameMode { None, Blind, Consistent };

inline constexpr CloneType kAllCloneTypes[] = {CloneType::T1, CloneType::T2, CloneType::T2c, CloneType::T3_1,
                                               CloneType::T3_2c};

inline std::string_view to_string(CloneType t) {
    switch (t) {
    case CloneType::T1: return "t1";
    case CloneType::T2: return "t2";
    case CloneType::T2c: return "t2c";
    case CloneType::T3_1: return "t3-1";
    case CloneType::T3_2c: return "t3-2c";
    }
    return "t1";
}

inline std::string_view to_string(RenameMode r) {
    switch (r) {
    case RenameMode::None: return "none";
    case RenameMode::Blind: return "blind";
    case RenameMode::Consistent: return "consistent";
    }
    return "none";
}

/// Accepts "t1", "t2", "t2c", "t3-1" (alias "t3-2") and "t3-2c".
inline std::optional<CloneType> parse_clone_type(std::string_view s) {
    if (s == "t1") return CloneType::T1;
    if (s == "t2") return CloneType::T2;
    if (s == "t2c") return CloneType::T2c;
    if (s == "t3-1" || s == "t3-2") return CloneType::T3_1;
    if (s == "t3-2c") return CloneType::T3_2c;
    return std::nullopt;
}

struct NormalizationMode {
    CloneType clone_type = CloneType::T1;
    bool filter_enabled = false;
    RenameMode rename = RenameMode::None;

    static NormalizationMode for_type(CloneType t) {
        switch (t) {
        case CloneType::T1: return {t, false, RenameMode::None};
        case CloneType::T2:
        case CloneType::T3_1: return {t, true, RenameMode::Blind};
        case CloneType::T2c:
        case CloneType::T3_2c: return {t, true, RenameMode::Consistent};
        }
        return {};
    }

    bool is_consistent() const { return *this == for_type(clone_type); }

    friend bool operator==(const NormalizationMode&, const NormalizationMode&) = default;
};

/// Tokens that renaming leaves alone. Loaded from a plain-text list, one token
/// per line, '#' comments.
class PreservedTokens {
public:
    static PreservedTokens parse(std::string_view text) {
        PreservedTokens set;
        for (auto line : split_lines(text)) {
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            const auto b = line.find_first_not_of(" \t\r");
            if (b == std::string::npos) continue;
            const auto e = line.find_last_not_of(" \t\r");
            set.tokens_.insert(line.substr(b, e - b + 1));
        }
        return set;
    }

    static PreservedTokens load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read token list " + path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return parse(text);
    }

    static const PreservedTokens& defaults() {
        static const PreservedTokens set = parse(data::kPreservedTokens);
        return set;
    }

    bool contains(std::string_view tok) const { return tokens_.count(std::string(tok)) != 0; }
    std::size_t size() const { return tokens_.size(); }

private:
    std::unordered_set<std::string> tokens_;
};

namespace detail {

inline std::string join_tokens(const std::vector<Token>& toks) {
    std::string out;
    for (const auto& t : toks) {
        if (!out.empty()) out += ' ';
        out += t.text;
    }
    return out;
}

inline std::string join_lines(std::span<const std::string> lines) {
    std::string text;
    for (const auto& l : lines) {
        text += l;
        text += '\n';
    }
    return text;
}

inline bool is_literal_placeholder(const Token& t) { return t.kind == TokenKind::Identifier && t.text == "L"; }

} // namespace detail

namespace detail {

// Operators that cannot start a statement, so a line opening with one
// continues the previous line. Unary-capable ones (- ! ++ -- ( [) are left out.
inline bool continues_from_start(const Token& t) {
    static const std::unordered_set<std::string> ops = {
        ".",  ",",  ")",  "]",  "+",  "*",  "/",  "%",  "**", "==", "!=", "<",  ">",  "<=", ">=", "&&",
        "||", "&",  "|",  "^",  "<<", ">>", "?",  ":",  "=",  "+=", "-=", "*=", "/=", "%=", "|=", "&=",
        "^=", "<<=", ">>=", "=>"};
    static const std::unordered_set<std::string> header_words = {
        "returns", "public",   "private",   "internal", "external", "view",     "pure",
        "payable", "override", "virtual",   "constant", "immutable", "indexed", "anonymous"};
    if (t.kind == TokenKind::Punct) return ops.count(t.text) != 0;
    return t.kind == TokenKind::Identifier && header_words.count(t.text) != 0;
}

// A line ending in an operator (anything but a closing bracket) is unfinished.
inline bool continues_from_end(const Token& t) {
    return t.kind == TokenKind::Punct && t.text != ")" && t.text != "]" && t.text != ";";
}

} // namespace detail

/// Canonical layout: comments and blank lines dropped, one space between
/// tokens, a line break after every top-level ';' and around every
/// top-level brace.
/// A source line break also ends a line unless the statement visibly goes
/// on (open brackets, a trailing operator, or a leading operator or header
/// keyword on the next line), so canonical output re-prints to itself.
/// Throws LexError on an unterminated comment or string.
inline std::vector<std::string> pretty_print(std::span<const std::string> lines) {
    const auto toks = tokenize(detail::join_lines(lines));
    std::vector<std::string> out;
    std::vector<Token> current;
    int depth = 0;
    auto flush = [&] {
        if (!current.empty()) out.push_back(detail::join_tokens(current));
        current.clear();
        depth = 0;
    };
    for (const auto& t : toks) {
        if (!current.empty() && t.line != current.back().line && depth == 0 &&
            !detail::continues_from_end(current.back()) && !detail::continues_from_start(t))
            flush();
        if (t.kind == TokenKind::Punct) {
            // braces inside brackets belong to a struct literal: f({a: 1})
            if ((t.text == "{" || t.text == "}") && depth == 0) {
                flush();
                out.push_back(t.text);
                continue;
            }
            if (t.text == "(" || t.text == "[") ++depth;
            if ((t.text == ")" || t.text == "]") && depth > 0) --depth;
            if (t.text == ";" && depth == 0) {
                current.push_back(t);
                flush();
                continue;
            }
        }
        current.push_back(t);
    }
    flush();
    return out;
}

inline std::vector<std::string> pretty_print(const Fragment& frag) { return pretty_print(frag.lines); }

/// Drops brace-only lines and emit statements; strips visibility and
/// mutability keywords wherever they occur.
inline std::vector<std::string> filter_lines(std::span<const std::string> lines) {
    static const std::unordered_set<std::string> stripped = {"public", "private", "internal", "external",
                                                             "pure",   "view",    "payable"};
    std::vector<std::string> out;
    for (const auto& line : lines) {
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        if (std::all_of(toks.begin(), toks.end(), [](const Token& t) { return t.text == "{" || t.text == "}"; }))
            continue;
        if (toks.front().kind == TokenKind::Identifier && toks.front().text == "emit") continue;
        std::erase_if(toks, [](const Token& t) { return t.kind == TokenKind::Identifier && stripped.count(t.text); });
        if (!toks.empty()) out.push_back(detail::join_tokens(toks));
    }
    return out;
}

namespace detail {

/// Applies `rename_ident` to every user identifier and "L" to every literal.
/// A user identifier is an identifier token that is not preserved, is not a
/// member name after '.', and is not the literal placeholder itself.
template <typename RenameFn>
std::vector<std::string> rename_lines(std::span<const std::string> lines, const PreservedTokens& keep,
                                      RenameFn&& rename_ident) {
    std::vector<std::string> out;
    out.reserve(lines.size());
    for (const auto& line : lines) {
        auto toks = tokenize(line);
        for (std::size_t i = 0; i < toks.size(); ++i) {
            Token& t = toks[i];
            if (t.kind == TokenKind::Number || t.kind == TokenKind::String) {
                t.text = "L";
                t.kind = TokenKind::Identifier;
            } else if (t.kind == TokenKind::Identifier) {
                const bool member = i > 0 && toks[i - 1].kind == TokenKind::Punct && toks[i - 1].text == ".";
                if (member || keep.contains(t.text) || is_literal_placeholder(t)) continue;
                t.text = rename_ident(t.text);
            }
        }
        out.push_back(join_tokens(toks));
    }
    return out;
}

} // namespace detail

inline std::vector<std::string> blind_rename(std::span<const std::string> lines,
                                             const PreservedTokens& keep = PreservedTokens::defaults()) {
    return detail::rename_lines(lines, keep, [](const std::string&) { return std::string("X"); });
}

/// Identifiers become X1, X2, ... by order of first occurrence in `lines`.
inline std::vector<std::string> consistent_rename(std::span<const std::string> lines,
                                                  const PreservedTokens& keep = PreservedTokens::defaults()) {
    std::unordered_map<std::string, std::string> names;
    return detail::rename_lines(lines, keep, [&names](const std::string& id) {
        auto [it, inserted] = names.try_emplace(id);
        if (inserted) it->second = "X" + std::to_string(names.size());
        return it->second;
    });
}

struct NormalizedFragment {
    std::string source; // Fragment id
    NormalizationMode mode;
    std::vector<std::string> norm_lines;
};

inline std::vector<std::string> normalize_lines(std::span<const std::string> lines, const NormalizationMode& mode,
                                                const PreservedTokens& keep = PreservedTokens::defaults()) {
    auto out = pretty_print(lines);
    if (mode.filter_enabled) out = filter_lines(out);
    switch (mode.rename) {
    case RenameMode::None: break;
    case RenameMode::Blind: out = blind_rename(out, keep); break;
    case RenameMode::Consistent: out = consistent_rename(out, keep); break;
    }
    return out;
}

/// pretty_print, then filter_lines if enabled, then the mode's rename pass.
/// Propagates LexError from pretty_print.
inline NormalizedFragment normalize(const Fragment& frag, const NormalizationMode& mode,
                                    const PreservedTokens& keep = PreservedTokens::defaults()) {
    if (!mode.is_consistent()) throw std::invalid_argument("inconsistent normalization mode");
    return {frag.id, mode, normalize_lines(frag.lines, mode, keep)};
}

} // namespace soliclone
