#pragma once

#include <array>
#include <cctype>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace soliclone {

enum class TokenKind { Identifier, Number, String, Punct };

struct Token {
    TokenKind kind;
    std::string text;
    int line;           // 1-based
    std::size_t offset; // byte offset into the source
};

enum class LexErrorKind { UnterminatedComment, UnterminatedString };

inline std::string_view to_string(LexErrorKind kind) {
    return kind == LexErrorKind::UnterminatedComment ? "UnterminatedComment" : "UnterminatedString";
}

class LexError : public std::runtime_error {
public:
    LexError(LexErrorKind kind, int line)
        : std::runtime_error(std::string(to_string(kind)) + " at line " + std::to_string(line)),
          kind_(kind), line_(line) {}

    LexErrorKind kind() const noexcept { return kind_; }
    int line() const noexcept { return line_; }

private:
    LexErrorKind kind_;
    int line_;
};

namespace detail {

inline bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

inline bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Longest operators first so that a prefix scan picks the maximal munch.
inline constexpr std::array<std::string_view, 26> kOperators = {
    ">>>=", "<<=", ">>=", ">>>", "**", "++", "--", "==", "!=", "<=", ">=", "&&", "||",
    "=>",   "->",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", ":="};

} // namespace detail

/// Splits Solidity source into tokens, dropping comments and whitespace.
///
/// Strings keep their quotes and escapes verbatim (including `hex"..."` and
/// `unicode"..."` prefixes); numbers are never signed. Throws LexError on an
/// unterminated block comment or string literal.
inline std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    int line = 1;
    std::size_t i = 0;
    const std::size_t n = src.size();

    auto lex_string = [&](std::size_t start, std::size_t quote_pos) {
        const char quote = src[quote_pos];
        std::size_t j = quote_pos + 1;
        while (true) {
            if (j >= n || src[j] == '\n') throw LexError(LexErrorKind::UnterminatedString, line);
            if (src[j] == '\\') {
                j += 2;
                continue;
            }
            if (src[j] == quote) break;
            ++j;
        }
        out.push_back({TokenKind::String, std::string(src.substr(start, j + 1 - start)), line, start});
        i = j + 1;
    };

    while (i < n) {
        const char c = src[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') ++i;
        } else if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            const int start_line = line;
            i += 2;
            while (true) {
                if (i + 1 >= n) throw LexError(LexErrorKind::UnterminatedComment, start_line);
                if (src[i] == '*' && src[i + 1] == '/') break;
                if (src[i] == '\n') ++line;
                ++i;
            }
            i += 2;
        } else if (c == '"' || c == '\'') {
            lex_string(i, i);
        } else if (detail::is_ident_start(c)) {
            std::size_t j = i;
            while (j < n && detail::is_ident_char(src[j])) ++j;
            const std::string_view word = src.substr(i, j - i);
            if ((word == "hex" || word == "unicode") && j < n && (src[j] == '"' || src[j] == '\'')) {
                lex_string(i, j);
                continue;
            }
            out.push_back({TokenKind::Identifier, std::string(word), line, i});
            i = j;
        } else if (detail::is_digit(c) || (c == '.' && i + 1 < n && detail::is_digit(src[i + 1]))) {
            std::size_t j = i;
            if (c == '0' && i + 1 < n && (src[i + 1] == 'x' || src[i + 1] == 'X')) {
                j += 2;
                while (j < n && (std::isxdigit(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            } else {
                while (j < n && (detail::is_digit(src[j]) || src[j] == '_')) ++j;
                if (j + 1 < n && src[j] == '.' && detail::is_digit(src[j + 1])) {
                    ++j;
                    while (j < n && (detail::is_digit(src[j]) || src[j] == '_')) ++j;
                }
                if (j < n && (src[j] == 'e' || src[j] == 'E')) {
                    std::size_t k = j + 1;
                    if (k < n && src[k] == '-') ++k;
                    if (k < n && detail::is_digit(src[k])) {
                        j = k;
                        while (j < n && (detail::is_digit(src[j]) || src[j] == '_')) ++j;
                    }
                }
            }
            out.push_back({TokenKind::Number, std::string(src.substr(i, j - i)), line, i});
            i = j;
        } else {
            std::size_t len = 1;
            for (const auto op : detail::kOperators) {
                if (src.substr(i, op.size()) == op && op.size() > len) len = op.size();
            }
            // Keep a multi-byte UTF-8 sequence together.
            if (static_cast<unsigned char>(c) >= 0x80) {
                while (i + len < n && (static_cast<unsigned char>(src[i + len]) & 0xC0) == 0x80) ++len;
            }
            out.push_back({TokenKind::Punct, std::string(src.substr(i, len)), line, i});
            i += len;
        }
    }
    return out;
}

} // namespace soliclone
