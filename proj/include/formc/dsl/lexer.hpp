#pragma once

#include "formc/error.hpp"

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace formc::dsl
{

enum class TokenKind
{
  identifier,
  keyword,
  number,
  string,
  punctuation
};

struct SourceSpan
{
  SourceLocation begin;
  std::size_t length = 0;
};

struct Token
{
  TokenKind kind;
  std::string text;
  SourceSpan span;

  bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
  bool is_punct(std::string_view t) const { return is(TokenKind::punctuation, t); }
  bool is_keyword(std::string_view t) const { return is(TokenKind::keyword, t); }
};

inline bool is_keyword(std::string_view word)
{
  static constexpr std::string_view keywords[]
      = {"dx",           "dS",            "ds",       "def",
         "return",       "FiniteElement", "VectorElement",
         "TestFunction", "TrialFunction", "Function", "grad",
         "div",          "dot",           "transp",   "mult"};
  for (auto k : keywords)
    if (k == word)
      return true;
  return false;
}

/// Split form source into tokens. `#` comments and whitespace are dropped;
/// a backslash directly before a line break joins the lines.
inline std::vector<Token> tokenize(std::string_view source)
{
  std::vector<Token> tokens;
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t pos = 0;

  auto advance = [&](std::size_t n)
  {
    for (std::size_t k = 0; k < n && pos < source.size(); ++k, ++pos)
    {
      if (source[pos] == '\n')
      {
        ++line;
        column = 1;
      }
      else
        ++column;
    }
  };

  while (pos < source.size())
  {
    const char c = source[pos];
    const SourceLocation here{line, column};

    if (c == ' ' || c == '\t' || c == '\r' || c == '\n')
    {
      advance(1);
      continue;
    }
    if (c == '#')
    {
      while (pos < source.size() && source[pos] != '\n')
        advance(1);
      continue;
    }
    if (c == '\\')
    {
      std::size_t k = pos + 1;
      while (k < source.size() && (source[k] == ' ' || source[k] == '\t' || source[k] == '\r'))
        ++k;
      if (k < source.size() && source[k] == '\n')
      {
        advance(k + 1 - pos);
        continue;
      }
      throw Error(ErrorKind::illegal_character, "stray '\\'", here);
    }

    const auto uc = static_cast<unsigned char>(c);
    if (std::isalpha(uc) || c == '_')
    {
      std::size_t end = pos;
      while (end < source.size()
             && (std::isalnum(static_cast<unsigned char>(source[end])) || source[end] == '_'))
        ++end;
      std::string word(source.substr(pos, end - pos));
      const TokenKind kind = is_keyword(word) ? TokenKind::keyword : TokenKind::identifier;
      tokens.push_back({kind, word, {here, end - pos}});
      advance(end - pos);
      continue;
    }
    if (std::isdigit(uc) || (c == '.' && pos + 1 < source.size()
                             && std::isdigit(static_cast<unsigned char>(source[pos + 1]))))
    {
      std::size_t end = pos;
      auto digits = [&]
      {
        while (end < source.size() && std::isdigit(static_cast<unsigned char>(source[end])))
          ++end;
      };
      digits();
      if (end < source.size() && source[end] == '.')
      {
        ++end;
        digits();
      }
      if (end < source.size() && (source[end] == 'e' || source[end] == 'E'))
      {
        std::size_t k = end + 1;
        if (k < source.size() && (source[k] == '+' || source[k] == '-'))
          ++k;
        if (k < source.size() && std::isdigit(static_cast<unsigned char>(source[k])))
        {
          end = k;
          digits();
        }
      }
      tokens.push_back({TokenKind::number, std::string(source.substr(pos, end - pos)),
                        {here, end - pos}});
      advance(end - pos);
      continue;
    }
    if (c == '"' || c == '\'')
    {
      std::size_t end = pos + 1;
      while (end < source.size() && source[end] != c && source[end] != '\n')
        ++end;
      if (end >= source.size() || source[end] != c)
        throw Error(ErrorKind::syntax_error, "unterminated string literal", here);
      tokens.push_back({TokenKind::string, std::string(source.substr(pos + 1, end - pos - 1)),
                        {here, end + 1 - pos}});
      advance(end + 1 - pos);
      continue;
    }
    switch (c)
    {
    case '(':
    case ')':
    case ',':
    case '=':
    case '+':
    case '-':
    case '*':
    case '/':
    case ':':
      tokens.push_back({TokenKind::punctuation, std::string(1, c), {here, 1}});
      advance(1);
      continue;
    default:
      break;
    }
    throw Error(ErrorKind::illegal_character,
                std::string("illegal character '") + c + "'", here);
  }
  return tokens;
}

} // namespace formc::dsl
