#include "html/tokenizer.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace domcity::html {
namespace {

struct NamedReference {
  std::string_view name;
  std::string_view value;
};

constexpr NamedReference kNamedReferences[] = {
#include "html/entities.inc"
};

constexpr std::size_t kLongestReferenceName = 32;

constexpr char32_t kReplacement = 0xFFFD;

// Numeric references in 0x80..0x9F map through windows-1252.
constexpr std::array<char32_t, 32> kC1Replacements = {
    0x20AC, 0x0081, 0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021,
    0x02C6, 0x2030, 0x0160, 0x2039, 0x0152, 0x008D, 0x017D, 0x008F,
    0x0090, 0x2018, 0x2019, 0x201C, 0x201D, 0x2022, 0x2013, 0x2014,
    0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0x009D, 0x017E, 0x0178,
};

bool is_ascii_alpha(char32_t c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_digit(char32_t c) { return c >= '0' && c <= '9'; }
bool is_ascii_alnum(char32_t c) { return is_ascii_alpha(c) || is_ascii_digit(c); }
bool is_ascii_hex(char32_t c) {
  return is_ascii_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}
bool is_tag_whitespace(char32_t c) { return c == '\t' || c == '\n' || c == '\f' || c == ' '; }
char32_t to_ascii_lower(char32_t c) { return (c >= 'A' && c <= 'Z') ? c + 0x20 : c; }

const NamedReference* find_reference(std::string_view name) {
  auto it = std::lower_bound(std::begin(kNamedReferences), std::end(kNamedReferences), name,
                             [](const NamedReference& r, std::string_view n) { return r.name < n; });
  if (it != std::end(kNamedReferences) && it->name == name) return &*it;
  return nullptr;
}

}  // namespace

std::u32string decode_input(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  const auto* s = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  std::size_t i = 0;
  if (n >= 3 && s[0] == 0xEF && s[1] == 0xBB && s[2] == 0xBF) i = 3;

  bool last_was_cr = false;
  while (i < n) {
    unsigned char b = s[i];
    char32_t cp = kReplacement;
    std::size_t len = 1;
    if (b < 0x80) {
      cp = b;
    } else {
      int need = 0;
      char32_t lower = 0x80, upper = 0xBF;
      if (b >= 0xC2 && b <= 0xDF) {
        need = 1;
        cp = b & 0x1F;
      } else if (b >= 0xE0 && b <= 0xEF) {
        need = 2;
        cp = b & 0x0F;
        if (b == 0xE0) lower = 0xA0;
        if (b == 0xED) upper = 0x9F;
      } else if (b >= 0xF0 && b <= 0xF4) {
        need = 3;
        cp = b & 0x07;
        if (b == 0xF0) lower = 0x90;
        if (b == 0xF4) upper = 0x8F;
      }
      if (need == 0) {
        cp = kReplacement;
      } else {
        std::size_t j = 1;
        bool ok = true;
        for (; j <= static_cast<std::size_t>(need); ++j) {
          if (i + j >= n) {
            ok = false;
            break;
          }
          unsigned char c = s[i + j];
          char32_t lo = (j == 1) ? lower : 0x80;
          char32_t hi = (j == 1) ? upper : 0xBF;
          if (c < lo || c > hi) {
            ok = false;
            break;
          }
          cp = (cp << 6) | (c & 0x3F);
        }
        if (ok) {
          len = need + 1;
        } else {
          cp = kReplacement;
          len = j;  // maximal subpart
        }
      }
    }
    i += len;
    if (cp == '\n' && last_was_cr) {
      last_was_cr = false;
      continue;
    }
    last_was_cr = (cp == '\r');
    out.push_back(last_was_cr ? U'\n' : cp);
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string to_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) append_utf8(out, c);
  return out;
}

const Attribute* Token::attribute(std::string_view attr_name) const {
  for (const auto& a : attributes) {
    if (a.name == attr_name) return &a;
  }
  return nullptr;
}

Tokenizer::Tokenizer(std::u32string input) : input_(std::move(input)) {}

char32_t Tokenizer::peek(std::size_t offset) const {
  return pos_ + offset < input_.size() ? input_[pos_ + offset] : 0;
}

bool Tokenizer::starts_with(std::u32string_view text) const {
  return input_.size() - pos_ >= text.size() &&
         std::u32string_view(input_).substr(pos_, text.size()) == text;
}

bool Tokenizer::starts_with_ci(std::u32string_view ascii) const {
  if (input_.size() - pos_ < ascii.size()) return false;
  for (std::size_t i = 0; i < ascii.size(); ++i) {
    if (to_ascii_lower(input_[pos_ + i]) != to_ascii_lower(ascii[i])) return false;
  }
  return true;
}

void Tokenizer::emit_char(char32_t ch) {
  Token t;
  t.type = Token::Type::kCharacter;
  t.ch = ch;
  pending_.push_back(std::move(t));
}

void Tokenizer::emit_chars(std::u32string_view text) {
  for (char32_t c : text) emit_char(c);
}

void Tokenizer::emit(Token token) {
  if (token.type == Token::Type::kStartTag) last_start_tag_ = token.name;
  pending_.push_back(std::move(token));
}

Token Tokenizer::next() {
  while (pending_.empty()) {
    if (at_end()) {
      Token eof;
      eof.type = Token::Type::kEndOfFile;
      return eof;
    }
    step();
  }
  Token t = std::move(pending_.front());
  pending_.pop_front();
  return t;
}

void Tokenizer::step() {
  switch (state_) {
    case State::kData:
      data_state();
      break;
    case State::kRcdata:
      text_state(true);
      break;
    case State::kRawtext:
      text_state(false);
      break;
    case State::kScriptData:
      script_data_state();
      break;
    case State::kPlaintext:
      plaintext_state();
      break;
  }
}

void Tokenizer::data_state() {
  char32_t c = input_[pos_];
  if (c == '&') {
    emit_chars(char_reference(false));
  } else if (c == '<') {
    tag_open();
  } else {
    ++pos_;
    emit_char(c);
  }
}

void Tokenizer::plaintext_state() {
  char32_t c = input_[pos_++];
  emit_char(c == 0 ? kReplacement : c);
}

void Tokenizer::text_state(bool rcdata) {
  char32_t c = input_[pos_];
  if (rcdata && c == '&') {
    emit_chars(char_reference(false));
    return;
  }
  if (c == '<' && peek(1) == '/' && raw_end_tag()) return;
  ++pos_;
  emit_char(c == 0 ? kReplacement : c);
}

// Matches "</name" for the last start tag at pos_, and if so consumes the tag.
bool Tokenizer::raw_end_tag() {
  const std::size_t len = last_start_tag_.size();
  if (len == 0 || input_.size() - pos_ < len + 2) return false;
  for (std::size_t i = 0; i < len; ++i) {
    if (to_ascii_lower(input_[pos_ + 2 + i]) != static_cast<unsigned char>(last_start_tag_[i]))
      return false;
  }
  char32_t after = peek(len + 2);
  if (!(is_tag_whitespace(after) || after == '/' || after == '>')) return false;
  pos_ += len + 2;
  Token t;
  t.type = Token::Type::kEndTag;
  t.name = last_start_tag_;
  tag_body(std::move(t));
  state_ = State::kData;
  return true;
}

void Tokenizer::script_data_state() {
  enum class Mode { kNormal, kEscaped, kDoubleEscaped };
  Mode mode = Mode::kNormal;
  // Consume the whole script body in one step so the escape state can be
  // tracked across characters.
  while (!at_end()) {
    char32_t c = input_[pos_];
    if (c == '<') {
      if (peek(1) == '/') {
        if (mode != Mode::kDoubleEscaped && raw_end_tag()) return;
        if (mode == Mode::kDoubleEscaped && input_.size() - pos_ >= 8) {
          // "</script" followed by a terminator leaves double escaping.
          bool match = true;
          static constexpr std::u32string_view kScript = U"script";
          for (std::size_t i = 0; i < kScript.size(); ++i) {
            if (to_ascii_lower(input_[pos_ + 2 + i]) != kScript[i]) match = false;
          }
          char32_t after = peek(8);
          if (match && (is_tag_whitespace(after) || after == '/' || after == '>')) {
            emit_chars(std::u32string_view(input_).substr(pos_, 8));
            pos_ += 8;
            mode = Mode::kEscaped;
            continue;
          }
        }
        emit_char('<');
        ++pos_;
        continue;
      }
      if (mode == Mode::kNormal && peek(1) == '!' && peek(2) == '-' && peek(3) == '-') {
        emit_chars(U"<!--");
        pos_ += 4;
        mode = Mode::kEscaped;
        // "<!--" may be immediately followed by '-' or '>' (dash-dash state).
        while (!at_end() && input_[pos_] == '-') {
          emit_char('-');
          ++pos_;
        }
        if (!at_end() && input_[pos_] == '>') {
          emit_char('>');
          ++pos_;
          mode = Mode::kNormal;
        }
        continue;
      }
      if (mode == Mode::kEscaped && is_ascii_alpha(peek(1))) {
        static constexpr std::u32string_view kScript = U"script";
        std::size_t i = 1;
        std::u32string name;
        while (is_ascii_alpha(peek(i))) name.push_back(to_ascii_lower(peek(i++)));
        char32_t after = peek(i);
        bool terminated = is_tag_whitespace(after) || after == '/' || after == '>';
        emit_chars(std::u32string_view(input_).substr(pos_, i));
        pos_ += i;
        if (name == kScript && terminated) mode = Mode::kDoubleEscaped;
        continue;
      }
      emit_char('<');
      ++pos_;
      continue;
    }
    if (c == '-' && mode != Mode::kNormal && peek(1) == '-') {
      std::size_t i = 0;
      while (peek(i) == '-') ++i;
      emit_chars(std::u32string_view(input_).substr(pos_, i));
      pos_ += i;
      if (!at_end() && input_[pos_] == '>') {
        emit_char('>');
        ++pos_;
        mode = Mode::kNormal;
      }
      continue;
    }
    ++pos_;
    emit_char(c == 0 ? kReplacement : c);
  }
}

void Tokenizer::tag_open() {
  char32_t next = peek(1);
  if (next == '!') {
    pos_ += 2;
    markup_declaration();
  } else if (next == '/') {
    end_tag_open();
  } else if (is_ascii_alpha(next)) {
    ++pos_;
    Token t;
    t.type = Token::Type::kStartTag;
    tag_body(std::move(t));
  } else if (next == '?') {
    ++pos_;
    bogus_comment();
  } else {
    ++pos_;
    emit_char('<');
  }
}

void Tokenizer::end_tag_open() {
  char32_t next = peek(2);
  if (is_ascii_alpha(next)) {
    pos_ += 2;
    Token t;
    t.type = Token::Type::kEndTag;
    tag_body(std::move(t));
  } else if (next == '>') {
    pos_ += 3;
  } else if (pos_ + 2 >= input_.size()) {
    pos_ += 2;
    emit_chars(U"</");
  } else {
    pos_ += 2;
    bogus_comment();
  }
}

// Parses the tag name (if token.name is empty) and attribute list, then emits.
// A tag cut off by end of input is dropped.
void Tokenizer::tag_body(Token token) {
  std::string& name = token.name;
  if (name.empty()) {
    while (!at_end()) {
      char32_t c = input_[pos_];
      if (is_tag_whitespace(c) || c == '/' || c == '>') break;
      append_utf8(name, c == 0 ? kReplacement : to_ascii_lower(c));
      ++pos_;
    }
  }

  auto add_attribute = [&token](std::string attr_name, std::string value) {
    for (const auto& a : token.attributes) {
      if (a.name == attr_name) return;
    }
    token.attributes.push_back({std::move(attr_name), std::move(value)});
  };

  while (true) {
    while (!at_end() && is_tag_whitespace(input_[pos_])) ++pos_;
    if (at_end()) return;
    char32_t c = input_[pos_];
    if (c == '>') {
      ++pos_;
      break;
    }
    if (c == '/') {
      ++pos_;
      if (!at_end() && input_[pos_] == '>') {
        ++pos_;
        token.self_closing = true;
        break;
      }
      continue;
    }

    // Attribute name; a leading '=' is part of the name.
    std::string attr_name;
    append_utf8(attr_name, c == 0 ? kReplacement : to_ascii_lower(c));
    ++pos_;
    while (!at_end()) {
      char32_t d = input_[pos_];
      if (is_tag_whitespace(d) || d == '/' || d == '>' || d == '=') break;
      append_utf8(attr_name, d == 0 ? kReplacement : to_ascii_lower(d));
      ++pos_;
    }
    while (!at_end() && is_tag_whitespace(input_[pos_])) ++pos_;
    if (at_end()) return;
    if (input_[pos_] != '=') {
      add_attribute(std::move(attr_name), {});
      continue;
    }
    ++pos_;
    while (!at_end() && is_tag_whitespace(input_[pos_])) ++pos_;
    if (at_end()) return;

    std::u32string value;
    char32_t q = input_[pos_];
    if (q == '"' || q == '\'') {
      ++pos_;
      while (true) {
        if (at_end()) return;
        char32_t d = input_[pos_];
        if (d == q) {
          ++pos_;
          break;
        }
        if (d == '&') {
          value += char_reference(true);
          continue;
        }
        value.push_back(d == 0 ? kReplacement : d);
        ++pos_;
      }
    } else if (q == '>') {
      add_attribute(std::move(attr_name), {});
      ++pos_;
      break;
    } else {
      while (!at_end()) {
        char32_t d = input_[pos_];
        if (is_tag_whitespace(d) || d == '>') break;
        if (d == '&') {
          value += char_reference(true);
          continue;
        }
        value.push_back(d == 0 ? kReplacement : d);
        ++pos_;
      }
    }
    add_attribute(std::move(attr_name), to_utf8(value));
  }

  if (token.type == Token::Type::kEndTag) {
    token.attributes.clear();
    token.self_closing = false;
  }
  emit(std::move(token));
}

void Tokenizer::markup_declaration() {
  if (starts_with(U"--")) {
    pos_ += 2;
    comment();
  } else if (starts_with_ci(U"doctype")) {
    pos_ += 7;
    doctype();
  } else if (starts_with(U"[CDATA[")) {
    if (cdata_allowed_) {
      pos_ += 7;
      cdata_section();
    } else {
      bogus_comment();
    }
  } else {
    bogus_comment();
  }
}

void Tokenizer::bogus_comment() {
  while (!at_end() && input_[pos_] != '>') ++pos_;
  if (!at_end()) ++pos_;
  Token t;
  t.type = Token::Type::kComment;
  emit(std::move(t));
}

void Tokenizer::comment() {
  Token t;
  t.type = Token::Type::kComment;
  // "<!-->" and "<!--->" close immediately.
  if (starts_with(U">")) {
    pos_ += 1;
  } else if (starts_with(U"->")) {
    pos_ += 2;
  } else {
    while (!at_end()) {
      if (starts_with(U"-->")) {
        pos_ += 3;
        break;
      }
      if (starts_with(U"--!>")) {
        pos_ += 4;
        break;
      }
      ++pos_;
    }
  }
  emit(std::move(t));
}

void Tokenizer::cdata_section() {
  while (!at_end()) {
    if (starts_with(U"]]>")) {
      pos_ += 3;
      return;
    }
    emit_char(input_[pos_++]);
  }
}

void Tokenizer::doctype() {
  // A doctype always ends at the first '>', even inside a quoted identifier.
  const std::size_t begin = pos_;
  while (!at_end() && input_[pos_] != '>') ++pos_;
  const bool hit_eof = at_end();
  std::u32string_view body = std::u32string_view(input_).substr(begin, pos_ - begin);
  if (!hit_eof) ++pos_;

  Token t;
  t.type = Token::Type::kDoctype;
  t.force_quirks = hit_eof;

  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < body.size() && is_tag_whitespace(body[i])) ++i;
  };
  skip_ws();
  while (i < body.size() && !is_tag_whitespace(body[i])) {
    append_utf8(t.name, body[i] == 0 ? kReplacement : to_ascii_lower(body[i]));
    ++i;
  }
  if (t.name.empty()) t.force_quirks = true;
  skip_ws();

  auto keyword = [&](std::u32string_view kw) {
    if (body.size() - i < kw.size()) return false;
    for (std::size_t k = 0; k < kw.size(); ++k) {
      if (to_ascii_lower(body[i + k]) != kw[k]) return false;
    }
    i += kw.size();
    return true;
  };
  auto quoted = [&](std::optional<std::string>& out) {
    skip_ws();
    if (i >= body.size() || (body[i] != '"' && body[i] != '\'')) {
      t.force_quirks = true;
      return false;
    }
    char32_t q = body[i++];
    std::string value;
    bool closed = false;
    while (i < body.size()) {
      if (body[i] == q) {
        closed = true;
        ++i;
        break;
      }
      append_utf8(value, body[i] == 0 ? kReplacement : body[i]);
      ++i;
    }
    out = std::move(value);
    if (!closed) t.force_quirks = true;
    return closed;
  };

  if (i < body.size()) {
    if (keyword(U"public")) {
      if (quoted(t.public_id)) {
        skip_ws();
        if (i < body.size()) {
          if (body[i] == '"' || body[i] == '\'') {
            quoted(t.system_id);
          } else {
            t.force_quirks = true;
          }
        }
      }
    } else if (keyword(U"system")) {
      quoted(t.system_id);
    } else {
      t.force_quirks = true;
    }
  }
  emit(std::move(t));
}

std::u32string Tokenizer::char_reference(bool in_attribute) {
  const std::size_t start = pos_;  // at '&'
  char32_t next = peek(1);

  if (next == '#') {
    std::size_t p = start + 2;
    bool hex = false;
    if (p < input_.size() && (input_[p] == 'x' || input_[p] == 'X')) {
      hex = true;
      ++p;
    }
    const std::size_t digits_begin = p;
    char32_t value = 0;
    while (p < input_.size() && (hex ? is_ascii_hex(input_[p]) : is_ascii_digit(input_[p]))) {
      char32_t d = input_[p];
      unsigned digit = is_ascii_digit(d) ? d - '0' : (to_ascii_lower(d) - 'a' + 10);
      value = value * (hex ? 16 : 10) + digit;
      if (value > 0x10FFFF) value = 0x110000;
      ++p;
    }
    if (p == digits_begin) {
      pos_ = start + 1;
      return U"&";
    }
    if (p < input_.size() && input_[p] == ';') ++p;
    pos_ = p;
    if (value == 0 || value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF)) {
      return std::u32string(1, kReplacement);
    }
    if (value >= 0x80 && value <= 0x9F) value = kC1Replacements[value - 0x80];
    return std::u32string(1, value);
  }

  if (!is_ascii_alnum(next)) {
    pos_ = start + 1;
    return U"&";
  }

  std::string candidate;
  std::size_t p = start + 1;
  while (p < input_.size() && is_ascii_alnum(input_[p]) && candidate.size() < kLongestReferenceName) {
    candidate.push_back(static_cast<char>(input_[p]));
    ++p;
  }
  if (p < input_.size() && input_[p] == ';') candidate.push_back(';');

  for (std::size_t len = candidate.size(); len > 0; --len) {
    const NamedReference* ref = find_reference(std::string_view(candidate).substr(0, len));
    if (ref == nullptr) continue;
    const std::size_t after = start + 1 + len;
    if (in_attribute && candidate[len - 1] != ';' && after < input_.size() &&
        (input_[after] == '=' || is_ascii_alnum(input_[after]))) {
      break;
    }
    pos_ = after;
    return decode_input(ref->value);
  }
  pos_ = start + 1;
  return U"&";
}

}  // namespace domcity::html
