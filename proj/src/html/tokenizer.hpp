#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "domcity/dom.hpp"

namespace domcity::html {

// Decodes UTF-8, replacing each maximal invalid subsequence with U+FFFD, and
// normalizes CR and CRLF to LF. A leading BOM is dropped.
std::u32string decode_input(std::string_view bytes);

void append_utf8(std::string& out, char32_t cp);
std::string to_utf8(std::u32string_view text);

struct Token {
  enum class Type { kDoctype, kStartTag, kEndTag, kComment, kCharacter, kEndOfFile };

  Type type = Type::kEndOfFile;
  std::string name;  // tag or doctype name, lowercase
  std::vector<Attribute> attributes;
  bool self_closing = false;
  char32_t ch = 0;

  // Doctype only.
  bool force_quirks = false;
  std::optional<std::string> public_id;
  std::optional<std::string> system_id;

  const Attribute* attribute(std::string_view attr_name) const;
};

class Tokenizer {
 public:
  enum class State {
    kData,
    kRcdata,
    kRawtext,
    kScriptData,
    kPlaintext,
  };

  explicit Tokenizer(std::u32string input);

  Token next();

  // Content model switches requested by the tree builder.
  void set_state(State state) { state_ = state; }
  // Whether "<![CDATA[" opens a CDATA section (adjusted current node is foreign).
  void set_cdata_allowed(bool allowed) { cdata_allowed_ = allowed; }

 private:
  bool at_end() const { return pos_ >= input_.size(); }
  char32_t peek(std::size_t offset = 0) const;
  bool starts_with_ci(std::u32string_view ascii) const;
  bool starts_with(std::u32string_view text) const;

  void emit_char(char32_t ch);
  void emit_chars(std::u32string_view text);
  void emit(Token token);

  void step();
  void data_state();
  void text_state(bool rcdata);
  void script_data_state();
  void plaintext_state();
  void tag_open();
  void end_tag_open();
  void markup_declaration();
  void bogus_comment();
  void comment();
  void doctype();
  void cdata_section();
  void tag_body(Token token);
  bool raw_end_tag();

  // Consumes a character reference after '&'. Returns the replacement text;
  // if nothing matched, returns "&" with the input position unchanged.
  std::u32string char_reference(bool in_attribute);

  std::u32string input_;
  std::size_t pos_ = 0;
  State state_ = State::kData;
  bool cdata_allowed_ = false;
  std::string last_start_tag_;
  std::deque<Token> pending_;
};

}  // namespace domcity::html
