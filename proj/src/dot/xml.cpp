// Copyright 2026 The clusterdiag Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cdiag/dot/xml.hpp"

#include <cctype>
#include <map>

#include "cdiag/common/text.hpp"

namespace cdiag::dot {

std::string escape_xml(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string serialize_node(const Node& n) {
  std::string out = "  <node id=\"" + std::to_string(n.id) + "\" role=\"" +
                    std::string(to_string(n.role)) + "\"";
  if (n.target) out += " target=\"" + std::to_string(*n.target) + "\"";
  out += ">\n";
  for (const auto& s : n.content) {
    const auto tag = tag_name(s.kind);
    out += "    <" + std::string(tag) + ">" + escape_xml(s.body) + "</" + std::string(tag) + ">\n";
  }
  out += "  </node>\n";
  return out;
}

std::string serialize(const Graph& g) {
  std::string out = "<dot>\n";
  for (const auto& n : g.nodes()) out += serialize_node(n);
  out += "</dot>\n";
  return out;
}

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  bool looking_at(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return col_; }

  char take() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) take();
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, col_, msg); }
  [[noreturn]] static void fail_at(std::size_t line, std::size_t col, const std::string& msg) {
    throw ParseError(line, col, msg);
  }

  void expect(std::string_view s) {
    if (!looking_at(s)) fail("expected '" + std::string(s) + "'");
    for (std::size_t i = 0; i < s.size(); ++i) take();
  }

  std::string name() {
    std::string out;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
      out += take();
    }
    if (out.empty()) fail("expected a name");
    return out;
  }

  // Text up to (not including) `stop`, with entities decoded.
  std::string until(char stop) {
    std::string out;
    while (true) {
      if (at_end()) fail(std::string("unterminated text, expected '") + stop + "'");
      const char c = peek();
      if (c == stop) return out;
      if (c == '<' || c == '>' || (c == '"' && stop != '"')) {
        fail(std::string("unescaped '") + c + "' in body");
      }
      if (c == '&') {
        if (looking_at("&amp;")) {
          out += '&';
          expect("&amp;");
        } else if (looking_at("&lt;")) {
          out += '<';
          expect("&lt;");
        } else if (looking_at("&gt;")) {
          out += '>';
          expect("&gt;");
        } else if (looking_at("&quot;")) {
          out += '"';
          expect("&quot;");
        } else {
          fail("unknown entity");
        }
        continue;
      }
      out += take();
    }
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

std::uint32_t parse_id(std::size_t line, std::size_t col, const std::string& value,
                       const char* what) {
  auto v = parse_int(value);
  if (!v || *v < 0 || value.empty() || !std::isdigit(static_cast<unsigned char>(value[0]))) {
    Cursor::fail_at(line, col, std::string("attribute ") + what + " must be a non-negative integer");
  }
  return static_cast<std::uint32_t>(*v);
}

}  // namespace

Graph parse(std::string_view text) {
  Cursor c(text);
  Graph g;
  c.skip_ws();
  c.expect("<dot>");
  while (true) {
    c.skip_ws();
    if (c.looking_at("</dot>")) {
      c.expect("</dot>");
      c.skip_ws();
      if (!c.at_end()) c.fail("expected end of input after '</dot>'");
      return g;
    }
    const std::size_t node_line = c.line();
    const std::size_t node_col = c.column();
    c.expect("<node");
    std::map<std::string, std::string> attrs;
    while (true) {
      const bool spaced = std::isspace(static_cast<unsigned char>(c.peek()));
      c.skip_ws();
      if (c.peek() == '>') break;
      if (!spaced) c.fail("expected whitespace before attribute");
      const std::size_t key_line = c.line();
      const std::size_t key_col = c.column();
      const std::string key = c.name();
      if (key != "id" && key != "role" && key != "target") {
        Cursor::fail_at(key_line, key_col, "unknown attribute '" + key + "'");
      }
      if (attrs.count(key)) Cursor::fail_at(key_line, key_col, "duplicate attribute '" + key + "'");
      c.expect("=\"");
      attrs[key] = c.until('"');
      c.expect("\"");
    }
    c.expect(">");
    // Attribute-level problems are reported at the start of the node tag.
    auto node_fail = [&](const std::string& msg) { Cursor::fail_at(node_line, node_col, msg); };
    if (!attrs.count("id")) node_fail("node is missing attribute id");
    if (!attrs.count("role")) node_fail("node is missing attribute role");
    const auto id = parse_id(node_line, node_col, attrs["id"], "id");
    if (id != g.size()) node_fail("expected node id " + std::to_string(g.size()));
    const auto role = role_from_string(attrs["role"]);
    if (!role) node_fail("unknown role '" + attrs["role"] + "'");
    std::optional<std::uint32_t> target;
    if (attrs.count("target")) target = parse_id(node_line, node_col, attrs["target"], "target");

    std::vector<Segment> content;
    while (true) {
      c.skip_ws();
      if (c.looking_at("</node>")) {
        c.expect("</node>");
        break;
      }
      c.expect("<");
      const std::size_t tag_line = c.line();
      const std::size_t tag_col = c.column();
      const std::string tag = c.name();
      const auto kind = segment_kind_from_tag(tag);
      if (!kind) Cursor::fail_at(tag_line, tag_col, "unknown tag <" + tag + ">");
      c.expect(">");
      std::string body = c.until('<');
      c.expect("</" + tag + ">");
      content.push_back({*kind, std::move(body)});
    }
    try {
      g.add_node(*role, std::move(content), target);
    } catch (const GrammarError& e) {
      throw ParseError(node_line, node_col, e.rule());
    }
  }
}

std::string render_prompt(const Graph& g, std::size_t budget) {
  if (budget == 0) throw MisuseError("render budget must be at least 1");
  const std::size_t shown = std::min(budget, g.size());
  std::string out = "DIAGRAM OF THOUGHT (" + std::to_string(shown) + " of " +
                    std::to_string(g.size()) + " nodes, newest first)\n";
  for (std::size_t i = 0; i < shown; ++i) out += serialize_node(g.nodes()[g.size() - 1 - i]);
  return out;
}

}  // namespace cdiag::dot
