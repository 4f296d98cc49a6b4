#include "sdpn/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace sdpn {

ParseError::ParseError(std::size_t line, std::size_t column,
                       const std::string& message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column) {}

namespace {

struct Token {
  std::string text;
  std::size_t column;  // 1-based
};

std::vector<Token> split_words(std::string_view line, std::size_t offset = 0) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    auto start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    out.push_back({std::string(line.substr(start, i - start)), offset + start + 1});
  }
  return out;
}

std::string_view strip_comment(std::string_view line) {
  auto hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

class SdpnParser {
 public:
  Sdpn run(std::string_view text) {
    auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      line_ = i + 1;
      auto body = strip_comment(lines[i]);
      auto words = split_words(body);
      if (words.empty()) continue;
      if (words.size() == 1 && words[0].text.back() == ':' &&
          set_section(words[0].text.substr(0, words[0].text.size() - 1))) {
        continue;
      }
      switch (section_) {
        case Section::None:
          fail(words[0].column, "expected a section header (channels:, states:, stack:, rules:)");
        case Section::Channels:
          channel_line(words);
          break;
        case Section::States:
          for (const auto& w : words) declare(w, [&] { model_.add_state(w.text); });
          break;
        case Section::Stack:
          for (const auto& w : words) declare(w, [&] { model_.add_symbol(w.text); });
          break;
        case Section::Rules:
          rule_line(body, words);
          break;
      }
    }
    return std::move(model_);
  }

 private:
  enum class Section { None, Channels, States, Stack, Rules };

  [[noreturn]] void fail(std::size_t column, const std::string& msg) const {
    throw ParseError(line_, column, msg);
  }

  bool set_section(const std::string& name) {
    if (name == "channels") section_ = Section::Channels;
    else if (name == "states") section_ = Section::States;
    else if (name == "stack") section_ = Section::Stack;
    else if (name == "rules") section_ = Section::Rules;
    else return false;
    return true;
  }

  template <class F>
  void declare(const Token& t, F&& add) {
    try {
      add();
    } catch (const ModelError& e) {
      fail(t.column, e.what());
    }
  }

  void channel_line(const std::vector<Token>& words) {
    std::size_t colon = words.size();
    std::string first = words[0].text;
    if (words.size() >= 2 && words[1].text == ":") {
      colon = 1;
    } else if (first.size() > 1 && first.back() == ':') {
      first.pop_back();
      colon = 0;
    }
    if (colon == words.size()) {
      for (const auto& w : words) declare(w, [&] { model_.add_channel(w.text); });
      return;
    }
    if (colon + 1 >= words.size()) fail(words[0].column, "valued channel needs at least one value");
    for (std::size_t i = colon + 1; i < words.size(); ++i) {
      declare(words[i], [&] { model_.add_channel(first, words[i].text); });
    }
  }

  StateId state(const Token& t) const {
    auto s = model_.find_state(t.text);
    if (!s) fail(t.column, "undeclared state '" + t.text + "'");
    return *s;
  }

  SymbolId symbol(const Token& t) const {
    auto s = model_.find_symbol(t.text);
    if (!s) fail(t.column, "undeclared stack symbol '" + t.text + "'");
    return *s;
  }

  Action action(const std::string& text, std::size_t column) const {
    auto words = split_words(text);
    if (words.empty()) fail(column, "missing action");
    if (words.size() == 1 && words[0].text == "tau") return Action::tau();
    if (words.size() == 1 && words[0].text == "eps") return Action::silent();
    std::string channel, value;
    Polarity pol;
    if (words[0].text == "send" || words[0].text == "recv") {
      if (words.size() < 2 || words.size() > 3) fail(column, "expected 'send|recv CHANNEL [VALUE]'");
      pol = words[0].text == "send" ? Polarity::Send : Polarity::Receive;
      channel = words[1].text;
      if (words.size() == 3) value = words[2].text;
    } else {
      if (words.size() != 1) fail(column, "malformed action '" + text + "'");
      const auto& w = words[0].text;
      auto mark = w.find_first_of("!?");
      if (mark == std::string::npos || mark == 0) fail(column, "malformed action '" + w + "'");
      pol = w[mark] == '!' ? Polarity::Send : Polarity::Receive;
      channel = w.substr(0, mark);
      value = w.substr(mark + 1);
    }
    auto id = model_.find_channel(channel, value);
    if (!id) {
      fail(column, "undeclared channel '" + channel + (value.empty() ? "" : " " + value) + "'");
    }
    return Action::signal(*id, pol);
  }

  Thread thread(const std::vector<Token>& words, std::size_t column) const {
    if (words.empty()) fail(column, "missing right-hand side thread");
    Thread t{state(words[0]), {}};
    for (std::size_t i = 1; i < words.size(); ++i) {
      if (words[i].text == "eps" && words.size() == 2) break;
      t.stack.push_back(symbol(words[i]));
    }
    return t;
  }

  void rule_line(std::string_view body, std::vector<Token> words) {
    Rule r;
    std::size_t k = 0;
    if (words[0].text.size() > 1 && words[0].text.back() == ':') {
      r.name = words[0].text.substr(0, words[0].text.size() - 1);
      k = 1;
    }
    if (words.size() < k + 3) fail(words[0].column, "expected 'STATE SYMBOL -ACTION-> RHS'");
    r.state = state(words[k]);
    r.symbol = symbol(words[k + 1]);
    auto start = words[k + 2].column - 1;
    if (body[start] != '-') fail(words[k + 2].column, "expected '-ACTION->'");
    auto arrow = body.find("->", start + 1);
    if (arrow == std::string_view::npos) fail(words[k + 2].column, "missing '->'");
    r.action = action(std::string(body.substr(start + 1, arrow - start - 1)), start + 2);
    auto rhs = split_words(body.substr(arrow + 2), arrow + 2);
    std::vector<std::vector<Token>> parts(1);
    for (auto& t : rhs) {
      if (t.text == "|") {
        parts.emplace_back();
      } else {
        parts.back().push_back(std::move(t));
      }
    }
    auto col = arrow + 3;
    if (parts.size() > 2) fail(col, "at most one '|' allowed in a rule");
    if (parts.size() == 2) {
      r.spawned = thread(parts[0], col);
      r.target = thread(parts[1], col);
    } else {
      r.target = thread(parts[0], col);
    }
    if (!r.name.empty() && model_.find_rule(r.name)) {
      fail(words[0].column, "duplicate rule name '" + r.name + "'");
    }
    model_.add_rule(std::move(r));
  }

  Sdpn model_;
  Section section_ = Section::None;
  std::size_t line_ = 0;
};

}  // namespace

Sdpn parse_sdpn(std::string_view text) { return SdpnParser().run(text); }

std::string print_sdpn(const Sdpn& model) {
  std::ostringstream out;
  out << "channels:\n";
  std::vector<std::string> plain;
  std::vector<std::pair<std::string, std::vector<std::string>>> valued;
  for (const auto& ch : model.channels()) {
    if (ch.value.empty()) {
      plain.push_back(ch.name);
      continue;
    }
    auto it = std::ranges::find(valued, ch.name,
                                &std::pair<std::string, std::vector<std::string>>::first);
    if (it == valued.end()) {
      valued.push_back({ch.name, {}});
      it = valued.end() - 1;
    }
    it->second.push_back(ch.value);
  }
  if (!plain.empty()) {
    out << " ";
    for (const auto& c : plain) out << " " << c;
    out << "\n";
  }
  for (const auto& [name, values] : valued) {
    out << "  " << name << " :";
    for (const auto& v : values) out << " " << v;
    out << "\n";
  }
  out << "states:\n";
  for (const auto& s : model.states()) out << "  " << s << "\n";
  out << "stack:\n";
  for (const auto& s : model.symbols()) out << "  " << s << "\n";
  out << "rules:\n";
  for (const auto& r : model.rules()) out << "  " << model.format(r) << "\n";
  return out.str();
}

// --- patterns ----------------------------------------------------------------

namespace {

bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         c == '=' || c == ':' || c == '\'';
}

struct PToken {
  enum class Kind { Name, Sym, End };
  Kind kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

std::vector<PToken> lex_pattern(std::string_view text) {
  std::vector<PToken> out;
  std::size_t line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (name_char(c)) {
      auto start = i;
      auto l = line, cl = col;
      std::size_t j = i;
      while (j < text.size() &&
             (name_char(text[j]) ||
              (text[j] == '.' && j + 1 < text.size() && name_char(text[j + 1])))) {
        ++j;
      }
      advance(j - i);
      out.push_back({PToken::Kind::Name, std::string(text.substr(start, j - start)), l, cl});
      continue;
    }
    if (std::string_view("()[]{},|*+?.").find(c) != std::string_view::npos) {
      out.push_back({PToken::Kind::Sym, std::string(1, c), line, col});
      advance(1);
      continue;
    }
    throw ParseError(line, col, std::string("unexpected character '") + c + "'");
  }
  out.push_back({PToken::Kind::End, "", line, col});
  return out;
}

class PatternParser {
 public:
  PatternParser(std::string_view text, const Sdpn& model)
      : tokens_(lex_pattern(text)), model_(model) {}

  ConfigPattern run() {
    ConfigPattern p;
    if (peek().kind == PToken::Kind::End) fail(peek(), "empty pattern (write EPS for the empty configuration)");
    if (peek().kind == PToken::Kind::Name && peek().text == "EPS") {
      next();
      expect_end();
      return p;
    }
    while (peek().kind != PToken::Kind::End) {
      if (is_sym("|")) {
        next();
        continue;
      }
      p.items.push_back(item());
    }
    return p;
  }

 private:
  const PToken& peek(std::size_t k = 0) const {
    return tokens_[std::min(pos_ + k, tokens_.size() - 1)];
  }
  const PToken& next() { return tokens_[pos_++]; }
  bool is_sym(std::string_view s, std::size_t k = 0) const {
    return peek(k).kind == PToken::Kind::Sym && peek(k).text == s;
  }
  [[noreturn]] void fail(const PToken& t, const std::string& msg) const {
    throw ParseError(t.line, t.column, msg);
  }
  void expect(std::string_view s) {
    if (!is_sym(s)) fail(peek(), "expected '" + std::string(s) + "'");
    next();
  }
  void expect_end() {
    if (peek().kind != PToken::Kind::End) fail(peek(), "unexpected '" + peek().text + "'");
  }

  bool starts_item() const {
    const auto& t = peek();
    if (t.kind == PToken::Kind::End) return true;
    if (t.kind == PToken::Kind::Sym) return t.text == "{" || t.text == "|";
    return t.text == "ANY" || t.text == "_" || model_.find_state(t.text).has_value();
  }

  PatternItem item() {
    PatternItem it;
    const auto& t = peek();
    if (t.kind == PToken::Kind::Name && t.text == "ANY" && is_sym("*", 1)) {
      next();
      next();
      it.any_threads = true;
      return it;
    }
    if (is_sym("{")) {
      next();
      while (true) {
        const auto& s = next();
        if (s.kind != PToken::Kind::Name) fail(s, "expected a state name");
        it.thread.states.push_back(state(s));
        if (is_sym(",")) {
          next();
          continue;
        }
        expect("}");
        break;
      }
    } else if (t.kind == PToken::Kind::Name && t.text == "_") {
      next();
    } else if (t.kind == PToken::Kind::Name) {
      it.thread.states.push_back(state(next()));
    } else {
      fail(t, "expected ANY*, a state, '_' or '{'");
    }
    it.thread.stack = sequence(true);
    return it;
  }

  StateId state(const PToken& t) const {
    auto s = model_.find_state(t.text);
    if (!s) fail(t, "undeclared state '" + t.text + "'");
    return *s;
  }

  StackRegex sequence(bool top) {
    std::vector<StackRegex> parts;
    while (true) {
      if (top ? starts_item() : (is_sym(")") || is_sym("|") || peek().kind == PToken::Kind::End)) {
        break;
      }
      parts.push_back(postfix());
    }
    if (parts.empty()) return {};
    if (parts.size() == 1) return std::move(parts[0]);
    return StackRegex{StackRegex::Kind::Concat, {}, std::move(parts)};
  }

  StackRegex postfix() {
    auto r = atom();
    while (true) {
      StackRegex::Kind k;
      if (is_sym("*")) k = StackRegex::Kind::Star;
      else if (is_sym("+")) k = StackRegex::Kind::Plus;
      else if (is_sym("?")) k = StackRegex::Kind::Optional;
      else break;
      next();
      r = StackRegex{k, {}, {std::move(r)}};
    }
    return r;
  }

  StackRegex atom() {
    const auto& t = peek();
    if (t.kind == PToken::Kind::Name) {
      next();
      auto s = model_.find_symbol(t.text);
      if (!s) fail(t, "undeclared stack symbol '" + t.text + "'");
      return StackRegex{StackRegex::Kind::Symbol, {*s}, {}};
    }
    if (is_sym(".")) {
      next();
      return StackRegex{StackRegex::Kind::AnySymbol, {}, {}};
    }
    if (is_sym("[")) {
      next();
      StackRegex r{StackRegex::Kind::Class, {}, {}};
      while (!is_sym("]")) {
        const auto& s = next();
        if (s.kind != PToken::Kind::Name) fail(s, "expected a stack symbol in class");
        auto id = model_.find_symbol(s.text);
        if (!id) fail(s, "undeclared stack symbol '" + s.text + "'");
        r.symbols.push_back(*id);
      }
      next();
      return r;
    }
    if (is_sym("(")) {
      next();
      std::vector<StackRegex> alts{sequence(false)};
      while (is_sym("|")) {
        next();
        alts.push_back(sequence(false));
      }
      expect(")");
      if (alts.size() == 1) return std::move(alts[0]);
      return StackRegex{StackRegex::Kind::Alt, {}, std::move(alts)};
    }
    fail(t, "unexpected '" + t.text + "' in stack expression");
  }

  std::vector<PToken> tokens_;
  std::size_t pos_ = 0;
  const Sdpn& model_;
};

// End positions reachable by matching `r` against w starting at `start`.
std::set<std::size_t> regex_ends(const StackRegex& r, const Sdpn& model,
                                 const std::vector<SymbolId>& w, std::size_t start) {
  using K = StackRegex::Kind;
  switch (r.kind) {
    case K::Empty:
      return {start};
    case K::Symbol:
      if (start < w.size() && w[start] == r.symbols[0]) return {start + 1};
      return {};
    case K::AnySymbol:
      if (start < w.size() && !model.is_auxiliary(w[start])) return {start + 1};
      return {};
    case K::Class:
      if (start < w.size() && std::ranges::find(r.symbols, w[start]) != r.symbols.end()) {
        return {start + 1};
      }
      return {};
    case K::Concat: {
      std::set<std::size_t> cur{start};
      for (const auto& c : r.children) {
        std::set<std::size_t> nxt;
        for (auto s : cur) nxt.merge(regex_ends(c, model, w, s));
        cur = std::move(nxt);
      }
      return cur;
    }
    case K::Alt: {
      std::set<std::size_t> out;
      for (const auto& c : r.children) out.merge(regex_ends(c, model, w, start));
      return out;
    }
    case K::Optional: {
      auto out = regex_ends(r.children[0], model, w, start);
      out.insert(start);
      return out;
    }
    case K::Star:
    case K::Plus: {
      std::set<std::size_t> out;
      if (r.kind == K::Star) out.insert(start);
      std::vector<std::size_t> work{start};
      std::set<std::size_t> expanded;
      while (!work.empty()) {
        auto s = work.back();
        work.pop_back();
        if (!expanded.insert(s).second) continue;
        for (auto e : regex_ends(r.children[0], model, w, s)) {
          out.insert(e);
          work.push_back(e);
        }
      }
      return out;
    }
  }
  return {};
}

bool plain_thread(const Sdpn& model, const Thread& t) {
  return std::ranges::none_of(t.stack, [&](SymbolId g) { return model.is_auxiliary(g); });
}

bool thread_matches(const ThreadPattern& p, const Sdpn& model, const Thread& t) {
  if (!p.states.empty() && std::ranges::find(p.states, t.state) == p.states.end()) return false;
  return regex_ends(p.stack, model, t.stack, 0).contains(t.stack.size());
}

bool match_from(const ConfigPattern& p, const Sdpn& model, const Configuration& c,
                std::size_t item, std::size_t thread) {
  if (item == p.items.size()) return thread == c.threads.size();
  const auto& it = p.items[item];
  if (it.any_threads) {
    for (auto k = thread; k <= c.threads.size(); ++k) {
      if (match_from(p, model, c, item + 1, k)) return true;
      if (k < c.threads.size() && !plain_thread(model, c.threads[k])) return false;
    }
    return false;
  }
  return thread < c.threads.size() && thread_matches(it.thread, model, c.threads[thread]) &&
         match_from(p, model, c, item + 1, thread + 1);
}

}  // namespace

ConfigPattern parse_config_pattern(std::string_view text, const Sdpn& model) {
  return PatternParser(text, model).run();
}

bool pattern_matches(const ConfigPattern& pattern, const Sdpn& model,
                     const Configuration& c) {
  return match_from(pattern, model, c, 0, 0);
}

Configuration parse_configuration(std::string_view text, const Sdpn& model) {
  Configuration c;
  auto words = split_words(text);
  if (words.size() == 1 && words[0].text == "EPS") return c;
  if (words.empty()) throw ParseError(1, 1, "empty configuration (write EPS)");
  for (const auto& w : words) {
    if (w.text == "|") continue;
    if (auto s = model.find_state(w.text)) {
      c.threads.push_back({*s, {}});
    } else if (auto g = model.find_symbol(w.text)) {
      if (c.threads.empty()) throw ParseError(1, w.column, "stack symbol before any state");
      c.threads.back().stack.push_back(*g);
    } else {
      throw ParseError(1, w.column, "undeclared name '" + w.text + "'");
    }
  }
  return c;
}

// --- control-flow-graph programs -------------------------------------------

namespace {

class CfgpParser {
 public:
  ProgramAst run(std::string_view text) {
    auto lines = split_lines(text);
    Graph* current = nullptr;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      line_ = i + 1;
      auto words = split_words(strip_comment(lines[i]));
      if (words.empty()) continue;
      const auto& kw = words[0].text;
      if (current) {
        if (kw == "}") {
          if (words.size() != 1) fail(words[1], "unexpected text after '}'");
          if (current->entry.empty()) fail(words[0], "graph '" + current->name + "' has no entry");
          current = nullptr;
        } else if (kw == "local") {
          current->locals.push_back(var_decl(words, 1));
        } else if (kw == "entry") {
          if (words.size() != 2) fail(words[0], "expected 'entry NODE'");
          current->entry = words[1].text;
        } else {
          current->edges.push_back(edge(words));
        }
        continue;
      }
      if (kw == "channel") {
        if (words.size() < 2) fail(words[0], "expected 'channel NAME [: VALUES]'");
        std::vector<std::string> values;
        if (words.size() > 2) {
          if (words[2].text != ":" || words.size() < 4) fail(words[2], "expected ': VALUES'");
          for (std::size_t k = 3; k < words.size(); ++k) values.push_back(words[k].text);
        }
        program_.channels.push_back({words[1].text, values});
      } else if (kw == "threadlocal") {
        program_.thread_locals.push_back(var_decl(words, 1));
      } else if (kw == "thread" || kw == "proc") {
        program_.graphs.push_back(graph_header(words));
        current = &program_.graphs.back();
      } else if (kw == "main") {
        if (words.size() != 2) fail(words[0], "expected 'main THREAD'");
        program_.main = words[1].text;
      } else {
        fail(words[0], "unknown declaration '" + kw + "'");
      }
    }
    if (current) throw ParseError(line_, 1, "unterminated graph '" + current->name + "'");
    if (program_.main.empty()) throw ParseError(line_, 1, "missing 'main THREAD'");
    return std::move(program_);
  }

 private:
  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw ParseError(line_, t.column, msg);
  }

  // NAME : V1 V2 ... = INIT
  VarDecl var_decl(const std::vector<Token>& w, std::size_t k) {
    if (w.size() < k + 3 || w[k + 1].text != ":") fail(w[0], "expected 'NAME : VALUES [= INIT]'");
    VarDecl d{w[k].text, {}, {}};
    std::size_t i = k + 2;
    for (; i < w.size() && w[i].text != "="; ++i) d.domain.push_back(w[i].text);
    if (d.domain.empty()) fail(w[0], "empty domain for '" + d.name + "'");
    if (i < w.size()) {
      if (i + 2 != w.size()) fail(w[i], "expected '= INIT'");
      d.initial = w[i + 1].text;
      if (std::ranges::find(d.domain, d.initial) == d.domain.end()) {
        fail(w[i + 1], "initial value not in domain");
      }
    } else {
      d.initial = d.domain.front();
    }
    return d;
  }

  Graph graph_header(const std::vector<Token>& w) {
    Graph g;
    g.is_thread = w[0].text == "thread";
    if (w.size() < 3 || w.back().text != "{") fail(w[0], "expected '" + w[0].text + " NAME ... {'");
    g.name = w[1].text;
    if (w.size() > 3) {
      if (g.is_thread || w[2].text != "returns" || w.size() < 5) {
        fail(w[2], "expected 'proc NAME returns VALUES {'");
      }
      for (std::size_t k = 3; k + 1 < w.size(); ++k) g.returns.push_back(w[k].text);
    }
    return g;
  }

  static Expr expr(const std::string& t) {
    if (t == "*") return {Expr::Kind::Any, t};
    return {Expr::Kind::Var, t};  // resolved to Const during translation
  }

  // FROM -> TO : STATEMENT
  Edge edge(const std::vector<Token>& w) {
    if (w.size() < 5 || w[1].text != "->" || w[3].text != ":") {
      fail(w[0], "expected 'FROM -> TO : STATEMENT'");
    }
    Edge e{w[0].text, w[2].text, {}, line_};
    std::vector<Token> s(w.begin() + 4, w.end());
    auto& st = e.statement;
    const auto& head = s[0].text;
    auto arity = [&](std::size_t lo, std::size_t hi) {
      if (s.size() < lo || s.size() > hi) fail(s[0], "wrong number of operands for '" + head + "'");
    };
    if (head == "skip") {
      arity(1, 1);
    } else if (head == "assume") {
      arity(4, 4);
      st.kind = Statement::Kind::Assume;
      if (s[2].text != "==" && s[2].text != "!=") fail(s[2], "expected '==' or '!='");
      st.negated = s[2].text == "!=";
      st.lhs = expr(s[1].text);
      st.value = expr(s[3].text);
    } else if (head == "call" || head == "spawn") {
      arity(2, 2);
      st.kind = head == "call" ? Statement::Kind::Call : Statement::Kind::Spawn;
      st.target = s[1].text;
    } else if (head == "return") {
      arity(1, 2);
      st.kind = Statement::Kind::Return;
      if (s.size() == 2) {
        st.has_value = true;
        st.value = expr(s[1].text);
      }
    } else if (head == "send") {
      arity(2, 3);
      st.kind = Statement::Kind::Send;
      st.target = s[1].text;
      if (s.size() == 3) {
        st.has_value = true;
        st.value = expr(s[2].text);
      }
    } else if (head == "recv") {
      arity(2, 3);
      st.kind = Statement::Kind::Recv;
      st.target = s[1].text;
      if (s.size() == 3) st.variable = s[2].text;
    } else if (s.size() == 3 && s[1].text == "=") {
      st.kind = Statement::Kind::Assign;
      st.target = s[0].text;
      st.value = expr(s[2].text);
      st.has_value = true;
    } else {
      fail(s[0], "unknown statement '" + head + "'");
    }
    return e;
  }

  ProgramAst program_;
  std::size_t line_ = 0;
};

// Mixed-radix enumeration of valuations.
struct Schema {
  std::vector<VarDecl> vars;

  std::size_t count() const {
    std::size_t n = 1;
    for (const auto& v : vars) n *= v.domain.size();
    return n;
  }
  std::vector<std::size_t> decode(std::size_t index) const {
    std::vector<std::size_t> out(vars.size());
    for (std::size_t i = vars.size(); i-- > 0;) {
      out[i] = index % vars[i].domain.size();
      index /= vars[i].domain.size();
    }
    return out;
  }
  std::size_t encode(const std::vector<std::size_t>& vals) const {
    std::size_t index = 0;
    for (std::size_t i = 0; i < vars.size(); ++i) index = index * vars[i].domain.size() + vals[i];
    return index;
  }
  std::vector<std::size_t> initial() const {
    std::vector<std::size_t> out;
    for (const auto& v : vars) {
      out.push_back(static_cast<std::size_t>(
          std::ranges::find(v.domain, v.initial) - v.domain.begin()));
    }
    return out;
  }
  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < vars.size(); ++i) {
      if (vars[i].name == name) return i;
    }
    return std::nullopt;
  }
  std::string label(const std::vector<std::size_t>& vals) const {
    std::string out;
    for (std::size_t i = 0; i < vars.size(); ++i) {
      out += ":" + vars[i].name + "=" + vars[i].domain[vals[i]];
    }
    return out;
  }
};

class Translator {
 public:
  Translator(const ProgramAst& program, const TranslateOptions& options)
      : program_(program), options_(options) {}

  Translation run() {
    globals_.vars = program_.thread_locals;
    for (const auto& g : program_.graphs) {
      if (!g.returns.empty()) {
        globals_.vars.push_back({g.name + ".ret", g.returns, g.returns.front()});
      }
    }
    cap(globals_.count(), "thread-local valuations");
    for (std::size_t i = 0; i < globals_.count(); ++i) {
      model_.add_state("g" + globals_.label(globals_.decode(i)));
    }
    for (const auto& [name, values] : program_.channels) {
      if (values.empty()) model_.add_channel(name);
      for (const auto& v : values) model_.add_channel(name, v);
    }
    std::size_t total = 0;
    for (const auto& g : program_.graphs) {
      if (graphs_.contains(g.name)) error(0, "duplicate graph '" + g.name + "'");
      Schema locals{g.locals};
      total += locals.count() * nodes(g).size();
      cap(total, "stack symbols");
      graphs_.emplace(g.name, &g);
      for (const auto& n : nodes(g)) {
        for (std::size_t i = 0; i < locals.count(); ++i) {
          model_.add_symbol(g.name + "." + n + locals.label(locals.decode(i)));
        }
      }
    }
    for (const auto& g : program_.graphs) {
      for (const auto& e : g.edges) translate(g, e);
    }
    auto main = graphs_.find(program_.main);
    if (main == graphs_.end() || !main->second->is_thread) {
      error(0, "main thread '" + program_.main + "' is not declared");
    }
    Translation t{std::move(model_), {}};
    t.init.threads.push_back(start_thread(*main->second, t.model));
    return t;
  }

 private:
  [[noreturn]] void error(std::size_t line, const std::string& msg) const {
    throw ParseError(line, 1, msg);
  }

  void cap(std::size_t n, const char* what) const {
    if (n > options_.state_cap) {
      throw ModelError(std::string("state space cap exceeded: ") + std::to_string(n) + " " +
                       what + " (cap " + std::to_string(options_.state_cap) + ")");
    }
  }

  static std::vector<std::string> nodes(const Graph& g) {
    std::vector<std::string> out{g.entry};
    for (const auto& e : g.edges) {
      for (const auto* n : {&e.from, &e.to}) {
        if (std::ranges::find(out, *n) == out.end()) out.push_back(*n);
      }
    }
    return out;
  }

  SymbolId symbol(const Graph& g, const std::string& node,
                  const std::vector<std::size_t>& l, const Sdpn& m) const {
    Schema locals{g.locals};
    return *m.find_symbol(g.name + "." + node + locals.label(l));
  }

  StateId state(const std::vector<std::size_t>& g) const {
    return *model_.find_state("g" + globals_.label(g));
  }

  Thread start_thread(const Graph& g, const Sdpn& m) const {
    Schema locals{g.locals};
    return {*m.find_state("g" + globals_.label(globals_.initial())),
            {symbol(g, g.entry, locals.initial(), m)}};
  }

  struct Env {
    std::vector<std::size_t> g;
    std::vector<std::size_t> l;
  };

  // Variable reference: (is_local, index).
  std::optional<std::pair<bool, std::size_t>> lookup(const Schema& locals,
                                                     const std::string& name) const {
    if (auto i = locals.find(name)) return std::make_pair(true, *i);
    if (auto i = globals_.find(name)) return std::make_pair(false, *i);
    return std::nullopt;
  }

  const VarDecl& decl(const Schema& locals, std::pair<bool, std::size_t> ref) const {
    return ref.first ? locals.vars[ref.second] : globals_.vars[ref.second];
  }

  // Possible values of an expression; `domain` supplies the range of `*`.
  std::vector<std::string> values(const Expr& e, const Schema& locals, const Env& env,
                                  const std::vector<std::string>* domain,
                                  std::size_t line) const {
    if (e.kind == Expr::Kind::Any) {
      if (!domain) error(line, "'*' is not allowed here");
      return *domain;
    }
    if (auto ref = lookup(locals, e.text)) {
      const auto& d = decl(locals, *ref);
      return {d.domain[ref->first ? env.l[ref->second] : env.g[ref->second]]};
    }
    return {e.text};
  }

  void assign(Env& env, const Schema& locals, std::pair<bool, std::size_t> ref,
              const std::string& value, std::size_t line) const {
    const auto& d = decl(locals, ref);
    auto it = std::ranges::find(d.domain, value);
    if (it == d.domain.end()) {
      error(line, "value '" + value + "' outside the domain of '" + d.name + "'");
    }
    auto idx = static_cast<std::size_t>(it - d.domain.begin());
    (ref.first ? env.l : env.g)[ref.second] = idx;
  }

  const Graph& graph(const std::string& name, std::size_t line) const {
    auto it = graphs_.find(name);
    if (it == graphs_.end()) error(line, "undeclared graph '" + name + "'");
    return *it->second;
  }

  void add(const Graph& g, const Edge& e, const Env& before, const Env& after, Action a) {
    Rule r;
    r.state = state(before.g);
    r.symbol = symbol(g, e.from, before.l, model_);
    r.action = a;
    r.target = {state(after.g), {symbol(g, e.to, after.l, model_)}};
    model_.add_rule(std::move(r));
  }

  ChannelId channel(const std::string& name, const std::string& value, std::size_t line) const {
    auto id = model_.find_channel(name, value);
    if (!id) error(line, "undeclared channel '" + name + (value.empty() ? "" : " " + value) + "'");
    return *id;
  }

  const std::vector<std::string>& channel_values(const std::string& name, std::size_t line) const {
    for (const auto& [n, v] : program_.channels) {
      if (n == name) return v;
    }
    error(line, "undeclared channel '" + name + "'");
  }

  void translate(const Graph& g, const Edge& e) {
    Schema locals{g.locals};
    const auto& st = e.statement;
    using K = Statement::Kind;
    for (std::size_t gi = 0; gi < globals_.count(); ++gi) {
      for (std::size_t li = 0; li < locals.count(); ++li) {
        Env env{globals_.decode(gi), locals.decode(li)};
        switch (st.kind) {
          case K::Skip:
            add(g, e, env, env, Action::tau());
            break;
          case K::Assign: {
            auto ref = lookup(locals, st.target);
            if (!ref) error(e.line, "undeclared variable '" + st.target + "'");
            for (const auto& v : values(st.value, locals, env, &decl(locals, *ref).domain, e.line)) {
              Env after = env;
              assign(after, locals, *ref, v, e.line);
              add(g, e, env, after, Action::tau());
            }
            break;
          }
          case K::Assume: {
            auto a = values(st.lhs, locals, env, nullptr, e.line);
            auto b = values(st.value, locals, env, nullptr, e.line);
            if ((a == b) != st.negated) add(g, e, env, env, Action::tau());
            break;
          }
          case K::Call: {
            const auto& callee = graph(st.target, e.line);
            if (callee.is_thread) error(e.line, "cannot call thread '" + callee.name + "'");
            Schema cl{callee.locals};
            Rule r;
            r.state = state(env.g);
            r.symbol = symbol(g, e.from, env.l, model_);
            r.action = Action::tau();
            r.target = {state(env.g),
                        {symbol(callee, callee.entry, cl.initial(), model_),
                         symbol(g, e.to, env.l, model_)}};
            model_.add_rule(std::move(r));
            break;
          }
          case K::Return: {
            Env after = env;
            if (st.has_value) {
              if (g.returns.empty()) error(e.line, "'" + g.name + "' does not declare a result");
              auto ref = *globals_.find(g.name + ".ret");
              auto vs = values(st.value, locals, env, &g.returns, e.line);
              for (const auto& v : vs) {
                assign(after, locals, {false, ref}, v, e.line);
                pop(g, e, env, after);
              }
            } else {
              pop(g, e, env, after);
            }
            break;
          }
          case K::Spawn: {
            const auto& child = graph(st.target, e.line);
            if (!child.is_thread) error(e.line, "cannot spawn procedure '" + child.name + "'");
            Rule r;
            r.state = state(env.g);
            r.symbol = symbol(g, e.from, env.l, model_);
            r.action = Action::tau();
            r.spawned = start_thread(child, model_);
            r.target = {state(env.g), {symbol(g, e.to, env.l, model_)}};
            model_.add_rule(std::move(r));
            break;
          }
          case K::Send: {
            const auto& domain = channel_values(st.target, e.line);
            if (!st.has_value) {
              if (!domain.empty()) error(e.line, "send on valued channel needs a value");
              add(g, e, env, env, Action::signal(channel(st.target, "", e.line), Polarity::Send));
              break;
            }
            for (const auto& v : values(st.value, locals, env, &domain, e.line)) {
              add(g, e, env, env, Action::signal(channel(st.target, v, e.line), Polarity::Send));
            }
            break;
          }
          case K::Recv: {
            const auto& domain = channel_values(st.target, e.line);
            if (domain.empty()) {
              add(g, e, env, env, Action::signal(channel(st.target, "", e.line), Polarity::Receive));
              break;
            }
            std::optional<std::pair<bool, std::size_t>> ref;
            if (!st.variable.empty()) {
              ref = lookup(locals, st.variable);
              if (!ref) error(e.line, "undeclared variable '" + st.variable + "'");
            }
            for (const auto& v : domain) {
              Env after = env;
              if (ref) {
                const auto& d = decl(locals, *ref).domain;
                if (std::ranges::find(d, v) == d.end()) continue;
                assign(after, locals, *ref, v, e.line);
              }
              add(g, e, env, after,
                  Action::signal(channel(st.target, v, e.line), Polarity::Receive));
            }
            break;
          }
        }
      }
    }
  }

  void pop(const Graph& g, const Edge& e, const Env& before, const Env& after) {
    Rule r;
    r.state = state(before.g);
    r.symbol = symbol(g, e.from, before.l, model_);
    r.action = Action::tau();
    r.target = {state(after.g), {}};
    model_.add_rule(std::move(r));
  }

  const ProgramAst& program_;
  TranslateOptions options_;
  Schema globals_;
  Sdpn model_;
  std::map<std::string, const Graph*> graphs_;
};

}  // namespace

ProgramAst parse_cfgp(std::string_view text) { return CfgpParser().run(text); }

Translation cfg_to_sdpn(const ProgramAst& program, const TranslateOptions& options) {
  return Translator(program, options).run();
}

Translation load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto text = buf.str();
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".cfgp") {
    return cfg_to_sdpn(parse_cfgp(text));
  }
  return {parse_sdpn(text), {}};
}

}  // namespace sdpn
