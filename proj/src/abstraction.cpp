#include "sdpn/abstraction.hpp"

#include <algorithm>
#include <iterator>
#include <map>
#include <stdexcept>

namespace sdpn {

std::optional<Letter> letter_of(const Action& a) {
  switch (a.kind()) {
    case Action::Kind::Tau:
      return kTauLetter;
    case Action::Kind::Silent:
      return std::nullopt;
    case Action::Kind::Signal:
      break;
  }
  auto code = 1 + 2 * a.channel() + (a.polarity() == Polarity::Receive ? 1 : 0);
  if (code > 255) throw std::length_error("too many channels for letter encoding");
  return static_cast<Letter>(code);
}

Action action_of(Letter l) {
  if (l == kTauLetter) return Action::tau();
  return Action::signal((l - 1) / 2,
                        (l - 1) % 2 ? Polarity::Receive : Polarity::Send);
}

std::optional<Letter> co_letter(Letter l) {
  if (l == kTauLetter) return std::nullopt;
  return static_cast<Letter>(((l - 1) ^ 1) + 1);
}

KElement KElement::of(std::vector<KWord> ws) {
  std::ranges::sort(ws);
  ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
  return KElement{std::move(ws)};
}

bool KElement::contains(const KWord& w) const {
  return std::binary_search(words.begin(), words.end(), w);
}

KElement join(const KElement& a, const KElement& b) {
  KElement out;
  out.words.reserve(a.words.size() + b.words.size());
  std::ranges::set_union(a.words, b.words, std::back_inserter(out.words));
  return out;
}

KElement meet(const KElement& a, const KElement& b) {
  KElement out;
  std::ranges::set_intersection(a.words, b.words, std::back_inserter(out.words));
  return out;
}

bool leq(const KElement& a, const KElement& b) {
  return std::ranges::includes(b.words, a.words);
}

bool join_into(KElement& a, const KElement& b) {
  if (leq(b, a)) return false;
  a = join(a, b);
  return true;
}

std::string to_string(AbstractionKind k) {
  return k == AbstractionKind::Prefix ? "prefix" : "suffix";
}

KDomain::KDomain(AbstractionKind kind, std::size_t order)
    : kind_(kind), order_(order) {
  if (order == 0) throw std::invalid_argument("abstraction order must be >= 1");
}

KWord KDomain::canonical(std::string_view w) const {
  if (w.size() <= order_) return KWord(w);
  if (kind_ == AbstractionKind::Prefix) return KWord(w.substr(0, order_));
  return KWord(w.substr(w.size() - order_));
}

KWord KDomain::canonical(const std::vector<Action>& actions) const {
  KWord w;
  for (const auto& a : actions) {
    if (auto l = letter_of(a)) w.push_back(static_cast<char>(*l));
  }
  return canonical(w);
}

KElement KDomain::generator(const Action& a) const {
  auto l = letter_of(a);
  if (!l) return KElement::one();
  return KElement{{KWord(1, static_cast<char>(*l))}};
}

KElement KDomain::concat(const KElement& u, const KElement& v) const {
  if (u.empty() || v.empty()) return {};
  std::vector<KWord> out;
  out.reserve(u.words.size() * v.words.size());
  for (const auto& x : u.words) {
    if (kind_ == AbstractionKind::Prefix && x.size() >= order_) {
      out.push_back(x);
      continue;
    }
    for (const auto& y : v.words) {
      if (kind_ == AbstractionKind::Suffix && y.size() >= order_) {
        out.push_back(y);
      } else {
        out.push_back(canonical(x + y));
      }
    }
  }
  return KElement::of(std::move(out));
}

KElement KDomain::star(const KElement& x) const {
  auto y = KElement::one();
  while (true) {
    auto next = join(KElement::one(), concat(x, y));
    if (next == y) return y;
    y = std::move(next);
  }
}

KElement KDomain::tau_star() const { return star(generator(Action::tau())); }

KElement KDomain::tau_power(std::size_t n) const {
  return KElement{{canonical(KWord(n, static_cast<char>(kTauLetter)))}};
}

KElement KDomain::alpha(const std::vector<std::vector<Action>>& language) const {
  std::vector<KWord> out;
  for (const auto& w : language) out.push_back(canonical(w));
  return KElement::of(std::move(out));
}

KElement KDomain::shuffle(std::string_view u, std::string_view v) const {
  // S(i, j) is the truncated shuffle of u[i:] and v[j:].
  const std::size_t n = u.size(), m = v.size();
  std::vector<KElement> table((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> KElement& {
    return table[i * (m + 1) + j];
  };
  auto prepend = [this](Letter l, const KElement& rest, std::vector<KWord>& out) {
    KElement head{{KWord(1, static_cast<char>(l))}};
    auto c = concat(head, rest);
    out.insert(out.end(), c.words.begin(), c.words.end());
  };
  for (std::size_t i = n + 1; i-- > 0;) {
    for (std::size_t j = m + 1; j-- > 0;) {
      if (i == n) {
        at(i, j) = KElement{{canonical(v.substr(j))}};
        continue;
      }
      if (j == m) {
        at(i, j) = KElement{{canonical(u.substr(i))}};
        continue;
      }
      auto a = static_cast<Letter>(u[i]);
      auto b = static_cast<Letter>(v[j]);
      std::vector<KWord> out;
      prepend(a, at(i + 1, j), out);
      prepend(b, at(i, j + 1), out);
      if (co_letter(a) == b) prepend(kTauLetter, at(i + 1, j + 1), out);
      at(i, j) = KElement::of(std::move(out));
    }
  }
  return at(0, 0);
}

KElement KDomain::shuffle(const KElement& u, const KElement& v) const {
  std::vector<KWord> out;
  for (const auto& x : u.words) {
    for (const auto& y : v.words) {
      auto s = shuffle(std::string_view(x), std::string_view(y));
      out.insert(out.end(), s.words.begin(), s.words.end());
    }
  }
  return KElement::of(std::move(out));
}

namespace {

using Views = std::vector<std::string_view>;
using Groups = std::vector<std::pair<Letter, Views>>;

struct SetShuffle {
  bool suffix;
  std::vector<KWord>& out;
  KWord acc;

  // Words grouped by the letter at the kept end, sorted by letter.
  Groups split(const Views& ws, bool& has_empty) const {
    std::vector<std::pair<Letter, std::string_view>> tagged;
    tagged.reserve(ws.size());
    has_empty = false;
    for (auto w : ws) {
      if (w.empty()) {
        has_empty = true;
      } else if (suffix) {
        tagged.push_back({static_cast<Letter>(w.back()), w.substr(0, w.size() - 1)});
      } else {
        tagged.push_back({static_cast<Letter>(w.front()), w.substr(1)});
      }
    }
    std::ranges::stable_sort(tagged, {}, &std::pair<Letter, std::string_view>::first);
    Groups by;
    for (const auto& [l, rest] : tagged) {
      if (by.empty() || by.back().first != l) by.push_back({l, {}});
      by.back().second.push_back(rest);
    }
    return by;
  }
  void emit() {
    out.push_back(acc);
    if (suffix) std::reverse(out.back().begin(), out.back().end());
  }
  void step(Letter l, const Views& u, const Views& v, std::size_t k) {
    acc.push_back(static_cast<char>(l));
    run(u, v, k - 1);
    acc.pop_back();
  }
  void run(const Views& u, const Views& v, std::size_t k) {
    if (k == 0) {
      emit();
      return;
    }
    bool ue, ve;
    auto bu = split(u, ue);
    auto bv = split(v, ve);
    if (ue && ve) emit();
    for (const auto& [a, us] : bu) step(a, us, v, k);
    for (const auto& [b, vs] : bv) step(b, u, vs, k);
    for (const auto& [a, us] : bu) {
      auto c = co_letter(a);
      if (!c) continue;
      auto it = std::ranges::lower_bound(bv, *c, {}, &Groups::value_type::first);
      if (it != bv.end() && it->first == *c) step(kTauLetter, us, it->second, k);
    }
  }
};

}  // namespace

KElement KDomain::shuffle_sets(const KElement& u, const KElement& v) const {
  if (u.empty() || v.empty()) return {};
  std::vector<KWord> out;
  SetShuffle s{kind_ == AbstractionKind::Suffix, out, {}};
  Views uv(u.words.begin(), u.words.end());
  Views vv(v.words.begin(), v.words.end());
  s.run(uv, vv, order_);
  return KElement::of(std::move(out));
}

const KElement& ShuffleMemo::words(const KWord& u, const KWord& v) {
  const KWord& a = std::min(u, v);
  const KWord& b = std::max(u, v);
  std::string key = a;
  key.push_back('\xff');
  key += b;
  auto it = memo_.find(key);
  if (it == memo_.end()) {
    it = memo_.emplace(std::move(key), domain_.shuffle(std::string_view(a),
                                                       std::string_view(b)))
             .first;
  }
  return it->second;
}

KElement ShuffleMemo::sets(const KElement& u, const KElement& v) {
  if (u.empty() || v.empty()) return {};
  if (u == KElement::one()) return v;
  if (v == KElement::one()) return u;
  if (u.size() == 1 && v.size() == 1) return words(u.words[0], v.words[0]);
  const auto& a = std::min(u, v);
  const auto& b = std::max(u, v);
  std::string key;
  for (const auto* e : {&a, &b}) {
    key += std::to_string(e->size());
    key.push_back(':');
    for (const auto& w : e->words) {
      key += std::to_string(w.size());
      key.push_back(':');
      key += w;
    }
  }
  auto it = sets_.find(key);
  if (it == sets_.end()) it = sets_.emplace(std::move(key), domain_.shuffle_sets(a, b)).first;
  return it->second;
}

std::string format_word(const Sdpn& model, const KWord& w) {
  if (w.empty()) return "eps";
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out.push_back('.');
    out += model.format(action_of(static_cast<Letter>(w[i])));
  }
  return out;
}

std::string format_element(const Sdpn& model, const KElement& k) {
  std::string out = "{";
  for (std::size_t i = 0; i < k.words.size(); ++i) {
    if (i) out += ", ";
    out += format_word(model, k.words[i]);
  }
  return out + "}";
}

}  // namespace sdpn
