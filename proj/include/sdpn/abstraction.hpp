#pragma once

// Finite Kleene abstractions of action languages: sets of words truncated
// to their first (prefix) or last (suffix) l letters.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sdpn/model.hpp"

namespace sdpn {

/// Letters are bytes: 0 is tau, 1 + 2c + polarity encodes a signal on
/// channel c.  Silent actions have no letter.
using Letter = std::uint8_t;
using KWord = std::string;

constexpr Letter kTauLetter = 0;

std::optional<Letter> letter_of(const Action& a);
Action action_of(Letter l);
/// Co-letter of a signal letter; nullopt for tau.
std::optional<Letter> co_letter(Letter l);

/// An element of 2^W(l): a sorted set of words.
struct KElement {
  std::vector<KWord> words;

  static KElement zero() { return {}; }
  static KElement one() { return {{KWord{}}}; }
  static KElement of(std::vector<KWord> ws);

  bool empty() const { return words.empty(); }
  bool contains(const KWord& w) const;
  std::size_t size() const { return words.size(); }

  auto operator<=>(const KElement&) const = default;
};

KElement join(const KElement& a, const KElement& b);
KElement meet(const KElement& a, const KElement& b);
/// a <= b in the lattice order (inclusion).
bool leq(const KElement& a, const KElement& b);
/// Adds the words of b into a; returns true if a grew.
bool join_into(KElement& a, const KElement& b);

enum class AbstractionKind { Prefix, Suffix };

std::string to_string(AbstractionKind k);

class KDomain {
 public:
  KDomain(AbstractionKind kind, std::size_t order);

  AbstractionKind kind() const { return kind_; }
  std::size_t order() const { return order_; }

  /// theta: keep the first (prefix) or last (suffix) `order` letters.
  KWord canonical(std::string_view w) const;
  /// Canonical word of an action sequence; silent actions are dropped.
  KWord canonical(const std::vector<Action>& actions) const;

  /// v_a: {a}, or 1 for silent actions.
  KElement generator(const Action& a) const;
  KElement concat(const KElement& u, const KElement& v) const;
  KElement star(const KElement& x) const;
  KElement tau_star() const;
  KElement alpha(const std::vector<std::vector<Action>>& language) const;
  KElement tau_power(std::size_t n) const;

  /// Synchronizing shuffle of two raw letter sequences, truncated
  /// through the domain.  Inputs need not be canonical.
  KElement shuffle(std::string_view u, std::string_view v) const;
  KElement shuffle(const KElement& u, const KElement& v) const;
  /// Same as the pairwise shuffle of two canonical elements, computed on
  /// whole sets by peeling the letter at the kept end.
  KElement shuffle_sets(const KElement& u, const KElement& v) const;

 private:
  AbstractionKind kind_;
  std::size_t order_;
};

/// Caches word-level and set-level shuffles for one domain.
class ShuffleMemo {
 public:
  explicit ShuffleMemo(const KDomain& domain) : domain_(domain) {}

  const KElement& words(const KWord& u, const KWord& v);
  KElement sets(const KElement& u, const KElement& v);
  std::size_t size() const { return memo_.size(); }

 private:
  const KDomain& domain_;
  std::unordered_map<std::string, KElement> memo_;
  std::unordered_map<std::string, KElement> sets_;
};

/// Renders a word as dot-separated actions, "eps" for the empty word.
std::string format_word(const Sdpn& model, const KWord& w);
std::string format_element(const Sdpn& model, const KElement& k);

}  // namespace sdpn
