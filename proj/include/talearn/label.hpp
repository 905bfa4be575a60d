#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace talearn {

/// An element of 2^AP: a set of atomic propositions, stored sorted and deduplicated so
/// that labels compare by value.
///
/// Text form: "." for the empty label, otherwise proposition names joined by '+'
/// ("coffee", "coffee+tv").
class Label {
 public:
  Label() = default;
  explicit Label(std::vector<std::string> propositions);
  explicit Label(std::string_view proposition);

  static Label parse(std::string_view token);

  bool empty() const { return props_.empty(); }
  const std::vector<std::string>& propositions() const { return props_; }

  std::string str() const;
  /// Human-facing form used in DOT output ("∅", "coffee", "{coffee,tv}").
  std::string pretty() const;

  friend auto operator<=>(const Label&, const Label&) = default;
  friend bool operator==(const Label&, const Label&) = default;

 private:
  std::vector<std::string> props_;
};

/// Finite, sorted set of labels. Automata refer to symbols by their index here.
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<Label> labels);

  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  const Label& operator[](std::size_t i) const { return symbols_[i]; }
  const std::vector<Label>& symbols() const { return symbols_; }
  auto begin() const { return symbols_.begin(); }
  auto end() const { return symbols_.end(); }

  std::optional<std::size_t> find(const Label& l) const;
  bool contains(const Label& l) const { return find(l).has_value(); }
  /// Index of `l`; throws PreconditionError if absent.
  std::size_t index(const Label& l) const;

  Alphabet merged_with(const Alphabet& other) const;
  bool includes(const Alphabet& other) const;

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

 private:
  std::vector<Label> symbols_;
};

}  // namespace talearn
