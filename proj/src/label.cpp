#include "talearn/label.hpp"

#include <algorithm>

#include "talearn/errors.hpp"

namespace talearn {

Label::Label(std::vector<std::string> propositions) : props_(std::move(propositions)) {
  std::sort(props_.begin(), props_.end());
  props_.erase(std::unique(props_.begin(), props_.end()), props_.end());
  for (const auto& p : props_) {
    if (p.empty() || p == "." || p.find_first_of("+ \t\r\n") != std::string::npos) {
      throw PreconditionError("invalid proposition name '" + p + "'");
    }
  }
}

Label::Label(std::string_view proposition) : Label(std::vector<std::string>{std::string(proposition)}) {}

Label Label::parse(std::string_view token) {
  if (token == ".") return Label{};
  std::vector<std::string> props;
  std::size_t start = 0;
  while (true) {
    auto plus = token.find('+', start);
    props.emplace_back(token.substr(start, plus - start));
    if (plus == std::string_view::npos) break;
    start = plus + 1;
  }
  return Label(std::move(props));
}

std::string Label::str() const {
  if (props_.empty()) return ".";
  std::string out = props_.front();
  for (std::size_t i = 1; i < props_.size(); ++i) out += "+" + props_[i];
  return out;
}

std::string Label::pretty() const {
  if (props_.empty()) return "∅";
  if (props_.size() == 1) return props_.front();
  std::string out = "{" + props_.front();
  for (std::size_t i = 1; i < props_.size(); ++i) out += "," + props_[i];
  return out + "}";
}

Alphabet::Alphabet(std::vector<Label> labels) : symbols_(std::move(labels)) {
  std::sort(symbols_.begin(), symbols_.end());
  symbols_.erase(std::unique(symbols_.begin(), symbols_.end()), symbols_.end());
}

std::optional<std::size_t> Alphabet::find(const Label& l) const {
  auto it = std::lower_bound(symbols_.begin(), symbols_.end(), l);
  if (it == symbols_.end() || *it != l) return std::nullopt;
  return static_cast<std::size_t>(it - symbols_.begin());
}

std::size_t Alphabet::index(const Label& l) const {
  auto i = find(l);
  if (!i) throw PreconditionError("label '" + l.str() + "' is not in the alphabet");
  return *i;
}

Alphabet Alphabet::merged_with(const Alphabet& other) const {
  std::vector<Label> all = symbols_;
  all.insert(all.end(), other.symbols_.begin(), other.symbols_.end());
  return Alphabet(std::move(all));
}

bool Alphabet::includes(const Alphabet& other) const {
  return std::includes(symbols_.begin(), symbols_.end(), other.symbols_.begin(), other.symbols_.end());
}

}  // namespace talearn
