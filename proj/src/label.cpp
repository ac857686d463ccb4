#include "nerbreaker/label.hpp"

namespace nerbreaker {

Label Label::begin(std::string type) {
  if (type.empty()) throw LabelError("B- label needs an entity type");
  return Label(LabelKind::Begin, std::move(type));
}

Label Label::inside(std::string type) {
  if (type.empty()) throw LabelError("I- label needs an entity type");
  return Label(LabelKind::Inside, std::move(type));
}

Label Label::parse(std::string_view text) {
  if (text == "O") return outside();
  if (text.size() > 2 && text[1] == '-') {
    std::string type(text.substr(2));
    if (text[0] == 'B') return begin(std::move(type));
    if (text[0] == 'I') return inside(std::move(type));
  }
  throw LabelError("unknown label '" + std::string(text) + "'");
}

std::string Label::str() const {
  switch (kind_) {
    case LabelKind::Outside:
      return "O";
    case LabelKind::Begin:
      return "B-" + type_;
    case LabelKind::Inside:
      return "I-" + type_;
  }
  return "O";
}

std::strong_ordering Label::operator<=>(const Label& other) const {
  if (is_outside() || other.is_outside()) {
    if (is_outside() && other.is_outside()) return std::strong_ordering::equal;
    return is_outside() ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  return str() <=> other.str();
}

}  // namespace nerbreaker
